"""Load models from the explicit transition/label/reward text formats.

The .tra file enumerates transitions (first line is the model kind), the
.lab file declares labels and assigns them to states, and an optional
.rew file attaches state rewards.
"""

from stormlet import CheckSettings, check, domains, model_from_tables, parse_explicit, parse_property
from stormlet.benchmarks import bundled_path

tables = parse_explicit(
    bundled_path("coin.tra").read_text(),
    bundled_path("coin.lab").read_text(),
)
model = model_from_tables(tables, domain=domains.EXACT)
print(f"coin model: {model.state_count} states, labels {sorted(model.labeling.names())}")
result = check(model, parse_property('P=? [ F "t" ]'), CheckSettings(solver="exact-elimination", exact=True))
print(f"P(F t) = {result.value_at_initial}")

# a chain with state rewards: expected accumulated reward until the end
tables = parse_explicit(
    bundled_path("walk.tra").read_text(),
    bundled_path("walk.lab").read_text(),
    bundled_path("walk.rew").read_text(),
)
walk = model_from_tables(tables, domain=domains.EXACT)
reward = check(walk, parse_property('R=? [ F "end" ]'), CheckSettings(solver="exact-elimination", exact=True))
print(f"E[reward until end] = {reward.value_at_initial}")

# nondeterministic explicit models use 'src choice dst prob' lines
tables = parse_explicit(
    bundled_path("mdp2.tra").read_text(),
    bundled_path("mdp2.lab").read_text(),
)
mdp = model_from_tables(tables, domain=domains.EXACT)
for direction in ("max", "min"):
    result = check(mdp, parse_property(f'P{direction}=? [ F "t" ]'), CheckSettings(solver="policy-iteration", exact=True))
    print(f"P{direction}(F t) = {result.value_at_initial}")
