"""Merge behaviorally equivalent states before checking.

With only the labels a property mentions, Knuth-Yao's 13-state die
collapses: faces the property cannot distinguish merge, and the values
on the quotient equal the originals exactly.
"""

from stormlet import BuildOptions, CheckSettings, build_model, check, domains, parse_program, parse_property
from stormlet.benchmarks import bundled_path
from stormlet.bisimulation import property_relevant_minimize

model = build_model(
    parse_program(bundled_path("die.pm").read_text()),
    BuildOptions(number_domain=domains.EXACT),
)
props = [parse_property('P=? [ F "one" ]'), parse_property('R{"coin_flips"}=? [ F "done" ]')]
small, rewritten = property_relevant_minimize(model, props)
print(f"original: {model.state_count} states; quotient: {small.state_count} states")

exact = CheckSettings(solver="exact-elimination", exact=True)
for prop, small_prop in zip(props, rewritten):
    a = check(model, prop, exact).value_at_initial
    b = check(small, small_prop, exact).value_at_initial
    print(f"original {a} == quotient {b}: {a == b}")
