"""Nondeterminism: optimize over schedulers and extract one.

The task model offers a fast gamble and a slow safe route; minimum and
maximum expected completion times differ, and exact policy iteration
returns the optimizing scheduler alongside the value.
"""

from stormlet import BuildOptions, CheckSettings, build_model, check, domains, parse_program, parse_property
from stormlet.benchmarks import bundled_path

model = build_model(
    parse_program(bundled_path("mdp_coins.pm").read_text()),
    BuildOptions(number_domain=domains.EXACT),
)
exact = CheckSettings(solver="policy-iteration", exact=True)

for direction in ("min", "max"):
    prob = check(model, parse_property(f'P{direction}=? [ F "done" ]'), exact)
    time = check(model, parse_property(f'R{direction}{{"time"}}=? [ F "done" ]'), exact)
    print(f"{direction}: P(F done) = {prob.value_at_initial}, E[time] = {time.value_at_initial}")

time_min = check(model, parse_property('Rmin{"time"}=? [ F "done" ]'), exact)
init = model.initial_states[0]
chosen = time_min.scheduler[init]
action = model.choices.action_of(list(model.choices.rows_of(init))[chosen])
print(f"optimal first action from the initial state: [{action}]")

# sound interval methods agree within their precision on the float model
float_model = build_model(parse_program(bundled_path("mdp_coins.pm").read_text()), BuildOptions())
for solver in ("vi", "ii", "ovi"):
    result = check(float_model, parse_property('Rmin{"time"}=? [ F "done" ]'), CheckSettings(solver=solver))
    print(f"{solver:>3}: E_min[time] = {result.value_at_initial:.8f}")
