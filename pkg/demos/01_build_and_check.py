"""Build a PRISM model and check reachability and reward properties.

Knuth-Yao's die: simulate a fair six-sided die with fair coin flips.
Each face comes up with probability exactly 1/6, and the expected number
of coin flips is 11/3.
"""

from stormlet import CheckSettings, BuildOptions, build_model, check, domains, parse_program, parse_property
from stormlet.benchmarks import bundled_path

program = parse_program(bundled_path("die.pm").read_text())
model = build_model(program, BuildOptions(number_domain=domains.EXACT))
print(f"model: {model.kind} with {model.state_count} states, {model.transition_count} transitions")

exact = CheckSettings(solver="exact-elimination", exact=True)

for face in ("one", "two", "three", "four", "five", "six"):
    result = check(model, parse_property(f'P=? [ F "{face}" ]'), exact)
    print(f"P(eventually {face:>5}) = {result.value_at_initial}")

flips = check(model, parse_property('R{"coin_flips"}=? [ F "done" ]'), exact)
print(f"expected coin flips    = {flips.value_at_initial}")

# the same question through the float pipeline, default precision 1e-6 relative
float_model = build_model(program, BuildOptions(number_domain=domains.FLOAT))
approx = check(float_model, parse_property('P=? [ F "one" ]'), CheckSettings(solver="vi"))
print(f"value iteration        = {approx.value_at_initial:.8f}")

# step-bounded: after three coin flips, only one path has shown face one
bounded = check(model, parse_property('P=? [ F<=3 "one" ]'), exact)
print(f"P(face one in <=3 flips) = {bounded.value_at_initial}")
