"""Why sound and exact solvers exist.

On a 20-state lazy random walk, plain value iteration stops too early:
its termination criterion observes small per-step change, not small
error.  Interval iteration and optimistic value iteration bracket the
true value, and the exact solvers remove numerics entirely.
"""

from fractions import Fraction

from stormlet import CheckSettings, check, domains, model_from_tables, parse_explicit, parse_property
from stormlet.benchmarks import bundled_path

tables = parse_explicit(
    bundled_path("slow_chain.tra").read_text(),
    bundled_path("slow_chain.lab").read_text(),
)
float_model = model_from_tables(tables, domain=domains.FLOAT)
exact_model = model_from_tables(tables, domain=domains.EXACT)
prop = parse_property('P=? [ F "target" ]')

truth = check(exact_model, prop, CheckSettings(solver="exact-elimination", exact=True))
print(f"exact value at state 1: {truth.values[1]} = {float(truth.values[1]):.10f}")

for solver in ("vi", "ii", "ovi"):
    result = check(float_model, prop, CheckSettings(solver=solver, precision=Fraction(1, 10**6)))
    err = abs(result.values[1] - float(truth.values[1])) / float(truth.values[1])
    verdict = "within 1e-6" if err <= 1e-6 else f"OFF BY {err:.2e} (unsound stop criterion)"
    print(f"{solver:>3}: {result.values[1]:.10f}  {verdict}")

# rational search sharpens a float approximation to the exact rational
from stormlet.solvers import rational_search, verify_solution
from systems_demo import slow_chain_system  # local helper below

system = slow_chain_system()
outcome = rational_search(system)
print(f"rational search recovers x(1) = {outcome.values[0]} exactly, "
      f"substitution check: {verify_solution(system, outcome.values)}")
