"""Leave probabilities symbolic: solution functions and regions.

The Knuth-Yao die with a biased coin of unknown heads-probability p has
a closed-form face probability.  State elimination computes it, a point
instantiation recovers the concrete chain, and region lifting brackets
the probability over a whole interval of biases without computing the
function at all.
"""

from fractions import Fraction

from stormlet import BuildOptions, CheckSettings, build_model, check, domains, parse_program, parse_property
from stormlet.benchmarks import bundled_path
from stormlet.parametric import instantiate, parse_region, region_lifting, solution_function

model = build_model(
    parse_program(bundled_path("pdie.pm").read_text()),
    BuildOptions(number_domain=domains.PARAMETRIC),
)
f = solution_function(model, "one")
print(f"P(F one) as a function of the coin bias: {f}")
for p in (Fraction(1, 3), Fraction(1, 2), Fraction(2, 3)):
    print(f"  f({p}) = {f.evaluate({'p': p})}")

concrete = instantiate(model, {"p": Fraction(1, 2)})
result = check(concrete, parse_property('P=? [ F "one" ]'), CheckSettings(solver="exact-elimination", exact=True))
print(f"instantiated at p=1/2 and solved exactly: {result.value_at_initial}")

region = parse_region("0.4<=p<=0.6")
lower, upper = region_lifting(model, region, "one")
print(f"sound bounds over p in [0.4, 0.6]: [{lower}, {upper}]")
