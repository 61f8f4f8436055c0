"""Continuous time: transient probabilities via uniformization.

A pipeline of rate-1 exponential steps: the probability of having taken
the first step within one time unit is 1 - e^-1, of having taken both
steps 1 - 2e^-1 (the Erlang-2 law).  Unbounded questions reduce to the
embedded jump chain.
"""

import math

from stormlet import BuildOptions, CheckSettings, build_model, check, domains, parse_program, parse_property
from stormlet.benchmarks import bundled_path

line = build_model(parse_program(bundled_path("exp_line.pm").read_text()), BuildOptions())
for label, closed_form in (("one_step", 1 - math.exp(-1)), ("two_steps", 1 - 2 * math.exp(-1))):
    result = check(line, parse_property(f'P=? [ F<=1 "{label}" ]'), CheckSettings())
    print(f"P(F<=1 {label:>9}) = {result.value_at_initial:.8f}   (closed form {closed_form:.8f})")

# an M/M/1/5 queue: racing arrival and service rates
queue = build_model(
    parse_program(bundled_path("queue.pm").read_text()),
    BuildOptions(number_domain=domains.EXACT),
)
exact = CheckSettings(solver="exact-elimination", exact=True)
hit_full = check(queue, parse_property('P=? [ !"empty" U "full" ]'), exact)
print(f"P(fill up before emptying) = {hit_full.value_at_initial}")
jumps = check(queue, parse_property('R{"busy_jumps"}=? [ F "empty" ]'), exact)
print(f"E[busy jumps until empty]  = {jumps.value_at_initial}")
