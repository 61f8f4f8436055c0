"""Parametric DTMC analysis: solution functions, instantiation, regions.

The solution function is computed by state elimination over the
rational-function domain after a parameter-agnostic graph
precomputation (an edge is present iff its function is not identically
zero).  Region lifting relaxes each state's parameter choices into
nondeterminism: the corner instantiations of its outgoing distribution
become MDP choices, whose min/max solutions soundly bound the
reachability probability over the whole region.  Corner soundness needs
every transition function to be multi-affine.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from . import domains
from .checker import CheckSettings, unbounded_reachability
from .errors import ModelError, ParseError
from .graph import prob01_deterministic
from .models import DTMC, MDP, ChoiceStructure, Model, RewardModel, validate
from .ratfunc import RationalFunction
from .solvers import LinearSystem, state_elimination_solve
from .sparse import from_triplets


@dataclass(frozen=True)
class Region:
    """Closed rational box over the model parameters."""

    intervals: tuple  # ((name, lo, hi), ...) sorted by name

    @staticmethod
    def of(mapping: dict) -> "Region":
        items = []
        for name in sorted(mapping):
            lo, hi = mapping[name]
            lo, hi = Fraction(lo), Fraction(hi)
            if lo > hi:
                raise ModelError(f"empty interval for parameter {name}: [{lo}, {hi}]")
            items.append((name, lo, hi))
        return Region(tuple(items))

    def names(self):
        return [name for name, _, _ in self.intervals]

    def bounds(self, name: str):
        for n, lo, hi in self.intervals:
            if n == name:
                return lo, hi
        raise ModelError(f"region does not cover parameter {name}")

    def center(self) -> dict:
        return {name: (lo + hi) / 2 for name, lo, hi in self.intervals}

    def contains(self, point: dict) -> bool:
        return all(lo <= Fraction(point[name]) <= hi for name, lo, hi in self.intervals)


def parse_region(text: str) -> Region:
    """Parse ``0.3<=p<=0.6,0.1<=q<=0.7`` into a region."""
    mapping = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        pieces = part.split("<=")
        if len(pieces) != 3:
            raise ParseError(f"malformed region constraint {part!r} (want lo<=name<=hi)")
        lo, name, hi = (p.strip() for p in pieces)
        try:
            mapping[name] = (Fraction(lo), Fraction(hi))
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"malformed region bound in {part!r}") from exc
    if not mapping:
        raise ParseError("empty region")
    return Region.of(mapping)


def parse_point(text: str) -> dict:
    """Parse ``p=1/2,q=0.3`` into a parameter valuation."""
    point = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        name, sep, raw = part.partition("=")
        if not sep:
            raise ParseError(f"malformed point assignment {part!r}")
        try:
            point[name.strip()] = Fraction(raw.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"malformed parameter value in {part!r}") from exc
    if not point:
        raise ParseError("empty point")
    return point


def model_parameters(model: Model) -> tuple[str, ...]:
    names: set[str] = set()
    for r in range(model.transitions.row_count):
        for _, val in model.transitions.row(r):
            if isinstance(val, RationalFunction):
                names.update(val.variables)
    return tuple(sorted(names))


def _require_parametric_dtmc(model: Model):
    if model.kind != DTMC or model.domain != domains.PARAMETRIC:
        raise ModelError("parametric analysis expects a parametric DTMC")


def _target_states(model: Model, target) -> frozenset:
    if isinstance(target, str):
        return model.labeling.states_with(target)
    return frozenset(target)


def solution_function(model: Model, target) -> RationalFunction:
    """P(F target) at the first initial state as a rational function."""
    _require_parametric_dtmc(model)
    phi2 = _target_states(model, target)
    matrix = model.transitions
    n = model.state_count
    p0, p1 = prob01_deterministic(matrix, frozenset(range(n)), phi2)
    init = model.initial_states[0]
    if init in p1:
        return RationalFunction.constant(1)
    if init in p0:
        return RationalFunction.constant(0)
    maybe = [s for s in range(n) if s not in p0 and s not in p1]
    index = {s: i for i, s in enumerate(maybe)}
    one = RationalFunction.constant(1)
    triplets = []
    b = []
    for s in maybe:
        acc = RationalFunction.constant(0)
        for col, val in matrix.row(s):
            if col in index:
                if col == s and val == one:
                    raise ModelError(
                        f"self-loop function identically 1 at state {s} outside P1 (ill-formed input)"
                    )
                triplets.append((index[s], index[col], val))
            elif col in p1:
                acc = acc + val
        b.append(acc)
    sub = from_triplets(len(maybe), triplets, domain=domains.PARAMETRIC)
    outcome = state_elimination_solve(LinearSystem(sub, b))
    return outcome.values[index[init]]


def instantiate(model: Model, point: dict) -> Model:
    """Concrete exact-rational DTMC at a parameter point.

    The point must be well-defined: every transition function evaluates
    into [0, 1], rows still sum to one, and no denominator vanishes.
    Transitions evaluating to zero are dropped.
    """
    _require_parametric_dtmc(model)
    point = {name: Fraction(value) for name, value in point.items()}
    matrix = model.transitions
    n = model.state_count
    triplets = []
    for s in range(n):
        total = Fraction(0)
        for col, val in matrix.row(s):
            value = _evaluate(val, point, s, col)
            if not 0 <= value <= 1:
                raise ModelError(
                    f"transition {s} -> {col} evaluates to {value} outside [0, 1] at {_point_str(point)}"
                )
            total += value
            if value != 0:
                triplets.append((s, col, value))
        if total != 1:
            raise ModelError(f"row of state {s} sums to {total} != 1 at {_point_str(point)}")
    new_matrix = from_triplets(n, triplets, columns=n, domain=domains.EXACT)
    rewards = {}
    for name, rm in model.rewards.items():
        state_rewards = None
        if rm.state_rewards is not None:
            state_rewards = [_evaluate(v, point, None, None) for v in rm.state_rewards]
        action_rewards = None
        if rm.action_rewards is not None:
            action_rewards = [_evaluate(v, point, None, None) for v in rm.action_rewards]
        rewards[name] = RewardModel(state_rewards, action_rewards)
    instantiated = Model(
        kind=DTMC,
        transitions=new_matrix,
        choices=ChoiceStructure.identity(n),
        labeling=model.labeling,
        initial_states=model.initial_states,
        rewards=rewards,
        state_valuations=model.state_valuations,
        variable_names=model.variable_names,
    )
    violation = validate(instantiated)
    if violation is not None:
        raise ModelError(f"instantiated model invalid: {violation}")
    return instantiated


def _evaluate(value, point, s, col):
    if isinstance(value, RationalFunction):
        try:
            return value.evaluate(point)
        except Exception as exc:
            where = f"transition {s} -> {col}" if s is not None else "reward value"
            raise ModelError(f"{where} is undefined at {_point_str(point)}: {exc}") from exc
    return Fraction(value)


def _point_str(point):
    return ", ".join(f"{k}={v}" for k, v in sorted(point.items()))


def relaxation_mdp(model: Model, region: Region) -> Model:
    """Corner relaxation: parameter choices per state become MDP choices."""
    _require_parametric_dtmc(model)
    params = model_parameters(model)
    missing = [p for p in params if p not in region.names()]
    if missing:
        raise ModelError(f"region does not cover parameter(s) {', '.join(missing)}")
    matrix = model.transitions
    n = model.state_count
    offsets = [0]
    triplets = []
    row = 0
    for s in range(n):
        row_entries = list(matrix.row(s))
        local_params = sorted(
            {v for _, val in row_entries if isinstance(val, RationalFunction) for v in val.variables}
        )
        for _, val in row_entries:
            if isinstance(val, RationalFunction) and not val.is_multiaffine():
                raise ModelError(
                    f"transition function {val} of state {s} is not multi-affine; "
                    "region lifting is unsound for it"
                )
        corner_values = [region.bounds(p) for p in local_params]
        for corner in product(*corner_values) if local_params else [()]:
            point = dict(zip(local_params, corner))
            total = Fraction(0)
            for col, val in row_entries:
                value = val.evaluate(point) if isinstance(val, RationalFunction) else Fraction(val)
                if not 0 <= value <= 1:
                    raise ModelError(
                        f"ill-defined corner {_point_str(point)}: transition {s} -> {col} = {value}"
                    )
                total += value
                if value != 0:
                    triplets.append((row, col, value))
            if total != 1:
                raise ModelError(f"ill-defined corner {_point_str(point)}: row sum {total}")
            row += 1
        offsets.append(row)
    new_matrix = from_triplets(row, triplets, columns=n, domain=domains.EXACT)
    return Model(
        kind=MDP,
        transitions=new_matrix,
        choices=ChoiceStructure(offsets, [None] * row),
        labeling=model.labeling,
        initial_states=model.initial_states,
        state_valuations=model.state_valuations,
        variable_names=model.variable_names,
    )


def region_lifting(model: Model, region: Region, target, direction: str | None = None):
    """Sound [lower, upper] bounds of P(F target) over a whole region.

    ``direction`` restricts the computation to one side ("min" for the
    lower bound, "max" for the upper); None computes both.  Bounds are
    exact rationals evaluated at the first initial state.
    """
    mdp = relaxation_mdp(model, region)
    phi2 = _target_states(model, target)
    phi1 = frozenset(range(mdp.state_count))
    settings = CheckSettings(solver="policy-iteration", exact=True)
    init = mdp.initial_states[0]
    lower = upper = None
    if direction in (None, "min"):
        values, _ = unbounded_reachability(mdp, phi1, phi2, "min", settings)
        lower = values[init]
    if direction in (None, "max"):
        values, _ = unbounded_reachability(mdp, phi1, phi2, "max", settings)
        upper = values[init]
    if direction == "min":
        return lower, None
    if direction == "max":
        return None, upper
    return lower, upper
