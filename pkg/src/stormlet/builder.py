"""Reachable-state exploration of PRISM programs into sparse models.

Exploration is breadth-first from the initial valuations; state indices
are assigned in discovery order (initial states first, in enumeration
order), so identical inputs give bit-identical models.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from . import domains
from . import expressions as ex
from .errors import BuildError, EvaluationError
from .models import CTMC, DTMC, MA, MDP, ChoiceStructure, Labeling, Model, RewardModel, validate
from .prism import Program, substitute_constants
from .ratfunc import RationalFunction
from .sparse import from_triplets


@dataclass
class BuildOptions:
    fix_deadlocks: bool = False
    number_domain: str = domains.FLOAT
    constants: dict = field(default_factory=dict)


class _VariableTable:
    """Declaration-order variable layout with evaluated bounds."""

    def __init__(self, program: Program):
        self.names: list[str] = []
        self.types: list[str] = []
        self.lows: list[object] = []
        self.highs: list[object] = []
        self.inits: list[object] = []
        for v in program.variables():
            self.names.append(v.name)
            self.types.append(v.type)
            if v.type == "bool":
                low = high = None
            else:
                low = _literal_int(v.low, f"lower bound of {v.name}")
                high = _literal_int(v.high, f"upper bound of {v.name}")
                if high < low:
                    raise BuildError(f"empty range [{low}..{high}] for variable {v.name}")
            self.lows.append(low)
            self.highs.append(high)
            self.inits.append(v.init)

    def env(self, valuation: tuple) -> dict:
        return dict(zip(self.names, valuation))

    def default_valuation(self) -> tuple:
        values = []
        for i, name in enumerate(self.names):
            init = self.inits[i]
            if init is None:
                values.append(False if self.types[i] == "bool" else self.lows[i])
            else:
                value = _literal_value(init, f"init of {name}")
                values.append(self._check_range(i, value))
        return tuple(values)

    def _check_range(self, i: int, value):
        if self.types[i] == "bool":
            if not isinstance(value, bool):
                raise BuildError(f"variable {self.names[i]} is bool, got {value!r}")
            return value
        if isinstance(value, bool) or not isinstance(value, int):
            raise BuildError(f"variable {self.names[i]} is int, got {value!r}")
        if not self.lows[i] <= value <= self.highs[i]:
            raise BuildError(
                f"value {value} of variable {self.names[i]} outside range "
                f"[{self.lows[i]}..{self.highs[i]}]"
            )
        return value

    def domain_of(self, i: int):
        if self.types[i] == "bool":
            return (False, True)
        return range(self.lows[i], self.highs[i] + 1)


def _literal_int(expr, what: str) -> int:
    value = _literal_value(expr, what)
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, Fraction) and value.denominator == 1:
            return int(value)
        raise BuildError(f"{what} must be an integer, got {value!r}")
    return value


def _literal_value(expr, what: str):
    if isinstance(expr, ex.Lit):
        return expr.value
    free = sorted(ex.identifiers(expr))
    raise BuildError(f"{what} is not constant (free: {', '.join(free)})")


def _prepare(program: Program, options: BuildOptions) -> Program:
    """Substitute constants; in parametric builds undefined doubles stay symbolic."""
    return substitute_constants(
        program,
        options.constants,
        allow_undefined_doubles=options.number_domain == domains.PARAMETRIC,
    )


def enumerate_initial_states(program: Program, table: _VariableTable | None = None) -> list[tuple]:
    """Deterministic ascending enumeration of initial valuations.

    Programs without an init block have exactly one initial valuation
    (per-variable inits, defaulting to the range minimum / false).  An
    init block is resolved by exhaustively scanning the finite variable
    ranges against the predicate.
    """
    table = table or _VariableTable(program)
    if program.init_predicate is None:
        return [table.default_valuation()]
    found = []
    for combo in product(*(table.domain_of(i) for i in range(len(table.names)))):
        env = table.env(combo)
        if ex.evaluate(program.init_predicate, env) is True:
            found.append(tuple(combo))
    if not found:
        raise BuildError("init predicate has no satisfying valuation")
    return found


def _type_check(program: Program, parameters: frozenset):
    types = program.var_types()
    for name in parameters:
        types[name] = "double"
    for module in program.modules:
        local_types = {v.name: ("bool" if v.type == "bool" else "int") for v in module.variables}
        for c in module.commands:
            if ex.expr_type(c.guard, types) != ex.BOOL:
                raise BuildError(f"guard in module {module.name} is not boolean")
            for u in c.updates:
                wt = ex.expr_type(u.weight, types)
                if wt == ex.BOOL:
                    raise BuildError(f"update weight in module {module.name} is boolean")
                for a in u.assignments:
                    at = ex.expr_type(a.expr, types)
                    expected = local_types[a.var]
                    if expected == "bool" and at != ex.BOOL:
                        raise BuildError(f"assignment to bool variable {a.var} is not boolean")
                    if expected == "int" and at != ex.INT:
                        raise BuildError(f"assignment to int variable {a.var} must be int-typed")
    for name, expr in program.labels:
        if ex.expr_type(expr, types) != ex.BOOL:
            raise BuildError(f"label {name!r} is not boolean")
    for struct in program.reward_structs:
        for item in struct.items:
            if ex.expr_type(item.guard, types) != ex.BOOL:
                raise BuildError("reward guard is not boolean")
            if ex.expr_type(item.value, types) == ex.BOOL:
                raise BuildError("reward value is boolean")
    if program.init_predicate is not None and ex.expr_type(program.init_predicate, types) != ex.BOOL:
        raise BuildError("init predicate is not boolean")


@dataclass
class Choice:
    """One resolved choice: an action, its branches, and its timing kind."""

    action: str | None
    branches: list  # (weight, successor valuation)
    markovian: bool = False


def expand_state(program: Program, valuation: tuple, table: _VariableTable | None = None, parameters: frozenset = frozenset()) -> list[Choice]:
    """All choices available in a state, after synchronization.

    Silent commands yield one choice each; every shared action enabled in
    all owning modules yields the product distribution with multiplied
    weights (also for CTMC rates, following the PRISM convention).  In
    ``ma`` programs silent commands are Markovian.
    """
    table = table or _VariableTable(program)
    env = table.env(valuation)
    var_index = {name: i for i, name in enumerate(table.names)}

    def eval_weight(expr):
        value = ex.evaluate(expr, env, parameters)
        if isinstance(value, bool):
            raise BuildError("update weight is boolean")
        if isinstance(value, int):
            value = Fraction(value)
        return value

    def apply_update(branch):
        values = list(valuation)
        for a in branch.assignments:
            value = ex.evaluate(a.expr, env, parameters)
            if isinstance(value, RationalFunction):
                raise BuildError(f"assignment to {a.var} depends on a parameter")
            i = var_index[a.var]
            try:
                values[i] = table._check_range(i, value)
            except BuildError as exc:
                raise BuildError(f"{exc} (in state {valuation})") from exc
        return tuple(values)

    per_module_enabled = []
    for module in program.modules:
        enabled = []
        for c in module.commands:
            if ex.evaluate(c.guard, env, parameters) is True:
                enabled.append(c)
        per_module_enabled.append(enabled)

    is_ma = program.model_kind == MA
    choices: list[Choice] = []
    for module, enabled in zip(program.modules, per_module_enabled):
        for c in enabled:
            if c.action is None:
                try:
                    branches = [(eval_weight(u.weight), apply_update(u)) for u in c.updates]
                except BuildError as exc:
                    raise BuildError(
                        f"{exc} (silent command of module {module.name}, state {valuation})"
                    ) from exc
                choices.append(Choice(None, branches, markovian=is_ma))

    # full synchronization over shared action names
    alphabet: dict[str, list[int]] = {}
    for m, module in enumerate(program.modules):
        for action in sorted({c.action for c in module.commands if c.action is not None}):
            alphabet.setdefault(action, []).append(m)
    for action in sorted(alphabet):
        owners = alphabet[action]
        enabled_lists = [
            [c for c in per_module_enabled[m] if c.action == action] for m in owners
        ]
        if any(not lst for lst in enabled_lists):
            continue
        for combo in product(*enabled_lists):
            branches = []
            for updates in product(*(c.updates for c in combo)):
                weight = Fraction(1)
                values = list(valuation)
                for u in updates:
                    w = eval_weight(u.weight)
                    weight = weight * w if not isinstance(w, RationalFunction) else w * weight
                    for a in u.assignments:
                        value = ex.evaluate(a.expr, env, parameters)
                        if isinstance(value, RationalFunction):
                            raise BuildError(f"assignment to {a.var} depends on a parameter")
                        i = var_index[a.var]
                        try:
                            values[i] = table._check_range(i, value)
                        except BuildError as exc:
                            raise BuildError(
                                f"{exc} (command [{action}], state {valuation})"
                            ) from exc
                branches.append((weight, tuple(values)))
            choices.append(Choice(action, branches, markovian=False))
    return choices


def _merge_branches(branches):
    merged: dict[tuple, object] = {}
    for weight, succ in branches:
        if succ in merged:
            merged[succ] = merged[succ] + weight
        else:
            merged[succ] = weight
    return merged


def build_model(program: Program, options: BuildOptions | None = None) -> Model:
    """Explore the reachable state space and emit a validated model."""
    options = options or BuildOptions()
    if options.number_domain not in domains.DOMAINS:
        raise BuildError(f"unknown number domain {options.number_domain!r}")
    program = _prepare(program, options)
    parameters = frozenset(program.parameters)
    if parameters and options.number_domain != domains.PARAMETRIC:
        raise EvaluationError(
            "undefined constant(s) " + ", ".join(sorted(parameters)) + " (supply bindings or build parametric)"
        )
    if options.number_domain == domains.PARAMETRIC and program.model_kind != DTMC:
        raise BuildError("parametric builds are supported for dtmc programs only")
    _type_check(program, parameters)
    table = _VariableTable(program)
    kind = program.model_kind

    initial = enumerate_initial_states(program, table)
    index: dict[tuple, int] = {}
    order: list[tuple] = []
    for valuation in initial:
        if valuation not in index:
            index[valuation] = len(order)
            order.append(valuation)
    frontier = list(order)

    state_choices: list[list[Choice]] = []
    deadlocks: set[int] = set()
    overlap_warned = False

    cursor = 0
    while cursor < len(frontier):
        valuation = frontier[cursor]
        cursor += 1
        choices = expand_state(program, valuation, table, parameters)

        if kind == DTMC:
            if len(choices) > 1:
                if not overlap_warned:
                    warnings.warn(
                        f"dtmc has {len(choices)} simultaneously enabled commands in state "
                        f"{valuation}; resolving by uniform choice",
                        stacklevel=2,
                    )
                    overlap_warned = True
                share = Fraction(1, len(choices))
                mixed: list = []
                for ch in choices:
                    total = Fraction(0)
                    for weight, _ in ch.branches:
                        total = weight + total
                    if not total == 1:
                        raise BuildError(f"row sum {total} != 1 in state {valuation}")
                    for weight, succ in ch.branches:
                        mixed.append((weight * share, succ))
                choices = [Choice(None, mixed)]
        elif kind == CTMC:
            if len(choices) > 1:
                raced = [b for ch in choices for b in ch.branches]
                choices = [Choice(None, raced)]
        elif kind == MA:
            markovian = [c for c in choices if c.markovian]
            probabilistic = [c for c in choices if not c.markovian]
            if probabilistic:
                choices = probabilistic  # maximal progress: rates are preempted
            elif len(markovian) > 1:
                raced = [b for ch in markovian for b in ch.branches]
                choices = [Choice(None, raced, markovian=True)]
            else:
                choices = markovian

        resolved: list[Choice] = []
        for ch in choices:
            merged = _merge_branches(ch.branches)
            rate_row = kind == CTMC or ch.markovian
            total = Fraction(0)
            for w in merged.values():
                total = w + total
            for succ, weight in merged.items():
                if isinstance(weight, RationalFunction):
                    continue  # range checked at instantiation
                if rate_row:
                    if weight < 0:
                        raise BuildError(f"negative rate {weight} in state {valuation}")
                elif not 0 <= weight <= 1:
                    raise BuildError(
                        f"probability {weight} outside [0,1] in state {valuation}"
                    )
            if not rate_row:
                if not total == 1:
                    raise BuildError(
                        f"{'choice' if kind in (MDP, MA) else 'row'} sum {total} != 1 in state {valuation}"
                    )
            kept = []
            for succ, weight in merged.items():
                if domains.is_zero(weight):
                    continue
                if succ not in index:
                    index[succ] = len(frontier)
                    frontier.append(succ)
                kept.append((weight, succ))
            resolved.append(Choice(ch.action, kept, ch.markovian))
        if not resolved:
            state = index[valuation]
            if not options.fix_deadlocks:
                raise BuildError(
                    f"deadlock in state {valuation} (no enabled command; "
                    "use fix_deadlocks to add a self-loop)"
                )
            deadlocks.add(state)
            resolved = [Choice(None, [(Fraction(1), valuation)], markovian=False)]
        state_choices.append(resolved)

    n = len(frontier)
    domain = options.number_domain
    offsets = [0]
    actions: list = []
    triplets = []
    markovian_states = set()
    row = 0
    for s in range(n):
        for ch in state_choices[s]:
            for weight, succ in ch.branches:
                triplets.append((row, index[succ], domains.convert(weight, domain)))
            actions.append(ch.action)
            if ch.markovian:
                markovian_states.add(s)
            row += 1
        offsets.append(row)
    matrix = from_triplets(row, triplets, columns=n, domain=domain)
    choices = ChoiceStructure(offsets, actions if kind in (MDP, MA) else None)

    labeling = Labeling(n)
    for name, expr in program.labels:
        members = set()
        for s in range(n):
            if ex.evaluate(expr, table.env(frontier[s])) is True:
                members.add(s)
        labeling.add(name, members)
    labeling.add("init", {index[v] for v in initial})
    labeling.add("deadlock", deadlocks)

    rewards: dict[str, RewardModel] = {}
    for struct in program.reward_structs:
        state_items = [i for i in struct.items if not i.is_action]
        action_items = [i for i in struct.items if i.is_action]
        state_rewards = None
        if state_items:
            state_rewards = []
            for s in range(n):
                env = table.env(frontier[s])
                total = Fraction(0)
                for item in state_items:
                    if ex.evaluate(item.guard, env) is True:
                        value = ex.evaluate(item.value, env)
                        if value < 0:
                            raise BuildError(f"negative reward {value} in state {frontier[s]}")
                        total += Fraction(value)
                state_rewards.append(domains.convert(total, domain))
        action_rewards = None
        if action_items:
            action_rewards = []
            for s in range(n):
                env = table.env(frontier[s])
                for ch in state_choices[s]:
                    total = Fraction(0)
                    for item in action_items:
                        if item.action == ch.action and ex.evaluate(item.guard, env) is True:
                            value = ex.evaluate(item.value, env)
                            if value < 0:
                                raise BuildError(f"negative reward {value} in state {frontier[s]}")
                            total += Fraction(value)
                    action_rewards.append(domains.convert(total, domain))
        rewards[struct.name or ""] = RewardModel(state_rewards, action_rewards)

    exit_rates = None
    if kind == CTMC:
        exit_rates = [matrix.row_sum(s) for s in range(n)]
    elif kind == MA:
        exit_rates = [
            matrix.row_sum(int(choices.state_offsets[s])) if s in markovian_states else domains.zero(domain)
            for s in range(n)
        ]

    model = Model(
        kind=kind,
        transitions=matrix,
        choices=choices,
        labeling=labeling,
        initial_states=tuple(sorted(index[v] for v in initial)),
        rewards=rewards,
        exit_rates=exit_rates,
        markovian_states=frozenset(markovian_states) if kind == MA else None,
        state_valuations=frontier,
        variable_names=tuple(table.names),
    )
    violation = validate(model)
    if violation is not None:
        raise BuildError(f"built model violates invariant: {violation}")
    return model
