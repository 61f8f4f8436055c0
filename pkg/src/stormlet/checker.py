"""Verification orchestration: precomputation, system assembly, dispatch.

The flow for unbounded properties: make states outside the until
constraint absorbing, run the qualitative prob-0/1 precomputation, fix
those states at 0/1, assemble the residual fixpoint system over the
maybe-states, and hand it to the selected solver.  CTMCs are analyzed on
their embedded chain (or by uniformization for time bounds), MAs on
their induced untimed MDP.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import domains
from . import properties as props
from .errors import CheckError, UnsupportedFeatureError
from .graph import (
    mec_decomposition,
    prob01_deterministic,
    prob01_nondeterministic,
    prob1_witness_rows,
)
from .models import CTMC, DTMC, MA, MDP, ChoiceStructure, Model, embedded_dtmc, induced_untimed_mdp, uniformize
from .solvers import (
    DEFAULT_MAX_ITER,
    BellmanSystem,
    LinearSystem,
    gaussian_elimination_exact,
    interval_iteration,
    ovi,
    policy_iteration_exact,
    reward_upper_bound,
    state_elimination_solve,
    vi,
)
from .sparse import SparseMatrix, from_triplets

SOLVERS = ("vi", "ii", "ovi", "exact-elimination", "elimination", "policy-iteration")
EXACT_SOLVERS = ("exact-elimination", "elimination", "policy-iteration")


@dataclass
class CheckSettings:
    solver: str = "vi"
    precision: Fraction = Fraction(1, 10**6)
    relative: bool = True
    sound: bool = False
    exact: bool = False
    max_iterations: int = DEFAULT_MAX_ITER
    gauss_seidel: bool = False

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise CheckError(f"unknown equation solver {self.solver!r}; pick one of {', '.join(SOLVERS)}")
        if self.sound and self.solver == "vi":
            self.solver = "ii"
        if self.exact and self.solver not in EXACT_SOLVERS:
            raise CheckError(
                f"exact mode requires one of the exact solvers ({', '.join(EXACT_SOLVERS)}), "
                f"got {self.solver!r}"
            )
        self.precision = Fraction(self.precision)


@dataclass
class CheckResult:
    """Per-state values (or booleans, for threshold properties)."""

    values: object
    domain: str
    initial_states: tuple
    scheduler: list | None = None
    checked_property: object | None = None

    def at(self, state: int):
        return self.values[state]

    @property
    def value_at_initial(self):
        return self.values[self.initial_states[0]]


def _indicator(states, n, domain):
    one = domains.one(domain)
    zero = domains.zero(domain)
    if domain == domains.FLOAT:
        vec = np.zeros(n)
        for s in states:
            vec[s] = 1.0
        return vec
    return [one if s in states else zero for s in range(n)]


def _make_absorbing(matrix: SparseMatrix, choices: ChoiceStructure, states: frozenset):
    """Replace every row of the given states by a single self-loop row.

    Returns (matrix, choices, row_map) where row_map sends new row
    indices to the original ones (None for inserted self-loops), so
    per-row data such as action rewards can still be looked up.
    """
    if not states:
        return matrix, choices, list(range(matrix.row_count))
    one = domains.one(matrix.domain)
    triplets = []
    offsets = [0]
    actions = []
    row_map: list[int | None] = []
    row = 0
    for s in range(choices.state_count):
        if s in states:
            triplets.append((row, s, one))
            actions.append(None)
            row_map.append(None)
            row += 1
        else:
            for r in choices.rows_of(s):
                for col, val in matrix.row(r):
                    triplets.append((row, col, val))
                actions.append(choices.action_of(r))
                row_map.append(r)
                row += 1
        offsets.append(row)
    new_matrix = from_triplets(row, triplets, columns=matrix.column_count, domain=matrix.domain)
    labels = actions if choices.action_labels is not None else None
    return new_matrix, ChoiceStructure(offsets, labels), row_map


def _work_model(model: Model) -> Model:
    if model.kind == CTMC:
        return embedded_dtmc(model)
    if model.kind == MA:
        return induced_untimed_mdp(model)
    return model


def _resolve_direction(model: Model, prop) -> str | None:
    direction = prop.direction
    nondet = model.kind in (MDP, MA)
    if not nondet:
        if direction is not None:
            warnings.warn(
                f"direction {direction} ignored on deterministic {model.kind} model", stacklevel=3
            )
        return None
    if direction is None:
        if prop.bound is None:
            raise CheckError(
                "nondeterministic model requires an optimization direction (Pmin/Pmax, Rmin/Rmax)"
            )
        comparator, _ = prop.bound
        # universally quantified threshold: <,<= constrain the worst (max) case;
        # a complemented query (from G-duality) inverts the inner direction
        direction = "max" if comparator in ("<", "<=") else "min"
        if prop.complement:
            direction = "min" if direction == "max" else "max"
    return direction


def check(model: Model, prop, settings: CheckSettings | None = None) -> CheckResult:
    """Check a property against a model, returning per-state results."""
    settings = settings or CheckSettings()
    if settings.exact and model.domain != domains.EXACT:
        raise CheckError("exact checking requires a model built in the exact domain")
    normalized = props.desugar(prop)
    direction = _resolve_direction(model, normalized)

    if normalized.operator == "R":
        values, scheduler = _check_reward(model, normalized, direction, settings)
    else:
        values, scheduler = _check_probability(model, normalized, direction, settings)

    if normalized.complement:
        values = _complement(values, model.domain)

    if normalized.bound is not None:
        comparator, threshold = normalized.bound
        thr = float(threshold) if model.domain == domains.FLOAT else threshold
        compare = {
            "<": lambda v: v < thr,
            "<=": lambda v: v <= thr,
            ">": lambda v: v > thr,
            ">=": lambda v: v >= thr,
        }[comparator]
        values = [bool(compare(v)) for v in values]

    return CheckResult(
        values=values,
        domain=model.domain,
        initial_states=model.initial_states,
        scheduler=scheduler,
        checked_property=prop,
    )


def _complement(values, domain):
    one = domains.one(domain)
    if domain == domains.FLOAT:
        return one - np.asarray(values)
    return [one - v for v in values]


def _check_probability(model: Model, prop, direction, settings):
    path = prop.path
    if isinstance(path, props.Next):
        target = props.evaluate_state_formula(path.target, model)
        return _next_step(model, target, direction), None
    if not isinstance(path, props.Until):
        raise CheckError(f"unsupported path formula {path!r}")
    phi1 = props.evaluate_state_formula(path.left, model)
    phi2 = props.evaluate_state_formula(path.right, model)
    if path.bound is not None:
        if path.bound < 0:
            raise CheckError("path bound must be nonnegative")
        if model.kind == CTMC:
            return ctmc_timebounded(model, phi2, path.bound, settings.precision, phi1=phi1), None
        if model.kind == MA:
            raise UnsupportedFeatureError("time/step-bounded analysis on Markov automata")
        if path.bound.denominator != 1:
            raise CheckError(f"step bound must be an integer, got {path.bound}")
        work = _work_model(model)
        return bounded_reachability(work, phi1, phi2, int(path.bound), direction), None
    work = _work_model(model)
    return unbounded_reachability(work, phi1, phi2, direction, settings)


def _check_reward(model: Model, prop, direction, settings):
    path = prop.path
    if not isinstance(path, props.Until):
        raise UnsupportedFeatureError(f"reward operator with {type(path).__name__} path formula")
    if path.bound is not None:
        raise UnsupportedFeatureError("step/time-bounded reward operator")
    from . import expressions as ex

    left = path.left
    if not (isinstance(left, ex.Lit) and left.value is True):
        raise UnsupportedFeatureError("reward operator with a constrained until (only F goal supported)")
    goal = props.evaluate_state_formula(path.right, model)
    reward_model = model.reward_model(prop.reward_name)
    work = _work_model(model)
    return expected_reward(work, reward_model, goal, direction, settings)


def _next_step(model: Model, target: frozenset, direction):
    work = _work_model(model)
    matrix = work.transitions
    x = _indicator(target, work.state_count, work.domain)
    rows = matrix.matvec(x)
    if work.kind == DTMC:
        return rows
    better = min if direction == "min" else max
    out = []
    for s in range(work.state_count):
        out.append(better(rows[r] for r in work.choices.rows_of(s)))
    if work.domain == domains.FLOAT:
        return np.array(out)
    return out


def bounded_reachability(model: Model, phi1: frozenset, phi2: frozenset, k: int, direction=None):
    """k synchronized steps of the until-restricted operator."""
    if k < 0:
        raise CheckError("step bound must be nonnegative")
    matrix = model.transitions
    choices = model.choices
    n = model.state_count
    domain = model.domain
    dead = frozenset(range(n)) - phi1 - phi2
    x = _indicator(phi2, n, domain)
    one = domains.one(domain)
    zero = domains.zero(domain)
    for _ in range(k):
        rows = matrix.matvec(x)
        new = []
        for s in range(n):
            if s in phi2:
                new.append(one)
            elif s in dead:
                new.append(zero)
            elif model.kind == DTMC:
                new.append(rows[s])
            else:
                better = min if direction == "min" else max
                new.append(better(rows[r] for r in choices.rows_of(s)))
        x = np.array(new) if domain == domains.FLOAT else new
    return x


def _assemble_system(matrix, choices, maybe: list, p1: frozenset, domain):
    """Rows of maybe-states restricted to maybe columns; b collects P1 mass."""
    index = {s: i for i, s in enumerate(maybe)}
    offsets = [0]
    actions = []
    triplets = []
    b = []
    row_map = []
    new_row = 0
    for s in maybe:
        for r in choices.rows_of(s):
            acc = domains.zero(domain)
            for col, val in matrix.row(r):
                if col in index:
                    triplets.append((new_row, index[col], val))
                elif col in p1:
                    acc = acc + val
            b.append(acc)
            actions.append(choices.action_of(r))
            row_map.append(r)
            new_row += 1
        offsets.append(new_row)
    sub = from_triplets(new_row, triplets, columns=len(maybe), domain=domain)
    vec = np.array([float(v) for v in b]) if domain == domains.FLOAT else b
    labels = actions if choices.action_labels is not None else None
    return sub, ChoiceStructure(offsets, labels), vec, row_map


def _solve_linear(system: LinearSystem, settings: CheckSettings, reward_system=False):
    solver = settings.solver
    if solver == "vi":
        return vi(system, settings.precision, settings.relative, settings.max_iterations, settings.gauss_seidel)
    if solver == "ii":
        upper0 = None
        if reward_system:
            bell = BellmanSystem(system.matrix, ChoiceStructure.identity(system.size), system.b, "min", True)
            upper0 = reward_upper_bound(bell)
        return interval_iteration(system, settings.precision, settings.relative, settings.max_iterations, upper0)
    if solver == "ovi":
        return ovi(system, settings.precision, settings.relative, settings.max_iterations, cap_at_one=not reward_system)
    if solver == "exact-elimination":
        return gaussian_elimination_exact(system)
    if solver == "elimination":
        return state_elimination_solve(system)
    if solver == "policy-iteration":
        bell = BellmanSystem(system.matrix, ChoiceStructure.identity(system.size), system.b, "min", reward_system)
        return policy_iteration_exact(bell, settings.max_iterations)
    raise CheckError(f"unknown solver {solver!r}")


def _system_mecs(bell: BellmanSystem, internal_rows=None):
    """MECs of a maybe-system; rows with probability deficit or b > 0 leave.

    An extra virtual exit column makes leaving rows structurally visible
    to the MEC decomposition.  ``internal_rows`` optionally restricts
    which rows may be retained (zero-reward quotient).
    """
    matrix = bell.matrix
    n = bell.size
    triplets = []
    tol = 1e-12 if matrix.domain == domains.FLOAT else 0
    for r in range(matrix.row_count):
        for col, val in matrix.row(r):
            triplets.append((r, col, val))
        leaves = False
        total = matrix.row_sum(r)
        deficit = domains.one(matrix.domain) - total
        if (deficit > tol) if matrix.domain == domains.FLOAT else (deficit != 0):
            leaves = True
        if bell.b[r] > (tol if matrix.domain == domains.FLOAT else 0):
            leaves = True
        if internal_rows is not None and r not in internal_rows:
            leaves = True
        if leaves:
            triplets.append((r, n, domains.one(matrix.domain)))
    augmented = from_triplets(matrix.row_count, triplets, columns=n + 1, domain=matrix.domain)
    # the virtual exit state gets no rows, so MECs never contain it
    offsets = list(bell.choices.state_offsets) + [matrix.row_count]
    mecs = mec_decomposition(augmented, ChoiceStructure(offsets))
    return [(states, rows) for states, rows in mecs if n not in states]


def _quotient_mecs(bell: BellmanSystem, mecs):
    """Collapse each MEC to one state, dropping its internal rows."""
    n = bell.size
    block_of = list(range(n))
    blocks: list[list[int]] = [[s] for s in range(n)]
    internal: set[int] = set()
    for states, rows in mecs:
        rep = min(states)
        for s in states:
            block_of[s] = rep
        internal |= set(rows)
    # compress block ids
    reps = sorted({block_of[s] for s in range(n)})
    rep_index = {rep: i for i, rep in enumerate(reps)}
    block_of = [rep_index[block_of[s]] for s in range(n)]
    members: list[list[int]] = [[] for _ in reps]
    for s in range(n):
        members[block_of[s]].append(s)

    offsets = [0]
    triplets = []
    b = []
    new_row = 0
    for block, sts in enumerate(members):
        for s in sts:
            for r in bell.choices.rows_of(s):
                if r in internal:
                    continue
                for col, val in bell.matrix.row(r):
                    triplets.append((new_row, block_of[col], val))
                b.append(bell.b[r])
                new_row += 1
        if offsets[-1] == new_row:
            raise CheckError("end component without exit survived precomputation")
        offsets.append(new_row)
    matrix = from_triplets(new_row, triplets, columns=len(members), domain=bell.matrix.domain)
    vec = np.array([float(v) for v in b]) if bell.matrix.domain == domains.FLOAT else b
    quotient = BellmanSystem(matrix, ChoiceStructure(offsets), vec, bell.direction, bell.reward_system)
    return quotient, block_of


def _solve_bellman(bell: BellmanSystem, settings: CheckSettings, reward_system=False):
    """Dispatch a Bellman system, quotienting end components where required.

    Sound upper iterations in the max direction only converge after MECs
    are collapsed; min-direction rewards additionally need the
    zero-reward end components collapsed (free dawdling otherwise traps
    iteration from below at a wrong least fixpoint).
    """
    solver = settings.solver
    if solver in EXACT_SOLVERS:
        if bell.matrix.domain != domains.EXACT:
            raise CheckError("exact solvers on nondeterministic models require the exact domain")
        return policy_iteration_exact(bell, settings.max_iterations), None
    needs_quotient = (solver in ("ii", "ovi") and bell.direction == "max") or (
        reward_system and bell.direction == "min"
    )
    block_of = None
    target = bell
    if needs_quotient:
        internal = None
        if reward_system and bell.direction == "min":
            internal = {r for r in range(bell.matrix.row_count) if domains.is_zero(bell.b[r])}
        mecs = _system_mecs(bell, internal)
        if mecs:
            target, block_of = _quotient_mecs(bell, mecs)
    if solver == "vi":
        outcome = vi(target, settings.precision, settings.relative, settings.max_iterations, settings.gauss_seidel)
    elif solver == "ii":
        upper0 = reward_upper_bound(target) if reward_system else None
        outcome = interval_iteration(target, settings.precision, settings.relative, settings.max_iterations, upper0)
    elif solver == "ovi":
        outcome = ovi(target, settings.precision, settings.relative, settings.max_iterations, cap_at_one=not reward_system)
    else:
        raise CheckError(f"unknown solver {solver!r}")
    return outcome, block_of


def unbounded_reachability(model: Model, phi1: frozenset, phi2: frozenset, direction, settings: CheckSettings):
    """P(phi1 U phi2) per state; sound/exact per the selected solver."""
    n = model.state_count
    domain = model.domain
    dead = frozenset(range(n)) - phi1 - phi2
    matrix, choices, _ = _make_absorbing(model.transitions, model.choices, dead | phi2)
    everything = frozenset(range(n))
    if model.kind == DTMC:
        p0, p1 = prob01_deterministic(matrix, everything, phi2)
    else:
        p0, p1 = prob01_nondeterministic(matrix, choices, everything, phi2, direction)
    maybe = [s for s in range(n) if s not in p0 and s not in p1]

    one = domains.one(domain)
    zero = domains.zero(domain)
    values = [one if s in p1 else zero for s in range(n)]
    scheduler = None
    policy_local = None
    if maybe:
        sub, sub_choices, b, _ = _assemble_system(matrix, choices, maybe, p1, domain)
        if model.kind == DTMC:
            outcome = _solve_linear(LinearSystem(sub, b), settings)
            block_of = None
        else:
            bell = BellmanSystem(sub, sub_choices, b, direction)
            outcome, block_of = _solve_bellman(bell, settings)
        for i, s in enumerate(maybe):
            values[s] = outcome.values[i] if block_of is None else outcome.values[block_of[i]]
        if model.kind != DTMC and block_of is None and outcome.policy is not None:
            policy_local = {s: outcome.policy[i] for i, s in enumerate(maybe)}
    if model.kind != DTMC:
        scheduler = _full_scheduler(matrix, choices, phi2, p0, p1, maybe, policy_local, direction)
    if domain == domains.FLOAT:
        values = np.array(values)
    return values, scheduler


def _full_scheduler(matrix, choices, phi2, p0, p1, maybe, policy_local, direction):
    """Per-state local choice indices reproducing the optimal value."""
    n = choices.state_count
    scheduler = [0] * n
    if direction == "max":
        witness = prob1_witness_rows(matrix, choices, frozenset(range(n)), phi2, p1)
        for s, row in witness.items():
            scheduler[s] = row - int(choices.state_offsets[s])
    else:
        # P0min states: stay inside P0min to certify probability zero
        for s in sorted(p0):
            for local, r in enumerate(choices.rows_of(s)):
                succ = [int(c) for c, _ in matrix.row(r)]
                if succ and all(c in p0 for c in succ):
                    scheduler[s] = local
                    break
    if policy_local:
        for s, local in policy_local.items():
            scheduler[s] = local
    return scheduler


def expected_reward(model: Model, reward_model, goal: frozenset, direction, settings: CheckSettings):
    """Expected accumulated reward until the goal; inf where not a.s. reached."""
    n = model.state_count
    domain = model.domain
    matrix, choices, row_map = _make_absorbing(model.transitions, model.choices, goal)
    everything = frozenset(range(n))
    if model.kind == DTMC:
        _, p1 = prob01_deterministic(matrix, everything, goal)
    else:
        # max needs every scheduler to reach (min-direction P1), min needs some
        p1_dir = "min" if direction == "max" else "max"
        _, p1 = prob01_nondeterministic(matrix, choices, everything, goal, p1_dir)
    finite = p1
    maybe = [s for s in range(n) if s in finite and s not in goal]
    inf_value = math.inf if domain == domains.FLOAT else domains.INF
    zero = domains.zero(domain)
    values = [zero if s in goal else (None if s in maybe else inf_value) for s in range(n)]

    # collect one-step rewards per retained row
    index = {s: i for i, s in enumerate(maybe)}
    offsets = [0]
    triplets = []
    b = []
    actions = []
    kept_rows = []
    new_row = 0
    for s in maybe:
        for r in choices.rows_of(s):
            succ = [int(c) for c, _ in matrix.row(r)]
            if direction == "min" and any(c not in finite and c not in goal for c in succ):
                continue  # this row forces infinity; never optimal for min
            for col, val in matrix.row(r):
                if col in index:
                    triplets.append((new_row, index[col], val))
            reward = reward_model.state_reward(s, domain)
            reward = reward + reward_model.action_reward(row_map[r], domain)
            b.append(reward)
            actions.append(choices.action_of(r))
            kept_rows.append((s, r))
            new_row += 1
        if offsets[-1] == new_row:
            raise CheckError("state with almost-sure reachability lost all its rows")
        offsets.append(new_row)
    scheduler = None
    if maybe:
        sub = from_triplets(new_row, triplets, columns=len(maybe), domain=domain)
        vec = np.array([float(v) for v in b]) if domain == domains.FLOAT else b
        if model.kind == DTMC:
            outcome = _solve_linear(LinearSystem(sub, vec), settings, reward_system=True)
            block_of = None
        else:
            labels = actions if choices.action_labels is not None else None
            bell = BellmanSystem(sub, ChoiceStructure(offsets, labels), vec, direction, reward_system=True)
            outcome, block_of = _solve_bellman(bell, settings, reward_system=True)
        for i, s in enumerate(maybe):
            values[s] = outcome.values[i] if block_of is None else outcome.values[block_of[i]]
        if model.kind != DTMC and block_of is None and outcome.policy is not None:
            scheduler = [0] * n
            for i, s in enumerate(maybe):
                chosen_kept = kept_rows[offsets[i] + outcome.policy[i]][1]
                scheduler[s] = chosen_kept - int(choices.state_offsets[s])
    if domain == domains.FLOAT:
        values = np.array([float(v) if v is not domains.INF else math.inf for v in values])
    return values, scheduler


def ctmc_timebounded(ctmc: Model, phi2: frozenset, t, eps, phi1: frozenset | None = None):
    """P(phi1 U<=t phi2) on a CTMC by uniformization + Poisson accumulation.

    Target states are made absorbing first; the Poisson series is
    truncated once the neglected tail weight drops below eps/2.
    """
    if ctmc.kind != CTMC:
        raise CheckError("time-bounded analysis needs a CTMC")
    if ctmc.domain != domains.FLOAT:
        raise UnsupportedFeatureError(
            "time-bounded CTMC analysis in exact arithmetic (exponentials are irrational)"
        )
    t = Fraction(t)
    if t < 0:
        raise CheckError("time bound must be nonnegative")
    n = ctmc.state_count
    phi1 = frozenset(range(n)) if phi1 is None else phi1
    dead = frozenset(range(n)) - phi1 - phi2
    absorb = phi2 | dead
    x0 = _indicator(phi2, n, domains.FLOAT)
    if t == 0:
        return x0
    matrix, _, _ = _make_absorbing(ctmc.transitions, ctmc.choices, absorb)
    # absorbing rows contribute no rate: drop their self-loops for uniformization
    triplets = []
    for s in range(n):
        if s in absorb:
            continue
        for col, val in matrix.row(s):
            triplets.append((s, col, val))
    rates = from_triplets(n, triplets, columns=n, domain=domains.FLOAT)
    modified = Model(
        kind=CTMC,
        transitions=rates,
        choices=ChoiceStructure.identity(n),
        labeling=ctmc.labeling,
        initial_states=ctmc.initial_states,
    )
    max_rate = max((rates.row_sum(s) for s in range(n)), default=0.0)
    if max_rate == 0:
        return x0
    uniformized = uniformize(modified, max_rate)
    p = uniformized.transitions
    lam = max_rate * float(t)
    eps_half = float(eps) / 2

    log_lam = math.log(lam)
    result = np.zeros(n)
    w = np.asarray(x0, dtype=np.float64)
    cumulative = 0.0
    k = 0
    while cumulative < 1.0 - eps_half:
        log_pmf = k * log_lam - lam - math.lgamma(k + 1)
        pmf = math.exp(log_pmf)
        result += pmf * w
        cumulative += pmf
        w = p.matvec(w)
        k += 1
        if k > 10_000_000:
            raise CheckError("Poisson truncation did not converge (rate*t too large)")
    return result
