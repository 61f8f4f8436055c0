"""Interchangeable solvers for linear fixpoint and min/max Bellman systems.

Two system shapes are served behind one implementation core:

* :class:`LinearSystem` -- deterministic ``x = A x + b`` over maybe-states,
* :class:`BellmanSystem` -- the same with a choice structure and a
  min/max direction per state.

Numeric solvers: ``vi`` (classical value iteration, not guaranteed
eps-close to the truth), ``interval_iteration`` (two-sided, sound),
``ovi`` (optimistic: guess an upper bound from a value-iteration result
and certify it with one operator application).  Exact solvers: sparse
Gaussian elimination, state elimination with a minimum-degree order,
exact policy iteration, and rational search (sharpen an approximation to
the simplest rational in a sound enclosure, verify by substitution).

All solvers are built in-house; numpy is used only for float vector
arithmetic.  Iteration caps default to 10**6 and exceeding one raises,
never silently returns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import domains
from .errors import SolverError
from .models import ChoiceStructure
from .sparse import SparseMatrix

DEFAULT_MAX_ITER = 10**6


@dataclass
class LinearSystem:
    """Fixpoint form x = A x + b with substochastic A over maybe-states."""

    matrix: SparseMatrix
    b: object  # vector, domain-typed

    @property
    def domain(self):
        return self.matrix.domain

    @property
    def size(self):
        return self.matrix.row_count


@dataclass
class BellmanSystem:
    """Min/max fixpoint: per state, optimize b_r + A_r x over its rows."""

    matrix: SparseMatrix
    choices: ChoiceStructure
    b: object  # per-row vector
    direction: str  # "min" | "max"
    reward_system: bool = False  # improper policies evaluate to inf, not 0

    @property
    def domain(self):
        return self.matrix.domain

    @property
    def size(self):
        return self.choices.state_count


@dataclass
class SolverOutcome:
    values: object
    lower: object | None = None
    upper: object | None = None
    iterations: int = 0
    policy: list | None = None


def _as_bellman(system: LinearSystem) -> BellmanSystem:
    n = system.matrix.row_count
    return BellmanSystem(system.matrix, ChoiceStructure.identity(n), system.b, "min")


def _zeros(system) -> object:
    if system.domain == domains.FLOAT:
        return np.zeros(system.size)
    return [domains.zero(system.domain) for _ in range(system.size)]


def _apply(system: BellmanSystem, x):
    """One operator application: per-state min/max of b_r + A_r x."""
    matrix = system.matrix
    offsets = system.choices.state_offsets
    if matrix.domain == domains.FLOAT:
        rows = matrix.matvec(x) + system.b
        reduce = np.minimum.reduceat if system.direction == "min" else np.maximum.reduceat
        return reduce(rows, offsets[:-1])
    out = []
    better = (lambda a, b: a < b) if system.direction == "min" else (lambda a, b: a > b)
    for s in range(system.size):
        best = None
        for r in system.choices.rows_of(s):
            acc = system.b[r]
            for col, val in matrix.row(r):
                acc = acc + val * x[col]
            if best is None or better(acc, best):
                best = acc
        out.append(best)
    return out


def _apply_gauss_seidel(system: BellmanSystem, x):
    """In-place sweep in ascending state order (optional vi variant)."""
    matrix = system.matrix
    is_float = matrix.domain == domains.FLOAT
    x = np.array(x, dtype=np.float64) if is_float else list(x)
    better = (lambda a, b: a < b) if system.direction == "min" else (lambda a, b: a > b)
    for s in range(system.size):
        best = None
        for r in system.choices.rows_of(s):
            acc = system.b[r]
            for col, val in matrix.row(r):
                acc = acc + val * x[col]
            if best is None or better(acc, best):
                best = acc
        x[s] = best
    return x


def greedy_policy(system: BellmanSystem, x) -> list[int]:
    """Per-state local choice index optimizing b_r + A_r x (ties: lowest)."""
    matrix = system.matrix
    better = (lambda a, b: a < b) if system.direction == "min" else (lambda a, b: a > b)
    policy = []
    for s in range(system.size):
        best = None
        best_local = 0
        for local, r in enumerate(system.choices.rows_of(s)):
            acc = system.b[r]
            for col, val in matrix.row(r):
                acc = acc + val * x[col]
            if best is None or better(acc, best):
                best = acc
                best_local = local
        policy.append(best_local)
    return policy


def _max_diff(new, old, relative: bool):
    """Stop-criterion distance: componentwise relative difference treats 0/0 as 0."""
    worst = None
    for a, b in zip(new, old):
        diff = a - b if a >= b else b - a
        if relative:
            if diff == 0:
                continue
            mag = a if a >= 0 else -a
            if mag == 0:
                return None  # nonzero change against a zero value: not converged
            diff = diff / mag
        if worst is None or diff > worst:
            worst = diff
    return worst if worst is not None else 0


def _eps(system, eps):
    if system.domain == domains.FLOAT:
        return float(eps)
    return Fraction(eps)


def vi(system, eps, relative: bool = True, max_iter: int = DEFAULT_MAX_ITER, gauss_seidel: bool = False, x0=None) -> SolverOutcome:
    """Classical value iteration from x = 0.

    Stops when the componentwise difference (relative, if set) drops to
    ``eps``; this is NOT guaranteed to be eps-close to the true solution.
    """
    bell = _as_bellman(system) if isinstance(system, LinearSystem) else system
    eps = _eps(bell, eps)
    x = _zeros(bell) if x0 is None else x0
    for iteration in range(1, max_iter + 1):
        new = _apply_gauss_seidel(bell, x) if gauss_seidel else _apply(bell, x)
        diff = _max_diff(new, x, relative)
        x = new
        if diff is not None and diff <= eps:
            policy = greedy_policy(bell, x) if isinstance(system, BellmanSystem) else None
            return SolverOutcome(values=x, iterations=iteration, policy=policy)
    raise SolverError(f"value iteration did not converge within {max_iter} iterations")


def _gap_converged(lower, upper, eps2, relative: bool) -> bool:
    for l, u in zip(lower, upper):
        gap = u - l
        if gap < 0:
            gap = -gap
        if relative and l != 0:
            bound = eps2 * (l if l >= 0 else -l)
        else:
            bound = eps2  # absolute fallback, also for l == 0
        if gap > bound:
            return False
    return True


def _midpoint(lower, upper, domain):
    if domain == domains.FLOAT:
        return (np.asarray(lower) + np.asarray(upper)) / 2.0
    half = Fraction(1, 2)
    return [(l + u) * half for l, u in zip(lower, upper)]


def interval_iteration(system, eps, relative: bool = True, max_iter: int = DEFAULT_MAX_ITER, upper0=None) -> SolverOutcome:
    """Sound iteration approaching the solution from both directions.

    The lower sequence starts at 0, the upper at 1 for probability
    systems (or at a certified reward bound passed as ``upper0``); the
    true solution stays bracketed, and iteration stops when the gap
    criterion reaches ``2 eps``.  Values are the midpoint.
    """
    bell = _as_bellman(system) if isinstance(system, LinearSystem) else system
    eps2 = _eps(bell, eps) * 2
    lower = _zeros(bell)
    if upper0 is None:
        if bell.domain == domains.FLOAT:
            upper = np.ones(bell.size)
        else:
            upper = [domains.one(bell.domain) for _ in range(bell.size)]
    else:
        upper = upper0
    for iteration in range(1, max_iter + 1):
        lower = _apply(bell, lower)
        upper = _apply(bell, upper)
        if _gap_converged(lower, upper, eps2, relative):
            policy = greedy_policy(bell, lower) if isinstance(system, BellmanSystem) else None
            return SolverOutcome(
                values=_midpoint(lower, upper, bell.domain),
                lower=lower,
                upper=upper,
                iterations=iteration,
                policy=policy,
            )
    raise SolverError(f"interval iteration did not converge within {max_iter} iterations")


def ovi(system, eps, relative: bool = True, max_iter: int = DEFAULT_MAX_ITER, cap_at_one: bool = True) -> SolverOutcome:
    """Optimistic value iteration.

    Runs vi to a heuristic criterion for a lower vector l and guesses
    u = l*(1+eps) (absolute mode: l+eps).  The guess is certified during
    a bounded verification phase iterating u <- min(u, Phi(u)): as soon
    as Phi(u) <= u componentwise, u is a sound upper bound (Park
    induction) and [l, u] is returned.  A single application cannot
    certify states with b = 0, where the slack u - Phi(u) = eps*b
    vanishes identically, hence the iterated phase.  If verification
    fails within its budget (or the guess is detected below the
    fixpoint), the heuristic criterion is halved and vi continues from
    the current l.
    """
    bell = _as_bellman(system) if isinstance(system, LinearSystem) else system
    eps = _eps(bell, eps)
    heuristic = eps
    lower = _zeros(bell)
    iterations = 0
    is_float = bell.domain == domains.FLOAT

    def guess(vec):
        if relative:
            if is_float:
                out = vec * (1.0 + float(eps))
            else:
                factor = 1 + eps
                out = [v * factor for v in vec]
        else:
            if is_float:
                out = vec + float(eps)
            else:
                out = [v + eps for v in vec]
        if cap_at_one:
            if is_float:
                out = np.minimum(out, 1.0)
            else:
                one = domains.one(bell.domain)
                out = [u if u <= one else one for u in out]
        return out

    def finish(lower, upper, iterations):
        if is_float:
            lower = np.minimum(lower, upper)  # guard against rounding crossovers
        policy = greedy_policy(bell, lower) if isinstance(system, BellmanSystem) else None
        return SolverOutcome(
            values=_midpoint(lower, upper, bell.domain),
            lower=lower,
            upper=upper,
            iterations=iterations,
            policy=policy,
        )

    while iterations < max_iter:
        # advance the lower sequence to the current heuristic criterion
        phase_iters = 0
        while iterations < max_iter:
            new = _apply(bell, lower)
            iterations += 1
            phase_iters += 1
            diff = _max_diff(new, lower, relative)
            lower = new
            if diff is not None and diff <= heuristic:
                break
        upper = guess(lower)
        budget = max(10, phase_iters)
        for _ in range(budget):
            if iterations >= max_iter:
                break
            candidate = _apply(bell, upper)
            iterations += 1
            if all(c <= u for c, u in zip(candidate, upper)):
                return finish(lower, upper, iterations)
            if all(c >= u for c, u in zip(candidate, upper)):
                break  # guess lies below the fixpoint; refine the lower phase
            if is_float:
                upper = np.minimum(upper, candidate)
            else:
                upper = [u if u <= c else c for u, c in zip(upper, candidate)]
            lower = _apply(bell, lower)
            iterations += 1
        heuristic = heuristic / 2
    raise SolverError(f"optimistic value iteration did not converge within {max_iter} iterations")


# ---------------------------------------------------------------------------
# exact solvers


def _rows_as_dicts(matrix: SparseMatrix):
    return [dict(matrix.row(r)) for r in range(matrix.row_count)]


def _eliminate(rows: list[dict], b: list, order: list[int]):
    """Shared elimination core: forward eliminate, then back-substitute.

    ``rows``/``b`` encode x_s = sum_j rows[s][j] x_j + b[s]; works for any
    number domain with exact arithmetic (rationals, rational functions).
    """
    n = len(rows)
    rows = [dict(r) for r in rows]
    b = list(b)
    columns: list[set[int]] = [set() for _ in range(n)]
    for s, row in enumerate(rows):
        for col in row:
            columns[col].add(s)
    frozen: dict[int, tuple[dict, object]] = {}
    remaining = set(range(n))

    for s in order:
        row = rows[s]
        self_loop = row.pop(s, None)
        columns[s].discard(s)
        if self_loop is not None and not domains.is_zero(self_loop):
            one = domains.one_like(self_loop)
            assert not self_loop == one, (
                f"state {s} has self-loop probability 1 outside P0/P1; "
                "prob01 preprocessing should have removed it"
            )
            factor = one / (one - self_loop)
            for col in list(row):
                row[col] = row[col] * factor
            b[s] = b[s] * factor
        # redirect all remaining predecessors through s
        for p in sorted(columns[s]):
            if p not in remaining or p == s:
                continue
            weight = rows[p].pop(s)
            for col, val in row.items():
                add = weight * val
                if col in rows[p]:
                    total = rows[p][col] + add
                    if domains.is_zero(total):
                        del rows[p][col]
                        columns[col].discard(p)
                    else:
                        rows[p][col] = total
                else:
                    rows[p][col] = add
                    columns[col].add(p)
            b[p] = b[p] + weight * b[s]
        columns[s] = set()
        frozen[s] = (row, b[s])
        remaining.discard(s)

    values: list = [None] * n
    for s in reversed(order):
        row, offset = frozen[s]
        acc = offset
        for col, val in row.items():
            acc = acc + val * values[col]
        values[s] = acc
    return values


def gaussian_elimination_exact(system: LinearSystem) -> SolverOutcome:
    """Solve (I - A) x = b exactly by sparse elimination in index order.

    The result satisfies the system with exact equality; a singular
    system cannot occur after prob01 preprocessing and trips an
    assertion if observed.
    """
    rows = _rows_as_dicts(system.matrix)
    values = _eliminate(rows, list(system.b), list(range(system.size)))
    return SolverOutcome(values=values)


def state_elimination_solve(system: LinearSystem) -> SolverOutcome:
    """State elimination with a minimum-degree order.

    Eliminates the state minimizing in-degree*out-degree first (ties by
    index); shared with the parametric module, where values are rational
    functions.  Exact in exact domains and equal to Gaussian elimination
    there.
    """
    rows = _rows_as_dicts(system.matrix)
    n = system.size
    # dynamic greedy order computed on a pattern-only working copy
    succ: list[set[int]] = [set(r.keys()) for r in rows]
    pred: list[set[int]] = [set() for _ in range(n)]
    for s, cols in enumerate(succ):
        for col in cols:
            if col != s:
                pred[col].add(s)
    remaining = set(range(n))
    order = []
    while remaining:
        best = None
        best_score = None
        for s in sorted(remaining):
            out_deg = sum(1 for c in succ[s] if c != s and c in remaining)
            in_deg = sum(1 for p in pred[s] if p != s and p in remaining)
            score = in_deg * out_deg
            if best_score is None or score < best_score:
                best = s
                best_score = score
        order.append(best)
        remaining.discard(best)
        row_cols = [c for c in succ[best] if c != best and c in remaining]
        for p in [p for p in pred[best] if p != best and p in remaining]:
            succ[p].discard(best)
            for c in row_cols:
                succ[p].add(c)
                pred[c].add(p)
        succ[best] = set()
        pred[best] = set()
    values = _eliminate(rows, list(system.b), order)
    return SolverOutcome(values=values)


def verify_solution(system: LinearSystem, values) -> bool:
    """Exact substitution check: values == A values + b componentwise."""
    matrix = system.matrix
    for s in range(system.size):
        acc = system.b[s]
        for col, val in matrix.row(s):
            acc = acc + val * values[col]
        if not acc == values[s]:
            return False
    return True


def policy_iteration_exact(system: BellmanSystem, max_iter: int = DEFAULT_MAX_ITER) -> SolverOutcome:
    """Exact policy iteration over the rationals.

    Starts from the lowest-index proper policy (rows that keep the exit
    of the maybe-system reachable), alternates exact policy evaluation
    with greedy improvement (strict improvements only), and terminates at
    the exact optimum with the optimizing policy.
    """
    if system.domain != domains.EXACT:
        raise SolverError("policy iteration requires the exact rational domain")
    matrix = system.matrix
    choices = system.choices
    n = system.size
    minimize = system.direction == "min"

    exit_rows = set()
    for r in range(matrix.row_count):
        if matrix.row_sum(r) != 1:
            exit_rows.add(r)

    # initial proper policy: lowest row that can reach the exit
    policy: dict[int, int] = {}
    assigned: set[int] = set()
    changed = True
    while changed:
        changed = False
        for s in range(n):
            if s in assigned:
                continue
            for local, r in enumerate(choices.rows_of(s)):
                hits = r in exit_rows or any(col in assigned for col, _ in matrix.row(r))
                if hits:
                    policy[s] = local
                    assigned.add(s)
                    changed = True
                    break
    for s in range(n):
        policy.setdefault(s, 0)  # unreachable exits cannot occur after precomputation

    def evaluate(policy):
        """Exact values of the induced chain; improper classes get 0/INF."""
        induced_rows = []
        induced_b = []
        for s in range(n):
            r = list(choices.rows_of(s))[policy[s]]
            induced_rows.append(dict(matrix.row(r)))
            induced_b.append(system.b[r])
        # states that reach the exit under this policy
        proper = set()
        frontier = []
        for s in range(n):
            r = list(choices.rows_of(s))[policy[s]]
            if r in exit_rows:
                proper.add(s)
                frontier.append(s)
        preds: dict[int, set[int]] = {s: set() for s in range(n)}
        for s in range(n):
            for col in induced_rows[s]:
                preds[col].add(s)
        while frontier:
            t = frontier.pop()
            for p in preds[t]:
                if p not in proper:
                    proper.add(p)
                    frontier.append(p)
        values: list = [None] * n
        for s in range(n):
            if s not in proper:
                values[s] = domains.INF if system.reward_system else Fraction(0)
        order = [s for s in range(n) if s in proper]
        sub_index = {s: i for i, s in enumerate(order)}
        sub_rows = []
        sub_b = []
        for s in order:
            row = {}
            for col, val in induced_rows[s].items():
                if col in sub_index:
                    row[sub_index[col]] = val
                # improper successors of a proper state cannot occur
            sub_rows.append(row)
            sub_b.append(induced_b[s])
        if order:
            sub_values = _eliminate(sub_rows, sub_b, list(range(len(order))))
            for s, v in zip(order, sub_values):
                values[s] = v
        return values

    def row_value(r, values):
        acc = system.b[r]
        for col, val in matrix.row(r):
            if values[col] is domains.INF:
                return domains.INF
            acc = acc + val * values[col]
        return acc

    for _ in range(max_iter):
        values = evaluate(policy)
        improved = False
        for s in range(n):
            current = values[s]
            best_local = policy[s]
            best_value = current
            for local, r in enumerate(choices.rows_of(s)):
                candidate = row_value(r, values)
                if _strictly_better(candidate, best_value, minimize):
                    best_value = candidate
                    best_local = local
            if best_local != policy[s]:
                policy[s] = best_local
                improved = True
        if not improved:
            return SolverOutcome(values=values, policy=[policy[s] for s in range(n)])
    raise SolverError(f"policy iteration did not stabilize within {max_iter} rounds")


def _strictly_better(candidate, reference, minimize: bool):
    cand_inf = candidate is domains.INF
    ref_inf = reference is domains.INF
    if minimize:
        if cand_inf:
            return False
        return True if ref_inf else candidate < reference
    if ref_inf:
        return False
    return True if cand_inf else candidate > reference


def simplest_rational_between(lo: Fraction, hi: Fraction) -> Fraction:
    """Smallest-denominator rational in [lo, hi] (continued fractions)."""
    if lo > hi:
        raise ValueError("empty interval")
    if lo <= 0 <= hi:
        return Fraction(0)
    if hi < 0:
        return -simplest_rational_between(-hi, -lo)
    ceil_lo = -((-lo.numerator) // lo.denominator)
    if ceil_lo <= hi:
        return Fraction(ceil_lo)
    floor_lo = lo.numerator // lo.denominator
    return floor_lo + 1 / simplest_rational_between(1 / (hi - floor_lo), 1 / (lo - floor_lo))


def _sound_enclosure(system: LinearSystem, eps: Fraction, max_iter: int, reward_system: bool = False):
    """Exact-rational interval iteration with outward dyadic rounding.

    Rounding the lower iterate down and the upper iterate up to a
    2^-bits grid keeps the enclosure sound while bounding coefficient
    growth, so the width can be pushed far below float precision.
    """
    bell = _as_bellman(system)
    # grid resolution comfortably below eps; integer arithmetic so that
    # astronomically small eps (squared refinements) cannot overflow
    bits = (eps.denominator // max(eps.numerator, 1)).bit_length() + 12
    n = system.size
    lower = [Fraction(0)] * n
    if reward_system:
        rbell = _as_bellman(system)
        rbell.reward_system = True
        upper = reward_upper_bound(rbell)
    else:
        upper = [Fraction(1)] * n
    iterations = 0
    last_width = None
    while iterations < max_iter:
        scale = 1 << bits
        lo = _apply(bell, lower)
        up = _apply(bell, upper)
        lower = [Fraction(v.numerator * scale // v.denominator, scale) for v in lo]
        upper = [Fraction(-((-v.numerator * scale) // v.denominator), scale) for v in up]
        iterations += 1
        width = max((u - l for l, u in zip(lower, upper)), default=Fraction(0))
        if width <= eps:
            return lower, upper, iterations
        if last_width is not None and width >= last_width and iterations % 64 == 0:
            bits += bits  # grid too coarse to make progress; refine it
        last_width = width
    raise SolverError(f"sound enclosure did not reach width {eps} within {max_iter} iterations")


def rational_search(system: LinearSystem, float_solver=vi, eps0=Fraction(1, 10**6), max_refinements: int = 30, reward_system: bool = False) -> SolverOutcome:
    """Sharpen an approximate solution to the exact rational solution.

    Round 0 sharpens a fast float solve; later rounds use exact-domain
    interval iteration so the per-component enclosures are sound and can
    shrink below float precision.  Each candidate is the simplest
    rational in its enclosure and is verified by exact substitution
    x = A x + b; on failure the precision is squared and the loop
    restarts.
    """
    if system.domain != domains.EXACT:
        raise SolverError("rational search requires an exact-domain system")
    float_system = LinearSystem(
        system.matrix.map_values(float, domains.FLOAT),
        np.array([float(v) for v in system.b]),
    )
    eps = Fraction(eps0)
    iterations = 0
    for refinement in range(max_refinements):
        if refinement == 0:
            outcome = float_solver(float_system, float(eps), relative=False)
            iterations += outcome.iterations
            enclosures = [
                (Fraction(float(v)) - eps, Fraction(float(v)) + eps) for v in outcome.values
            ]
        else:
            lower, upper, iters = _sound_enclosure(system, eps, DEFAULT_MAX_ITER, reward_system)
            iterations += iters
            enclosures = list(zip(lower, upper))
        candidate = [simplest_rational_between(lo, hi) for lo, hi in enclosures]
        if verify_solution(system, candidate):
            return SolverOutcome(values=candidate, iterations=iterations)
        eps = eps * eps
    raise SolverError(f"rational search failed after {max_refinements} precision refinements")


def reward_upper_bound(system: BellmanSystem):
    """Certified upper bound vector for reward interval iteration.

    Every proper scheduler leaves the n maybe-states within n steps with
    probability at least p_min^n (p_min the least positive transition or
    exit probability), so expected steps are at most n / p_min^n and
    collected reward at most r_max times that.  Loose but sound.
    """
    matrix = system.matrix
    n = system.size
    if n == 0:
        return _zeros(system)
    is_float = system.domain == domains.FLOAT
    p_min = None
    for r in range(matrix.row_count):
        total = matrix.row_sum(r)
        deficit = (1.0 - total) if is_float else (Fraction(1) - total)
        candidates = [val for _, val in matrix.row(r) if val > 0]
        if deficit > 0:
            candidates.append(deficit)
        for c in candidates:
            if p_min is None or c < p_min:
                p_min = c
    r_max = max(system.b) if len(system.b) else 0
    if p_min is None or r_max == 0:
        return _zeros(system)
    if is_float:
        log_bound = math.log10(n) - n * math.log10(p_min) + math.log10(max(float(r_max), 1e-300))
        if log_bound > 250:
            raise SolverError(
                "cannot derive a finite float upper bound for reward interval iteration; "
                "use the exact or pi solver"
            )
        bound = float(r_max) * n / (float(p_min) ** n)
        return np.full(n, bound)
    bound = Fraction(r_max) * n / (Fraction(p_min) ** n)
    return [bound for _ in range(n)]


def vi_bellman(system: BellmanSystem, eps, relative=True, max_iter=DEFAULT_MAX_ITER, gauss_seidel=False) -> SolverOutcome:
    return vi(system, eps, relative, max_iter, gauss_seidel)


def interval_bellman(system: BellmanSystem, eps, relative=True, max_iter=DEFAULT_MAX_ITER, upper0=None) -> SolverOutcome:
    return interval_iteration(system, eps, relative, max_iter, upper0)


def ovi_bellman(system: BellmanSystem, eps, relative=True, max_iter=DEFAULT_MAX_ITER, cap_at_one=True) -> SolverOutcome:
    return ovi(system, eps, relative, max_iter, cap_at_one)
