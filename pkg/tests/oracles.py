"""Independent oracles used to freeze expected values.

Deliberately naive: dense rational LU, exhaustive memoryless-policy
enumeration, and brute-force search over denominators.  Nothing here
shares code with the production solvers.
"""

from fractions import Fraction
from itertools import product


def dense_solve(a_rows, b):
    """Solve (I - A) x = b by dense rational Gaussian elimination.

    ``a_rows`` is a dense list of Fraction lists.
    """
    n = len(b)
    m = [[Fraction(-a_rows[i][j]) for j in range(n)] for i in range(n)]
    for i in range(n):
        m[i][i] += 1
    rhs = [Fraction(v) for v in b]
    for col in range(n):
        pivot = next(r for r in range(col, n) if m[r][col] != 0)
        m[col], m[pivot] = m[pivot], m[col]
        rhs[col], rhs[pivot] = rhs[pivot], rhs[col]
        inv = Fraction(1) / m[col][col]
        m[col] = [v * inv for v in m[col]]
        rhs[col] *= inv
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [v - f * w for v, w in zip(m[r], m[col])]
                rhs[r] -= f * rhs[col]
    return rhs


def dense_reachability(dense, targets, states=None):
    """P(F targets) per state of a dense rational DTMC, by graph + LU."""
    n = len(dense)
    states = range(n) if states is None else states
    # backward reachability of targets
    can_reach = set(targets)
    changed = True
    while changed:
        changed = False
        for s in range(n):
            if s in can_reach:
                continue
            if any(dense[s][t] != 0 and t in can_reach for t in range(n)):
                can_reach.add(s)
                changed = True
    maybe = [s for s in range(n) if s in can_reach and s not in targets]
    idx = {s: i for i, s in enumerate(maybe)}
    a = [[dense[s][t] for t in maybe] for s in maybe]
    b = [sum((dense[s][t] for t in targets), Fraction(0)) for s in maybe]
    if maybe:
        sol = dense_solve(a, b)
    else:
        sol = []
    values = []
    for s in range(n):
        if s in targets:
            values.append(Fraction(1))
        elif s in idx:
            values.append(sol[idx[s]])
        else:
            values.append(Fraction(0))
    return values


def dense_expected_reward(dense, targets, state_rewards):
    """E[accumulated reward until F targets]; None where P(F targets) < 1."""
    n = len(dense)
    reach = dense_reachability(dense, targets)
    values = [None] * n
    finite = [s for s in range(n) if reach[s] == 1 and s not in targets]
    idx = {s: i for i, s in enumerate(finite)}
    a = [[dense[s][t] for t in finite] for s in finite]
    b = [Fraction(state_rewards[s]) for s in finite]
    sol = dense_solve(a, b) if finite else []
    for s in range(n):
        if s in targets:
            values[s] = Fraction(0)
        elif s in idx:
            values[s] = sol[idx[s]]
    return values


def enumerate_policies(row_groups):
    """All memoryless policies: one local row index per state."""
    return product(*(range(len(rows)) for rows in row_groups))


def policy_values(row_groups, b_groups, targets_value_fn=None):
    """Evaluate every policy of a small MDP exactly.

    ``row_groups[s]`` is the list of dense successor-probability rows of
    state s (over all n states); ``b_groups[s]`` the matching one-step
    values.  Returns a list of (policy, values) pairs where values[s] is
    a Fraction, or None when the policy never leaves the system from s
    (used to encode infinity for reward queries).
    """
    n = len(row_groups)
    out = []
    for policy in enumerate_policies(row_groups):
        dense = [row_groups[s][policy[s]] for s in range(n)]
        b = [b_groups[s][policy[s]] for s in range(n)]
        # exit-reaching states (exit = any probability deficit)
        exits = {s for s in range(n) if sum(dense[s], Fraction(0)) < 1}
        reach = set(exits)
        changed = True
        while changed:
            changed = False
            for s in range(n):
                if s in reach:
                    continue
                if any(dense[s][t] != 0 and t in reach for t in range(n)):
                    reach.add(s)
                    changed = True
        proper = sorted(reach)
        idx = {s: i for i, s in enumerate(proper)}
        a = [[dense[s][t] for t in proper] for s in proper]
        rhs = [b[s] for s in proper]
        sol = dense_solve(a, rhs) if proper else []
        values = [sol[idx[s]] if s in idx else None for s in range(n)]
        out.append((policy, values))
    return out


def simplest_rational_brute(lo: Fraction, hi: Fraction, max_den: int = 10**6) -> Fraction:
    """Smallest-denominator rational in [lo, hi] by brute force over denominators."""
    for den in range(1, max_den + 1):
        num = -((-lo.numerator * den) // lo.denominator)  # ceil(lo * den)
        if Fraction(num, den) <= hi:
            return Fraction(num, den)
    raise ValueError("no rational with small denominator in interval")
