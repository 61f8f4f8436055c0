"""Qualitative graph precomputation: prob-0/1 sets and end components.

Everything here is purely structural (no numerics): backward fixpoints
over the transition pattern decide which states have reachability
probability exactly 0 or exactly 1, and maximal end components are the
sub-MDPs closed under some retained choices and strongly connected.
"""

from __future__ import annotations

from .models import ChoiceStructure
from .sparse import SparseMatrix, backward_edges


def _row_successors(matrix: SparseMatrix, row: int) -> list[int]:
    lo, hi = matrix.row_offsets[row], matrix.row_offsets[row + 1]
    return [int(c) for c in matrix.col_indices[lo:hi]]


def _state_of_rows(choices: ChoiceStructure) -> list[int]:
    owner = []
    for s in range(choices.state_count):
        owner.extend([s] * choices.choice_count(s))
    return owner


def prob01_deterministic(matrix: SparseMatrix, phi1: frozenset, phi2: frozenset):
    """(P0, P1) for ``phi1 U phi2`` on a deterministic model.

    P0 holds the states with probability exactly 0, P1 those with
    probability exactly 1; both are found by backward graph fixpoints.
    """
    n = matrix.row_count
    preds = backward_edges(matrix)

    # states that can reach phi2 along phi1-states
    reach = set(phi2)
    queue = list(phi2)
    while queue:
        t = queue.pop()
        for p in preds[t]:
            if p not in reach and p in phi1:
                reach.add(p)
                queue.append(p)
    p0 = frozenset(range(n)) - reach

    # states that can reach P0 without passing through phi2 have prob < 1
    below = set(p0)
    queue = list(p0)
    while queue:
        t = queue.pop()
        for p in preds[t]:
            if p not in below and p not in phi2:
                below.add(p)
                queue.append(p)
    p1 = frozenset(range(n)) - below
    return p0, p1


def prob01_nondeterministic(
    matrix: SparseMatrix,
    choices: ChoiceStructure,
    phi1: frozenset,
    phi2: frozenset,
    direction: str,
):
    """Direction-specific (P0, P1) for an MDP.

    For ``max``: P0 = no scheduler reaches, P1 = some scheduler reaches
    almost surely (double fixpoint).  For ``min``: P0 = some scheduler
    avoids, P1 = every scheduler reaches almost surely.
    """
    if direction not in ("min", "max"):
        raise ValueError(f"direction must be 'min' or 'max', got {direction!r}")
    n = choices.state_count
    all_states = frozenset(range(n))
    row_owner = _state_of_rows(choices)
    preds = backward_edges(matrix)  # column -> rows

    def existential_backward(targets):
        seen = set(targets)
        queue = list(targets)
        while queue:
            t = queue.pop()
            for row in preds[t]:
                p = row_owner[row]
                if p not in seen and p in phi1:
                    seen.add(p)
                    queue.append(p)
        return seen

    if direction == "max":
        p0 = all_states - existential_backward(phi2)
        p1 = _prob1_exists(matrix, choices, phi1, phi2)
        return frozenset(p0), frozenset(p1)

    # min: P0 via "every choice keeps a way into R" fixpoint
    reach_all = set(phi2)
    changed = True
    while changed:
        changed = False
        for s in range(n):
            if s in reach_all or s not in phi1:
                continue
            ok = True
            for row in choices.rows_of(s):
                if not any(c in reach_all for c in _row_successors(matrix, row)):
                    ok = False
                    break
            if ok and choices.choice_count(s) > 0:
                reach_all.add(s)
                changed = True
    p0 = all_states - reach_all

    # P1min: states that cannot existentially reach P0 (through any states)
    seen = set(p0)
    queue = list(p0)
    while queue:
        t = queue.pop()
        for row in preds[t]:
            p = row_owner[row]
            if p not in seen and p not in phi2:
                seen.add(p)
                queue.append(p)
    p1 = all_states - seen
    return frozenset(p0), frozenset(p1)


def _prob1_exists(matrix, choices, phi1, phi2):
    """Greatest fixpoint for 'some scheduler reaches phi2 almost surely'."""
    n = choices.state_count
    u = set(range(n))
    while True:
        t = set(phi2)
        inner_changed = True
        while inner_changed:
            inner_changed = False
            for s in range(n):
                if s in t or s not in phi1:
                    continue
                for row in choices.rows_of(s):
                    succ = _row_successors(matrix, row)
                    if succ and all(c in u for c in succ) and any(c in t for c in succ):
                        t.add(s)
                        inner_changed = True
                        break
        if t == u:
            return frozenset(u)
        u = t


def prob1_witness_rows(matrix, choices, phi1, phi2, p1max):
    """For every P1max state, a row that certifies almost-sure reachability.

    Layered extraction over the final greatest-fixpoint set: picked rows
    stay inside the set and make one-step progress toward phi2.
    """
    witness: dict[int, int] = {}
    t = set(phi2)
    changed = True
    while changed:
        changed = False
        for s in sorted(p1max):
            if s in t:
                continue
            for row in choices.rows_of(s):
                succ = _row_successors(matrix, row)
                if succ and all(c in p1max for c in succ) and any(c in t for c in succ):
                    witness[s] = row
                    t.add(s)
                    changed = True
                    break
    return witness


def strongly_connected_components(nodes, successors) -> list[list[int]]:
    """Iterative Tarjan over ``nodes`` with a successor function.

    Returns components in reverse topological order of the condensation;
    node and successor orders are fixed, so the output is deterministic.
    """
    nodes = sorted(nodes)
    node_set = set(nodes)
    index: dict[int, int] = {}
    lowlink: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    sccs: list[list[int]] = []
    counter = 0

    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(sorted(set(successors(root)) & node_set)))]
        index[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = lowlink[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(sorted(set(successors(w)) & node_set))))
                    advanced = True
                    break
                if w in on_stack:
                    lowlink[v] = min(lowlink[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
            if lowlink[v] == index[v]:
                component = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    component.append(w)
                    if w == v:
                        break
                sccs.append(sorted(component))
    return sccs


def mec_decomposition(matrix: SparseMatrix, choices: ChoiceStructure):
    """Maximal end components: list of (state set, retained row set).

    A MEC is closed under its retained rows and strongly connected;
    components are disjoint and maximal.  Trivial single states without a
    self-loop row are not end components.
    """
    n = choices.state_count
    work = [frozenset(range(n))]
    mecs = []
    while work:
        region = work.pop()
        allowed: dict[int, list[int]] = {}
        alive = set()
        for s in sorted(region):
            rows = [
                r
                for r in choices.rows_of(s)
                if _row_successors(matrix, r) and all(c in region for c in _row_successors(matrix, r))
            ]
            if rows:
                allowed[s] = rows
                alive.add(s)
        if alive != region:
            if alive:
                work.append(frozenset(alive))
            continue

        def succs(s):
            out = set()
            for r in allowed[s]:
                out.update(_row_successors(matrix, r))
            return out

        sccs = strongly_connected_components(region, succs)
        if len(sccs) == 1:
            states = frozenset(sccs[0])
            rows = frozenset(r for s in sccs[0] for r in allowed[s])
            mecs.append((states, rows))
        else:
            for component in sccs:
                work.append(frozenset(component))
    mecs.sort(key=lambda pair: min(pair[0]))
    return mecs
