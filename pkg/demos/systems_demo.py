"""Small helper shared by the demo scripts."""

from fractions import Fraction

from stormlet import domains
from stormlet.solvers import LinearSystem
from stormlet.sparse import from_triplets


def slow_chain_system():
    """The maybe-system of the 20-state lazy random walk."""
    entries = []
    b = []
    for i in range(20):
        entries.append((i, i, Fraction(1, 2)))
        if i > 0:
            entries.append((i, i - 1, Fraction(1, 4)))
        if i < 19:
            entries.append((i, i + 1, Fraction(1, 4)))
        b.append(Fraction(1, 4) if i == 19 else Fraction(0))
    matrix = from_triplets(20, entries, domain=domains.EXACT)
    return LinearSystem(matrix, b)
