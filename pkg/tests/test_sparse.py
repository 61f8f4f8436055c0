from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from stormlet import domains
from stormlet.errors import ModelError
from stormlet.sparse import backward_edges, from_triplets


def test_duplicate_entries_merge():
    m = from_triplets(2, [(0, 1, Fraction(1, 2)), (0, 1, Fraction(1, 2))])
    assert m.n_entries == 1
    assert list(m.row(0)) == [(1, Fraction(1))]


def test_identity_self_loop_row():
    m = from_triplets(1, [(0, 0, Fraction(1))])
    assert list(m.row(0)) == [(0, Fraction(1))]


def test_knuth_yao_top_fragment_layout():
    # states {0,1,2}, only state 0 has outgoing mass
    m = from_triplets(3, [(0, 1, Fraction(1, 2)), (0, 2, Fraction(1, 2))])
    assert list(m.row_offsets) == [0, 2, 2, 2]
    assert list(m.col_indices) == [1, 2]


def test_zero_values_dropped_and_columns_sorted():
    m = from_triplets(2, [(0, 1, Fraction(3)), (0, 0, Fraction(1)), (1, 0, Fraction(0))])
    assert list(m.row(0)) == [(0, Fraction(1)), (1, Fraction(3))]
    assert m.row_entries(1) == 0


def test_out_of_bounds_rejected():
    with pytest.raises(ModelError):
        from_triplets(2, [(2, 0, Fraction(1))])
    with pytest.raises(ModelError):
        from_triplets(2, [(0, 5, Fraction(1))])


def test_float_matvec_matches_dense():
    m = from_triplets(
        3,
        [(0, 1, 0.5), (0, 2, 0.5), (1, 1, 1.0), (2, 0, 0.25), (2, 2, 0.75)],
        domain=domains.FLOAT,
    )
    x = np.array([1.0, 2.0, 3.0])
    dense = np.array(m.to_dense())
    assert np.allclose(m.matvec(x), dense @ x)


def test_exact_matvec():
    m = from_triplets(2, [(0, 0, Fraction(1, 3)), (0, 1, Fraction(2, 3)), (1, 1, Fraction(1))])
    y = m.matvec([Fraction(3), Fraction(6)])
    assert y == [Fraction(5), Fraction(6)]


def test_backward_edges_transpose():
    m = from_triplets(3, [(0, 1, Fraction(1, 2)), (0, 2, Fraction(1, 2))])
    assert backward_edges(m) == [[], [0], [0]]


def test_backward_of_backward_restores_pattern():
    m = from_triplets(
        4,
        [(0, 1, Fraction(1)), (1, 2, Fraction(1, 2)), (1, 0, Fraction(1, 2)), (3, 3, Fraction(1))],
    )
    preds = backward_edges(m)
    # rebuild a matrix from the transposed pattern and transpose again
    t = from_triplets(
        4, [(col, row, Fraction(1)) for col, rows in enumerate(preds) for row in rows]
    )
    roundtrip = backward_edges(t)
    assert {(c, r) for c, rows in enumerate(roundtrip) for r in rows} == m.pattern()


@given(
    st.lists(
        st.tuples(
            st.integers(0, 5),
            st.integers(0, 5),
            st.fractions(min_value=-3, max_value=3),
        ),
        max_size=25,
    )
)
def test_from_triplets_canonical(entries):
    m = from_triplets(6, entries)
    # offsets nondecreasing and covering
    offsets = list(m.row_offsets)
    assert offsets[0] == 0 and offsets[-1] == m.n_entries
    assert all(a <= b for a, b in zip(offsets, offsets[1:]))
    dense = {}
    for r, c, v in entries:
        dense[(r, c)] = dense.get((r, c), Fraction(0)) + v
    expected = {k: v for k, v in dense.items() if v != 0}
    got = {}
    for r in range(6):
        last = -1
        for c, v in m.row(r):
            assert c > last  # strictly ascending columns
            last = c
            assert v != 0
            got[(r, c)] = v
    assert got == expected
