"""Compressed row-oriented sparse matrices over a pluggable number domain.

Memory is proportional to the number of stored (non-zero) entries.  The
float domain keeps values in a numpy array so matrix-vector products
vectorize; the exact and parametric domains keep plain Python lists of
:class:`fractions.Fraction` / :class:`~stormlet.ratfunc.RationalFunction`.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from . import domains
from .errors import ModelError


class SparseMatrix:
    """Immutable CSR matrix.

    Invariants: ``row_offsets`` is nondecreasing with ``row_offsets[0] == 0``
    and ``row_offsets[-1] == len(values)``; within each row the column
    indices are strictly ascending and below ``column_count``; stored values
    are non-zero in the domain.
    """

    __slots__ = ("row_count", "column_count", "row_offsets", "col_indices", "values", "domain", "_row_ids")

    def __init__(self, row_count, column_count, row_offsets, col_indices, values, domain):
        self.row_count = int(row_count)
        self.column_count = int(column_count)
        self.row_offsets = np.asarray(row_offsets, dtype=np.int64)
        self.col_indices = np.asarray(col_indices, dtype=np.int64)
        self.domain = domain
        if domain == domains.FLOAT:
            self.values = np.asarray(values, dtype=np.float64)
        else:
            self.values = list(values)
        self._row_ids = None

    @property
    def n_entries(self) -> int:
        return len(self.col_indices)

    def row(self, r: int):
        """Iterate (column, value) pairs of row ``r``."""
        lo, hi = self.row_offsets[r], self.row_offsets[r + 1]
        for k in range(lo, hi):
            yield int(self.col_indices[k]), self.values[k]

    def row_entries(self, r: int) -> int:
        return int(self.row_offsets[r + 1] - self.row_offsets[r])

    def row_sum(self, r: int):
        lo, hi = self.row_offsets[r], self.row_offsets[r + 1]
        if self.domain == domains.FLOAT:
            return float(np.sum(self.values[lo:hi]))
        total = domains.zero(self.domain)
        for k in range(lo, hi):
            total = total + self.values[k]
        return total

    def diagonal_entry(self, r: int):
        for col, val in self.row(r):
            if col == r:
                return val
        return domains.zero(self.domain)

    def matvec(self, x):
        """Return ``A @ x``; numpy-vectorized in the float domain."""
        if self.domain == domains.FLOAT:
            x = np.asarray(x, dtype=np.float64)
            if self._row_ids is None:
                self._row_ids = np.repeat(
                    np.arange(self.row_count, dtype=np.int64), np.diff(self.row_offsets)
                )
            if self.n_entries == 0:
                return np.zeros(self.row_count)
            return np.bincount(
                self._row_ids, weights=self.values * x[self.col_indices], minlength=self.row_count
            )
        out = []
        for r in range(self.row_count):
            acc = domains.zero(self.domain)
            for col, val in self.row(r):
                acc = acc + val * x[col]
            out.append(acc)
        return out

    def to_dense(self):
        """Dense row-major list of lists (test helper)."""
        zero = domains.zero(self.domain)
        dense = [[zero for _ in range(self.column_count)] for _ in range(self.row_count)]
        for r in range(self.row_count):
            for col, val in self.row(r):
                dense[r][col] = val
        return dense

    def map_values(self, fn, domain=None):
        """New matrix with ``fn`` applied to every stored value; drops zeros."""
        domain = domain or self.domain
        triplets = []
        for r in range(self.row_count):
            for col, val in self.row(r):
                triplets.append((r, col, fn(val)))
        return from_triplets(self.row_count, triplets, columns=self.column_count, domain=domain)

    def pattern(self):
        """Set of (row, col) positions with stored entries."""
        out = set()
        for r in range(self.row_count):
            lo, hi = self.row_offsets[r], self.row_offsets[r + 1]
            for k in range(lo, hi):
                out.add((r, int(self.col_indices[k])))
        return out

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        if (self.row_count, self.column_count, self.domain) != (
            other.row_count,
            other.column_count,
            other.domain,
        ):
            return False
        if not np.array_equal(self.row_offsets, other.row_offsets):
            return False
        if not np.array_equal(self.col_indices, other.col_indices):
            return False
        return all(a == b for a, b in zip(self.values, other.values))

    def __repr__(self):
        return (
            f"SparseMatrix({self.row_count}x{self.column_count}, "
            f"{self.n_entries} entries, {self.domain})"
        )


def from_triplets(rows, entries, columns=None, domain=domains.EXACT) -> SparseMatrix:
    """Build a canonical matrix from (row, col, value) triplets.

    Duplicates within a row are summed, zeros dropped, columns sorted.
    Raises :class:`ModelError` on out-of-bounds indices.
    """
    columns = rows if columns is None else columns
    per_row: list[dict] = [dict() for _ in range(rows)]
    for row, col, val in entries:
        if not 0 <= row < rows:
            raise ModelError(f"row index {row} out of bounds [0, {rows})")
        if not 0 <= col < columns:
            raise ModelError(f"column index {col} out of bounds [0, {columns})")
        if domain == domains.FLOAT:
            val = float(val)
        else:
            val = domains.convert(val, domain) if not _in_domain(val, domain) else val
        bucket = per_row[row]
        if col in bucket:
            bucket[col] = bucket[col] + val
        else:
            bucket[col] = val
    offsets = [0]
    cols: list[int] = []
    values: list = []
    for bucket in per_row:
        for col in sorted(bucket):
            val = bucket[col]
            if domains.is_zero(val):
                continue
            cols.append(col)
            values.append(val)
        offsets.append(len(cols))
    return SparseMatrix(rows, columns, offsets, cols, values, domain)


def _in_domain(val, domain) -> bool:
    from .ratfunc import RationalFunction

    if domain == domains.EXACT:
        return isinstance(val, Fraction)
    if domain == domains.PARAMETRIC:
        return isinstance(val, RationalFunction)
    return False


def backward_edges(matrix: SparseMatrix) -> list[list[int]]:
    """Structural transpose of the non-zero pattern: column -> rows hitting it.

    Row lists are ascending; values are not carried.
    """
    preds: list[list[int]] = [[] for _ in range(matrix.column_count)]
    for r in range(matrix.row_count):
        lo, hi = matrix.row_offsets[r], matrix.row_offsets[r + 1]
        for k in range(lo, hi):
            preds[int(matrix.col_indices[k])].append(r)
    return preds
