"""Row-monotone, column-monotone matrices under the range operation model.

A :class:`MonotoneMatrix` is an immutable snapshot.  Every update returns a
new snapshot and leaves its parent queryable.  Entries are non-negative or
negative integers or minus infinity; rows are non-decreasing left to right
and columns non-increasing top to bottom.

Indices in the public API are 1-based.  Besides the scalar operations the
class offers ``*_many`` variants taking numpy index arrays.  They answer
exactly the same questions, one per array element, and are what the
algorithms use in their inner loops.

Internally minus infinity is the int64 sentinel :data:`NEG`; anything below
:data:`NEG_CUT` is treated as minus infinity after arithmetic, so sums of up
to seven terms saturate correctly.
"""

from __future__ import annotations

import math

import numpy as np

NEG_INF = -math.inf
NEG = np.int64(-(1 << 60))
NEG_CUT = np.int64(-(1 << 59))


def to_internal(x) -> np.int64:
    return NEG if x == NEG_INF else np.int64(x)


def to_public(x):
    return NEG_INF if x <= NEG_CUT else int(x)


def saturate(a: np.ndarray) -> np.ndarray:
    """Clamp every sentinel-derived value back to :data:`NEG`, in place."""
    a[a <= NEG_CUT] = NEG
    return a


def _first_true(pred, size: int, count: int) -> np.ndarray:
    """Vectorised binary search: smallest ``p`` in ``[0, size]`` with ``pred(p)``.

    ``pred`` must be monotone (false...false true...true) per query and is
    called with an index array clipped to ``[0, size - 1]``.
    """
    lo = np.zeros(count, dtype=np.int64)
    hi = np.full(count, size, dtype=np.int64)
    for _ in range(max(1, size.bit_length())):
        active = lo < hi
        if not active.any():
            break
        mid = (lo + hi) >> 1
        cond = pred(np.minimum(mid, size - 1))
        hi = np.where(active & cond, mid, hi)
        lo = np.where(active & ~cond, mid + 1, lo)
    return lo


class MonotoneMatrix:
    """Persistent snapshot of an ``n_rows x n_cols`` monotone matrix."""

    __slots__ = ("_a",)

    def __init__(self, data: np.ndarray):
        data = np.asarray(data, dtype=np.int64)
        if data.ndim != 2 or 0 in data.shape:
            raise ValueError(f"need a non-empty 2-D array, got shape {data.shape}")
        if data.flags.writeable:
            data = data.copy()
            data.flags.writeable = False
        self._a = data

    @classmethod
    def _wrap(cls, a: np.ndarray) -> "MonotoneMatrix":
        """Adopt a freshly built array without copying it."""
        a.flags.writeable = False
        obj = cls.__new__(cls)
        obj._a = a
        return obj

    @classmethod
    def neg_inf(cls, n: int, m: int) -> "MonotoneMatrix":
        if n < 1 or m < 1:
            raise ValueError("dimensions must be positive")
        return cls._wrap(np.full((n, m), NEG, dtype=np.int64))

    @classmethod
    def from_rows(cls, rows, check: bool = True) -> "MonotoneMatrix":
        """Build from nested lists that may contain ``-math.inf``."""
        a = np.array([[to_internal(x) for x in row] for row in rows], dtype=np.int64)
        mat = cls(a)
        if check and not mat.is_monotone():
            raise ValueError("matrix is not row- and column-monotone")
        return mat

    @classmethod
    def from_dense(cls, a: np.ndarray, check: bool = False) -> "MonotoneMatrix":
        mat = cls._wrap(saturate(np.array(a, dtype=np.int64)))
        if check and not mat.is_monotone():
            raise ValueError("matrix is not row- and column-monotone")
        return mat

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    @property
    def n_rows(self) -> int:
        return self._a.shape[0]

    @property
    def n_cols(self) -> int:
        return self._a.shape[1]

    @property
    def array(self) -> np.ndarray:
        """Read-only view of the internal int64 array (``NEG`` = minus infinity)."""
        return self._a

    def to_rows(self) -> list[list]:
        return [[to_public(x) for x in row] for row in self._a]

    def __eq__(self, other) -> bool:
        return isinstance(other, MonotoneMatrix) and np.array_equal(self._a, other._a)

    __hash__ = None

    def __repr__(self) -> str:
        return f"MonotoneMatrix(shape={self.shape})"

    def is_monotone(self) -> bool:
        a = self._a
        return bool((a[:, 1:] >= a[:, :-1]).all() and (a[1:, :] <= a[:-1, :]).all())

    def _check_row(self, i: int) -> None:
        if not 1 <= i <= self._a.shape[0]:
            raise IndexError(f"row {i} outside 1..{self._a.shape[0]}")

    def _check_col(self, j: int) -> None:
        if not 1 <= j <= self._a.shape[1]:
            raise IndexError(f"column {j} outside 1..{self._a.shape[1]}")

    # -- scalar operations ------------------------------------------------

    def get(self, i: int, j: int):
        self._check_row(i)
        self._check_col(j)
        return to_public(self._a[i - 1, j - 1])

    def mincol(self, i: int, x) -> int:
        """Smallest ``j`` with ``A[i, j] >= x``; 1 when there is none."""
        self._check_row(i)
        row = self._a[i - 1]
        j = int(np.searchsorted(row, to_internal(x), side="left"))
        return j + 1 if j < len(row) else 1

    def maxrow(self, j: int, x) -> int:
        """Largest ``i`` with ``A[i, j] >= x``; 1 when there is none."""
        self._check_col(j)
        col = self._a[::-1, j - 1]
        below = int(np.searchsorted(col, to_internal(x), side="left"))
        count = len(col) - below
        return count if count > 0 else 1

    def rangemax(self, i: int, j: int, x) -> "MonotoneMatrix":
        """Raise every entry in rows ``1..i`` and columns ``j..m`` to at least ``x``."""
        self._check_row(i)
        self._check_col(j)
        x = to_internal(x)
        if x == NEG:
            return self
        a = self._a.copy()
        block = a[:i, j - 1:]
        np.maximum(block, x, out=block)
        return MonotoneMatrix._wrap(a)

    # -- batched operations -----------------------------------------------

    def get_many(self, rows, cols) -> np.ndarray:
        return self._a[np.asarray(rows) - 1, np.asarray(cols) - 1]

    def mincol_many(self, rows, xs) -> np.ndarray:
        rows, xs = np.broadcast_arrays(np.asarray(rows, dtype=np.int64),
                                       np.asarray(xs, dtype=np.int64))
        rows0, xs = rows.ravel() - 1, xs.ravel()
        m = self._a.shape[1]
        a = self._a
        j = _first_true(lambda c: a[rows0, c] >= xs, m, rows0.size)
        j = np.where(j < m, j + 1, 1)
        return j.reshape(rows.shape)

    def maxrow_many(self, cols, xs) -> np.ndarray:
        cols, xs = np.broadcast_arrays(np.asarray(cols, dtype=np.int64),
                                       np.asarray(xs, dtype=np.int64))
        cols0, xs = cols.ravel() - 1, xs.ravel()
        n = self._a.shape[0]
        a = self._a
        count = _first_true(lambda r: a[r, cols0] < xs, n, cols0.size)
        count = np.where(count > 0, count, 1)
        return count.reshape(cols.shape)

    def rangemax_many(self, rows, cols, values) -> "MonotoneMatrix":
        """Fold :meth:`rangemax` over many ``(i, j, x)`` triples at once.

        ``max`` is commutative, so the result does not depend on order; it is
        computed as the dominance maximum of the triples, merged into a copy.
        """
        values = np.asarray(values, dtype=np.int64).ravel()
        keep = values > NEG_CUT
        if not keep.any():
            return self
        rows0 = np.asarray(rows, dtype=np.int64).ravel()[keep] - 1
        cols0 = np.asarray(cols, dtype=np.int64).ravel()[keep] - 1
        n, m = self._a.shape
        if rows0.min() < 0 or rows0.max() >= n or cols0.min() < 0 or cols0.max() >= m:
            raise IndexError("rangemax corner out of range")
        grid = np.full((n, m), NEG, dtype=np.int64)
        np.maximum.at(grid, (rows0, cols0), values[keep])
        grid = np.maximum.accumulate(grid[::-1], axis=0)[::-1]
        grid = np.maximum.accumulate(grid, axis=1)
        np.maximum(grid, self._a, out=grid)
        return MonotoneMatrix._wrap(grid)

    def maximum(self, other: "MonotoneMatrix") -> "MonotoneMatrix":
        return MonotoneMatrix._wrap(np.maximum(self._a, other._a))

    def anti_transpose(self) -> "MonotoneMatrix":
        """Reflect across the anti-diagonal; keeps both monotonicities.

        ``(A * B)`` reflected equals ``B`` reflected times ``A`` reflected,
        which lets a product be evaluated with its operands swapped.
        """
        return MonotoneMatrix(np.ascontiguousarray(self._a[::-1, ::-1].T))

    def submatrix(self, r0: int, r1: int, c0: int, c1: int) -> "MonotoneMatrix":
        """Rows ``r0..r1`` and columns ``c0..c1`` (1-based, inclusive)."""
        return MonotoneMatrix(self._a[r0 - 1:r1, c0 - 1:c1])


def new_neg_inf(n: int, m: int) -> MonotoneMatrix:
    return MonotoneMatrix.neg_inf(n, m)


def rangemax(a: MonotoneMatrix, i: int, j: int, x) -> MonotoneMatrix:
    return a.rangemax(i, j, x)


def get(a: MonotoneMatrix, i: int, j: int):
    return a.get(i, j)


def mincol(a: MonotoneMatrix, i: int, x) -> int:
    return a.mincol(i, x)


def maxrow(a: MonotoneMatrix, j: int, x) -> int:
    return a.maxrow(j, x)
