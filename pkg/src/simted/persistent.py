"""A persistent segment tree of segment trees for the range operation model.

The matrix starts at minus infinity everywhere and is only ever changed by
``rangemax(i', j', x)``, so every entry is the largest ``x`` among the
recorded corners ``(i', j', x)`` with ``i <= i'`` and ``j >= j'``.  Corners
are stored in an outer tree over ``i'`` whose nodes hold inner trees over
``j'``; each update copies the ``O(log n log m)`` nodes on its paths and
shares everything else with the previous version.

This backend answers one question at a time with polylogarithmic work.
:class:`~simted.monotone.MonotoneMatrix` answers the same questions over a
dense snapshot and is what the algorithms use; the two are checked against
each other by replaying random operation sequences.
"""

from __future__ import annotations

from typing import NamedTuple, Optional

from .monotone import NEG_INF


class _Inner(NamedTuple):
    left: Optional["_Inner"]
    right: Optional["_Inner"]
    best: float


class _Outer(NamedTuple):
    left: Optional["_Outer"]
    right: Optional["_Outer"]
    inner: Optional[_Inner]


def _inner_insert(node, lo, hi, pos, x):
    best = x if node is None else max(node.best, x)
    if lo == hi:
        return _Inner(None, None, best)
    mid = (lo + hi) // 2
    left = node.left if node else None
    right = node.right if node else None
    if pos <= mid:
        left = _inner_insert(left, lo, mid, pos, x)
    else:
        right = _inner_insert(right, mid + 1, hi, pos, x)
    return _Inner(left, right, best)


def _inner_prefix_max(node, lo, hi, j):
    """Largest value stored at a column ``<= j``."""
    best = NEG_INF
    while node is not None:
        if hi <= j:
            return max(best, node.best)
        mid = (lo + hi) // 2
        if j <= mid:
            node, hi = node.left, mid
        else:
            if node.left is not None:
                best = max(best, node.left.best)
            node, lo = node.right, mid + 1
    return best


class PersistentMonotoneMatrix:
    """Immutable handle on one version; updates return new handles."""

    __slots__ = ("n_rows", "n_cols", "_root")

    def __init__(self, n_rows: int, n_cols: int, root: Optional[_Outer] = None):
        if n_rows < 1 or n_cols < 1:
            raise ValueError("dimensions must be positive")
        self.n_rows, self.n_cols, self._root = n_rows, n_cols, root

    @classmethod
    def neg_inf(cls, n: int, m: int) -> "PersistentMonotoneMatrix":
        return cls(n, m)

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_rows, self.n_cols

    def _check(self, i: int, j: int) -> None:
        if not 1 <= i <= self.n_rows:
            raise IndexError(f"row {i} outside 1..{self.n_rows}")
        if not 1 <= j <= self.n_cols:
            raise IndexError(f"column {j} outside 1..{self.n_cols}")

    def rangemax(self, i: int, j: int, x) -> "PersistentMonotoneMatrix":
        """Raise rows ``1..i`` and columns ``j..m`` to at least ``x``."""
        self._check(i, j)
        if x == NEG_INF:
            return self
        m = self.n_cols

        def insert(node, lo, hi):
            inner = _inner_insert(node.inner if node else None, 1, m, j, x)
            if lo == hi:
                return _Outer(None, None, inner)
            mid = (lo + hi) // 2
            left = node.left if node else None
            right = node.right if node else None
            if i <= mid:
                left = insert(left, lo, mid)
            else:
                right = insert(right, mid + 1, hi)
            return _Outer(left, right, inner)

        return PersistentMonotoneMatrix(self.n_rows, m, insert(self._root, 1, self.n_rows))

    def get(self, i: int, j: int):
        """Largest corner value with row ``>= i`` and column ``<= j``."""
        self._check(i, j)
        best = NEG_INF
        node, lo, hi = self._root, 1, self.n_rows
        m = self.n_cols
        while node is not None:
            if lo >= i:
                return max(best, _inner_prefix_max(node.inner, 1, m, j))
            mid = (lo + hi) // 2
            if i > mid:
                node, lo = node.right, mid + 1
            else:
                if node.right is not None:
                    best = max(best, _inner_prefix_max(node.right.inner, 1, m, j))
                node, hi = node.left, mid
        return best

    def mincol(self, i: int, x) -> int:
        """Smallest ``j`` with ``A[i, j] >= x``; 1 when there is none."""
        self._check(i, 1)
        lo, hi = 1, self.n_cols
        if self.get(i, hi) < x:
            return 1
        while lo < hi:
            mid = (lo + hi) // 2
            if self.get(i, mid) >= x:
                hi = mid
            else:
                lo = mid + 1
        return lo

    def maxrow(self, j: int, x) -> int:
        """Largest ``i`` with ``A[i, j] >= x``; 1 when there is none."""
        self._check(1, j)
        lo, hi = 1, self.n_rows
        if self.get(lo, j) < x:
            return 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.get(mid, j) >= x:
                lo = mid
            else:
                hi = mid - 1
        return lo

    def to_rows(self) -> list[list]:
        return [[self.get(i, j) for j in range(1, self.n_cols + 1)]
                for i in range(1, self.n_rows + 1)]
