"""Max-plus products for monotone and bounded-difference matrices.

All functions here work on int64 arrays in which :data:`~simted.monotone.NEG`
stands for minus infinity, or on :class:`~simted.monotone.MonotoneMatrix`
snapshots wrapping such arrays.

* :func:`naive_maxplus` is the plain definition and serves as the oracle.
* :func:`mul1` multiplies two monotone matrices whose finite entries lie in
  small ranges ``[0, m_a]`` and ``[0, m_b]`` with about ``n * m_a * m_b``
  threshold lookups.
* :func:`mul2` computes ``max(C', A * B)`` when ``A`` is fully finite with
  entries in ``[0, m]``.
* :func:`mul3` splits a block-upper-triangular product recursively, handing
  the off-diagonal quarter to :func:`mul2` and small diagonal blocks to a
  pluggable kernel for bounded-difference products.
* :func:`bounded_product` wraps :func:`mul3` for similarity-shaped inputs.
"""

from __future__ import annotations

from collections import Counter
from typing import Callable

import numpy as np

from .monotone import NEG, NEG_CUT, MonotoneMatrix, saturate

Kernel = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _dense(a) -> np.ndarray:
    if isinstance(a, MonotoneMatrix):
        return a.array
    return np.asarray(a, dtype=np.int64)


def _bump(stats: Counter | None, key: str, amount: int = 1) -> None:
    if stats is not None:
        stats[key] += amount


def naive_maxplus(a, b) -> np.ndarray:
    """``c[i, j] = max_k a[i, k] + b[k, j]`` by direct evaluation."""
    a, b = _dense(a), _dense(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ValueError(f"cannot multiply shapes {a.shape} and {b.shape}")
    c = np.full((a.shape[0], b.shape[1]), NEG, dtype=np.int64)
    for k in range(a.shape[1]):
        np.maximum(c, a[:, k, None] + b[None, k, :], out=c)
    return saturate(c)


def naive_kernel(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Default bounded-difference kernel: the definition, nothing more."""
    return naive_maxplus(a, b)


def broadcast_kernel(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Same contract as :func:`naive_kernel`, evaluated as one 3-D reduction."""
    a, b = _dense(a), _dense(b)
    return saturate((a[:, :, None] + b[None, :, :]).max(axis=1))


KERNELS: dict[str, Kernel] = {"naive": naive_kernel, "broadcast": broadcast_kernel}


def max_adjacent_difference(a) -> int:
    """Largest gap between horizontally or vertically adjacent finite entries."""
    a = _dense(a)
    best = 0
    for x, y in ((a[:-1], a[1:]), (a[:, :-1], a[:, 1:])):
        both = (x > NEG_CUT) & (y > NEG_CUT)
        if both.any():
            best = max(best, int(np.abs(x[both] - y[both]).max()))
    return best


def _triples_product(a: MonotoneMatrix, b: MonotoneMatrix, cols: np.ndarray,
                     xs: np.ndarray, ys: np.ndarray, start: MonotoneMatrix,
                     chunk: int) -> MonotoneMatrix:
    """Shared body of :func:`mul1` and :func:`mul2`.

    For every column ``j`` and each threshold pair ``(x, y)``, with ``x``
    taken from row ``j`` of ``xs``, looks up ``k = maxrow(b, j, x)`` and
    ``i = maxrow(a, k, y)`` and raises the result by ``a[i, k] + b[k, j]``
    on the block of rows ``1..i`` and columns ``j..``.
    """
    c = start
    av, bv = a.array, b.array
    for lo in range(0, len(cols), chunk):
        j = cols[lo:lo + chunk]
        k = b.maxrow_many(j[:, None], xs[lo:lo + chunk])
        i = a.maxrow_many(k[:, :, None], ys[None, None, :])
        vals = av[i - 1, k[:, :, None] - 1] + bv[k - 1, j[:, None] - 1][:, :, None]
        jj = np.broadcast_to(j[:, None, None], i.shape)
        c = c.rangemax_many(i, jj, saturate(vals))
    return c


def _chunk_size(per_column: int) -> int:
    return max(1, (1 << 20) // max(1, per_column))


def mul1(a: MonotoneMatrix, b: MonotoneMatrix, m_a: int, m_b: int,
         stats: Counter | None = None) -> MonotoneMatrix:
    """Max-plus product of two monotone matrices with small entry ranges.

    ``a`` must have finite entries in ``[0, m_a]`` and ``b`` in ``[0, m_b]``.
    Any product term that ends a run of equal values in its columns of both
    factors is reached by one of the ``n * (m_a + 1) * (m_b + 1)`` threshold
    pairs, and those terms suffice to determine every maximum.
    """
    n, inner = a.shape
    if inner != b.n_rows:
        raise ValueError(f"cannot multiply shapes {a.shape} and {b.shape}")
    m = b.n_cols
    cols = np.arange(1, m + 1, dtype=np.int64)
    xs = np.broadcast_to(np.arange(m_b + 1, dtype=np.int64), (m, m_b + 1))
    ys = np.arange(m_a + 1, dtype=np.int64)
    _bump(stats, "mul1_calls")
    _bump(stats, "mul1_iterations", m * (m_a + 1) * (m_b + 1))
    return _triples_product(a, b, cols, xs, ys, MonotoneMatrix.neg_inf(n, m),
                            _chunk_size((m_a + 1) * (m_b + 1)))


def mul2(a, b, c_prev, m: int, stats: Counter | None = None) -> MonotoneMatrix:
    """``max(c_prev, a * b)`` for a finite ``a`` with entries in ``[0, m]``.

    Only the ``m + 1`` largest thresholds of each column of ``b`` are tried:
    a term using a smaller ``b`` entry is beaten by the one through row 1.
    """
    a = a if isinstance(a, MonotoneMatrix) else MonotoneMatrix(_dense(a))
    b = b if isinstance(b, MonotoneMatrix) else MonotoneMatrix(_dense(b))
    c_prev = c_prev if isinstance(c_prev, MonotoneMatrix) else MonotoneMatrix(_dense(c_prev))
    l = a.n_rows
    if a.shape != (l, l) or b.n_rows != l or c_prev.shape != (l, b.n_cols):
        raise ValueError("mul2 needs a l x l, b and c_prev l x n")
    n = b.n_cols
    cols = np.arange(1, n + 1, dtype=np.int64)
    tops = b.array[0]
    xs = tops[:, None] - m + np.arange(m + 1, dtype=np.int64)[None, :]
    ys = np.arange(m + 1, dtype=np.int64)
    _bump(stats, "mul2_calls")
    _bump(stats, "mul2_iterations", n * (m + 1) * (m + 1))
    return _triples_product(a, b, cols, xs, ys, c_prev, _chunk_size((m + 1) ** 2))


def neg_inf_fill(a, w: int = 2) -> np.ndarray:
    """Replace the entries below the main diagonal by ``w * (j - i)``.

    For upper-triangular factors with zero diagonals and adjacent
    differences at most ``w`` this keeps the product on and above the
    diagonal unchanged and makes every entry finite.
    """
    a = _dense(a).copy()
    n, m = a.shape
    i, j = np.indices((n, m))
    below = i > j
    a[below] = w * (j[below] - i[below])
    return a


def _next_power_of_two(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


def pad_square(a: np.ndarray, size: int) -> np.ndarray:
    """Grow a square matrix to ``size`` by repeating its last row and column.

    Repeated rows and columns never create a new product value, so padding
    the left factor this way and the right factor with :func:`pad_rows` and
    cropping afterwards gives the same product.
    """
    n = a.shape[0]
    idx = np.minimum(np.arange(size), n - 1)
    return a[np.ix_(idx, idx)]


def pad_rows(b: np.ndarray, size: int) -> np.ndarray:
    idx = np.minimum(np.arange(size), b.shape[0] - 1)
    return b[idx]


def _kernel_blocks(a: np.ndarray, b: np.ndarray, kernel: Kernel,
                   stats: Counter | None) -> np.ndarray:
    """Run a square kernel over ``b`` one ``l``-wide column strip at a time."""
    l, n = b.shape
    out = np.empty((l, n), dtype=np.int64)
    for lo in range(0, n, l):
        strip = b[:, lo:lo + l]
        _bump(stats, "kernel_calls")
        out[:, lo:lo + l] = kernel(a, strip)
    return out


def mul3(a: np.ndarray, b: np.ndarray, cutoff: int, kernel: Kernel = naive_kernel,
         m: int | None = None, stats: Counter | None = None) -> np.ndarray:
    """Product of a filled ``l x l`` block-upper-triangular ``a`` and ``l x n`` ``b``.

    ``l`` must be a power of two.  Above the cutoff the product is split as
    ``[[D, E], [., F]] * [[G], [H]] = [[max(D*G, E*H)], [F*H]]`` where the
    lower-left quarter of ``a`` only ever loses to the diagonal term; ``E*H``
    is folded in with :func:`mul2` since ``E`` lies wholly above the
    diagonal and has entries in ``[0, m]``.
    """
    a, b = _dense(a), _dense(b)
    l = a.shape[0]
    if a.shape != (l, l) or b.shape[0] != l:
        raise ValueError(f"cannot multiply shapes {a.shape} and {b.shape}")
    if l & (l - 1):
        raise ValueError(f"block size {l} is not a power of two")
    if cutoff < 1:
        raise ValueError("cutoff must be positive")
    if m is None:
        m = int(np.triu(a).max()) if l > 1 else 0
    return _mul3(a, b, cutoff, kernel, m, stats)


def _mul3(a, b, cutoff, kernel, m, stats):
    l = a.shape[0]
    _bump(stats, "mul3_calls")
    if l <= cutoff:
        return _kernel_blocks(a, b, kernel, stats)
    h = l // 2
    d, e, f = a[:h, :h], a[:h, h:], a[h:, h:]
    g, hh = b[:h], b[h:]
    up = _mul3(d, g, cutoff, kernel, m, stats)
    up = mul2(MonotoneMatrix(e), MonotoneMatrix(hh), MonotoneMatrix(up), m, stats).array
    down = _mul3(f, hh, cutoff, kernel, m, stats)
    return np.vstack([up, down])


def default_cutoff(m: int) -> int:
    return max(1, round(max(m, 1) ** 1.0963))


def bounded_product(a: MonotoneMatrix, b: MonotoneMatrix, m: int,
                    kernel: Kernel = naive_kernel, cutoff: int | None = None,
                    w: int = 2, stats: Counter | None = None) -> MonotoneMatrix:
    """``a * b`` for square upper-triangular factors with zero diagonals.

    Both factors must have adjacent differences at most ``w`` above the
    diagonal, and ``a`` must have entries in ``[0, m]``.  The factors are
    filled below the diagonal, padded to a power of two, multiplied with
    :func:`mul3` and cropped; minus infinity is restored below the diagonal.
    """
    n = a.n_rows
    if a.shape != (n, n) or b.shape != (n, n):
        raise ValueError("bounded_product needs two square matrices of equal size")
    if (np.diagonal(a.array) != 0).any() or (np.diagonal(b.array) != 0).any():
        raise ValueError("factors must have a zero main diagonal")
    size = _next_power_of_two(n)
    af = pad_square(neg_inf_fill(a, w), size)
    bf = pad_rows(neg_inf_fill(b, w), size)
    cutoff = default_cutoff(m) if cutoff is None else cutoff
    _bump(stats, "bounded_products")
    c = mul3(af, bf, cutoff, kernel, m, stats)[:n]
    c[np.tril_indices(n, -1)] = NEG
    return MonotoneMatrix.from_dense(c)
