"""Ground-truth computations used to check the fast algorithms.

Nothing here is clever: a textbook Zhang-Shasha dynamic program, an
exhaustive search over mappings, and similarity matrices filled one cell at
a time.  Exhaustive searches refuse inputs above a node cap
(``TED_ORACLE_CAP`` in the environment overrides the default).
"""

from __future__ import annotations

import os
from itertools import product

import numpy as np

from .forest import VIRTUAL_ROOT, Forest, SubforestRef, subforest_nodes
from .monotone import NEG, NEG_INF, MonotoneMatrix

BRUTE_FORCE_CAP = 16
NAIVE_MATRIX_CAP = 30


class OracleCapExceeded(ValueError):
    pass


def _cap(default: int) -> int:
    return int(os.environ.get("TED_ORACLE_CAP", default))


# -- Zhang-Shasha ----------------------------------------------------------

def _postorder(forest: Forest) -> tuple[list[int], list[int], list[int]]:
    """Postorder tables of the forest plus a virtual root placed last.

    Returns ``(nodes, leftmost, keyroots)`` where ``nodes[k]`` is the forest
    node at postorder position ``k`` (1-based, 0 for the virtual root) and
    ``leftmost[k]`` the position of its leftmost leaf descendant.
    """
    order: list[int] = []
    stack = [(VIRTUAL_ROOT, False)]
    while stack:
        u, done = stack.pop()
        if done:
            order.append(u)
        else:
            stack.append((u, True))
            stack.extend((c, False) for c in reversed(forest.children[u]))
    pos = {u: k for k, u in enumerate(order, start=1)}
    nodes = [0] + order
    leftmost = [0] * len(nodes)
    for k, u in enumerate(order, start=1):
        kids = forest.children[u]
        leftmost[k] = leftmost[pos[kids[0]]] if kids else k
    seen = set()
    keyroots = []
    for k in range(len(order), 0, -1):
        if leftmost[k] not in seen:
            seen.add(leftmost[k])
            keyroots.append(k)
    keyroots.reverse()
    return nodes, leftmost, keyroots


def _zs_core(f1: Forest, f2: Forest, relabel, mn):
    """Zhang-Shasha over the two forests with virtual roots.

    ``relabel(u, v)`` gives the relabel cost of forest nodes ``u`` and ``v``
    (0 stands for a virtual root) and ``mn`` is a two-argument minimum, so
    the same code runs on ints or on numpy arrays of costs.
    """
    nodes1, lm1, kr1 = _postorder(f1)
    nodes2, lm2, kr2 = _postorder(f2)
    n1, n2 = len(nodes1) - 1, len(nodes2) - 1
    td = [[None] * (n2 + 1) for _ in range(n1 + 1)]
    for i in kr1:
        for j in kr2:
            li, lj = lm1[i], lm2[j]
            rows, cols = i - li + 2, j - lj + 2
            fd = [[0] * cols for _ in range(rows)]
            for x in range(1, rows):
                fd[x][0] = fd[x - 1][0] + 1
            for y in range(1, cols):
                fd[0][y] = fd[0][y - 1] + 1
            for x in range(1, rows):
                px = li + x - 1
                for y in range(1, cols):
                    py = lj + y - 1
                    best = mn(fd[x - 1][y] + 1, fd[x][y - 1] + 1)
                    if lm1[px] == li and lm2[py] == lj:
                        best = mn(best, fd[x - 1][y - 1] + relabel(nodes1[px], nodes2[py]))
                        td[px][py] = best
                    else:
                        best = mn(best, fd[lm1[px] - li][lm2[py] - lj] + td[px][py])
                    fd[x][y] = best
    return td[n1][n2]


def zhang_shasha_ed(f1: Forest, f2: Forest) -> int:
    """Unit-cost tree edit distance by the Zhang-Shasha recursion."""
    if f1.n == 0 or f2.n == 0:
        return f1.n + f2.n
    lab1, lab2 = f1.label, f2.label

    def relabel(u, v):
        if u == VIRTUAL_ROOT or v == VIRTUAL_ROOT:
            return 0 if u == v else 1
        return 0 if lab1[u] == lab2[v] else 1

    return _zs_core(f1, f2, relabel, min)


def zhang_shasha_sim_labelings(shape1: Forest, shape2: Forest,
                               alphabet: int = 2) -> np.ndarray:
    """Similarity for every labelling of two fixed shapes at once.

    Entry ``[a, b]`` belongs to the labelling whose node labels are the
    base-``alphabet`` digits of ``a`` (for ``shape1``, node 1 most
    significant) and ``b`` (for ``shape2``).
    """
    lab1 = _labelings(shape1.n, alphabet)
    lab2 = _labelings(shape2.n, alphabet)
    n1, n2 = shape1.n, shape2.n
    if n1 == 0 or n2 == 0:
        return np.zeros((len(lab1), len(lab2)), dtype=np.int64)

    def relabel(u, v):
        if u == VIRTUAL_ROOT or v == VIRTUAL_ROOT:
            return 0 if u == v else 1
        return (lab1[:, u - 1, None] != lab2[None, :, v - 1]).astype(np.int64)

    ed = _zs_core(shape1, shape2, relabel, np.minimum)
    return n1 + n2 - np.broadcast_to(ed, (len(lab1), len(lab2)))


def _labelings(n: int, alphabet: int) -> np.ndarray:
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.array(list(product(range(alphabet), repeat=n)), dtype=np.int64)


def sim_ed_convert(value: int, n1: int, n2: int) -> int:
    """Map a similarity to the edit distance or back; the map is its own inverse."""
    if not 0 <= value <= n1 + n2:
        raise ValueError(f"{value} outside [0, {n1 + n2}]")
    return n1 + n2 - value


# -- exhaustive mapping search -------------------------------------------

def _ancestry(forest: Forest) -> list[list[bool]]:
    n = forest.n
    return [[forest.is_ancestor(u, v) if u and v else False for v in range(n + 1)]
            for u in range(n + 1)]


def enumerate_mappings(f1: Forest, f2: Forest, force_mapped: int | None = None):
    """Yield every valid mapping as a tuple of ``(u, v)`` pairs.

    Pairs come out in preorder of ``f1``; a valid mapping is increasing in
    both preorders, so it suffices to check ancestry agreement with the
    pairs already chosen.
    """
    anc1, anc2 = _ancestry(f1), _ancestry(f2)
    n1, n2 = f1.n, f2.n
    pairs: list[tuple[int, int]] = []

    def rec(u, last_v):
        if u > n1:
            if force_mapped is None or any(a == force_mapped for a, _ in pairs):
                yield tuple(pairs)
            return
        yield from rec(u + 1, last_v)
        for v in range(last_v + 1, n2 + 1):
            if all(anc1[a][u] == anc2[b][v] for a, b in pairs):
                pairs.append((u, v))
                yield from rec(u + 1, v)
                pairs.pop()

    yield from rec(1, 0)


def mapping_weight(f1: Forest, f2: Forest, mapping) -> int:
    return sum(2 - (f1.label[u] != f2.label[v]) for u, v in mapping)


def brute_force_sim(f1: Forest, f2: Forest, cap: int | None = None,
                    force_mapped: int | None = None) -> int | float:
    """Maximum mapping weight by exhaustive enumeration.

    With ``force_mapped`` only mappings that use that node of ``f1`` count;
    the result is minus infinity when there are none.
    """
    cap = _cap(BRUTE_FORCE_CAP) if cap is None else cap
    if f1.n + f2.n > cap:
        raise OracleCapExceeded(f"{f1.n} + {f2.n} nodes exceeds the cap of {cap}")
    best = NEG_INF if force_mapped is not None else 0
    for mapping in enumerate_mappings(f1, f2, force_mapped):
        best = max(best, mapping_weight(f1, f2, mapping))
    return best


def brute_force_sim_labelings(shape1: Forest, shape2: Forest,
                              alphabet: int = 2) -> np.ndarray:
    """Exhaustive mapping maximum for every labelling of two shapes.

    Same layout as :func:`zhang_shasha_sim_labelings`.  Mappings depend
    only on shape, so they are enumerated once and scored against all
    labellings with one matrix product.
    """
    if shape1.n + shape2.n > _cap(BRUTE_FORCE_CAP):
        raise OracleCapExceeded("shape pair exceeds the brute-force cap")
    n1, n2 = shape1.n, shape2.n
    lab1, lab2 = _labelings(n1, alphabet), _labelings(n2, alphabet)
    maps = list(enumerate_mappings(shape1, shape2))
    incidence = np.zeros((len(maps), max(1, n1 * n2)), dtype=np.int64)
    for k, mapping in enumerate(maps):
        for u, v in mapping:
            incidence[k, (u - 1) * n2 + (v - 1)] = 1
    if n1 == 0 or n2 == 0:
        return np.zeros((len(lab1), len(lab2)), dtype=np.int64)
    mismatch = (lab1[:, :, None, None] != lab2[None, None, :, :])
    # (n1, n2, labellings1, labellings2) -> (n1*n2, labellings1*labellings2)
    mismatch = mismatch.transpose(1, 3, 0, 2).reshape(n1 * n2, -1).astype(np.int64)
    weights = 2 * incidence.sum(axis=1, keepdims=True) - incidence @ mismatch
    return weights.max(axis=0).reshape(len(lab1), len(lab2))


# -- naive similarity matrices -------------------------------------------

def induced_forest(forest: Forest, nodes) -> Forest:
    """The forest left after removing every node not in ``nodes``."""
    keep = sorted(nodes)
    keep_set = set(keep)

    def nearest_kept_ancestor(u):
        p = forest.parent[u]
        while p != VIRTUAL_ROOT and p not in keep_set:
            p = forest.parent[p]
        return p

    kids: dict[int, list[int]] = {VIRTUAL_ROOT: []}
    for u in keep:
        kids[u] = []
        kids[nearest_kept_ancestor(u)].append(u)

    def nest(u):
        return forest.label[u], [nest(c) for c in kids[u]]

    return Forest.from_nested([nest(c) for c in kids[VIRTUAL_ROOT]])


def similarity_matrix_naive(f: Forest, t2: Forest, cap: int | None = None) -> MonotoneMatrix:
    """``s[i, j] = sim(f, t2[i, j))`` one cell at a time via Zhang-Shasha."""
    cap = NAIVE_MATRIX_CAP if cap is None else cap
    if t2.n > cap:
        raise OracleCapExceeded(f"|T2| = {t2.n} exceeds the cap of {cap}")
    size = 2 * t2.n + 1
    out = np.full((size, size), NEG, dtype=np.int64)
    cache: dict[frozenset, int] = {}
    for i in range(1, size + 1):
        for j in range(i, size + 1):
            key = frozenset(subforest_nodes(t2, SubforestRef(i, j)))
            if key not in cache:
                window = induced_forest(t2, key)
                cache[key] = f.n + window.n - zhang_shasha_ed(f, window)
            out[i - 1, j - 1] = cache[key]
    return MonotoneMatrix(out)


def restricted_matrix_naive(tree: Forest, t2: Forest, cap: int | None = None) -> MonotoneMatrix:
    """Similarity matrix of a tree whose root is forced to be mapped.

    ``s[i, j]`` is the best over ``v`` in ``t2[i, j)`` of
    ``sim(tree - root, sub(v) - v) + eta(root, v)``, minus infinity when
    the window is empty or ``i > j``.
    """
    cap = NAIVE_MATRIX_CAP if cap is None else cap
    if t2.n > cap:
        raise OracleCapExceeded(f"|T2| = {t2.n} exceeds the cap of {cap}")
    if len(tree.roots) != 1:
        raise ValueError("restricted similarity needs a single tree")
    root = tree.roots[0]
    below = induced_forest(tree, range(root + 1, tree.n + 1))
    size = 2 * t2.n + 1
    l2, r2 = t2.bi.l, t2.bi.r
    best_at = {}
    for v in range(1, t2.n + 1):
        inner = induced_forest(t2, range(v + 1, v + t2.size[v]))
        sim = below.n + inner.n - zhang_shasha_ed(below, inner)
        best_at[v] = sim + 2 - (tree.label[root] != t2.label[v])
    out = np.full((size, size), NEG, dtype=np.int64)
    for i in range(1, size + 1):
        for j in range(i, size + 1):
            vals = [best_at[v] for v in best_at if i <= l2[v] and r2[v] <= j]
            if vals:
                out[i - 1, j - 1] = max(vals)
    return MonotoneMatrix(out)
