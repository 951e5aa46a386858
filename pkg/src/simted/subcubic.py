"""Similarity matrices by block decomposition of the first forest.

The matrix ``S(F)`` of a synchronous subforest ``F`` is obtained in one of
two ways, chosen by :func:`plan_decomposition`:

* type 1: ``F`` splits into its first tree and the rest, both of at least
  ``delta`` nodes, and ``S(F)`` is their max-plus product, computed with
  :func:`~simted.maxplus.bounded_product`;
* type 2: a synchronous subforest ``F'`` with ``|F| - |F'|`` of order
  ``delta`` is peeled off and ``S(F)`` is rebuilt from ``S(F')`` along the
  spine, the path of nodes between the virtual roots of ``F`` and ``F'``.

A type 2 transition works bottom-up along the spine ``u_1 .. u_k``.  For
each ``u_x`` it builds the restricted matrix of ``sub(u_x)`` (the root of
``sub(u_x)`` must be mapped), either through ``F'`` when no deeper spine
node is mapped or through the restricted matrix of a deeper ``u_y``.  The
flanks ``l_i`` and ``r_i`` are the sibling subtrees left and right of the
spine at depth ``i``; their matrices come from the cubic algorithm.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .cubic import Target, empty_sim, product, roots_similarity
from .forest import VIRTUAL_ROOT, Forest, SyncSubforest
from .maxplus import Kernel, bounded_product, naive_kernel
from .monotone import NEG, NEG_CUT, MonotoneMatrix, saturate
from .path_max import PathMaxTree

TYPE1 = "type1"
TYPE2_FIRST = "type2_first"
TYPE2_SECOND = "type2_second"
TYPE2_BASE = "type2_base"


def default_delta(n2: int) -> int:
    return max(1, round(max(n2, 1) ** 0.4773))


# -- planning --------------------------------------------------------------

@dataclass(frozen=True)
class Step:
    """One transition of the plan.

    ``children`` index earlier steps: the two factors of a type 1 step, the
    inner forest of a non-base type 2 step.  ``inner`` is ``F'`` for type 2
    steps and the first tree for type 1 steps.
    """

    kind: str
    forest: SyncSubforest
    size: int
    inner: SyncSubforest | None
    inner_size: int
    children: tuple[int, ...]


@dataclass
class DecompositionPlan:
    delta: int
    steps: list[Step] = field(default_factory=list)

    @property
    def transitions(self) -> int:
        return len(self.steps)

    def counts(self) -> Counter:
        return Counter(step.kind for step in self.steps)


def _first_tree(s: SyncSubforest) -> SyncSubforest:
    return SyncSubforest(s.vroot, s.x, s.x)


def _last_tree(s: SyncSubforest) -> SyncSubforest:
    return SyncSubforest(s.vroot, s.y, s.y)


def _shrink_once(t1: Forest, s: SyncSubforest) -> SyncSubforest:
    """Remove the root of a single tree, else the smaller of the outer trees."""
    if s.x == s.y:
        c = t1.child(s.vroot, s.x)
        return SyncSubforest(c, 1, t1.degree(c))
    if t1.sync_size(_first_tree(s)) < t1.sync_size(_last_tree(s)):
        return SyncSubforest(s.vroot, s.x + 1, s.y)
    return SyncSubforest(s.vroot, s.x, s.y - 1)


def _decide(t1: Forest, s: SyncSubforest, delta: int):
    size = t1.sync_size(s)
    if s.x < s.y:
        left = t1.sync_size(_first_tree(s))
        right = t1.sync_size(_last_tree(s))
        if left >= delta and right >= delta:
            first = _first_tree(s)
            return TYPE1, first, [first, SyncSubforest(s.vroot, s.x + 1, s.y)]
    if size <= 3 * delta:
        return TYPE2_BASE, empty_inner(t1, s), []
    inner = s
    while True:
        nxt = _shrink_once(t1, inner)
        if size - t1.sync_size(nxt) > 2 * delta:
            break
        inner = nxt
    if inner == s:
        raise AssertionError("shrinking must remove at least one part")
    if (inner.x < inner.y
            and t1.sync_size(_first_tree(inner)) >= delta
            and t1.sync_size(_last_tree(inner)) >= delta):
        kind = TYPE2_SECOND
    else:
        kind = TYPE2_FIRST
    return kind, inner, [inner]


def empty_inner(t1: Forest, s: SyncSubforest) -> SyncSubforest:
    """An empty synchronous subforest of ``s``: no children below its leftmost leaf."""
    if s.is_empty:
        return s
    u = t1.child(s.vroot, s.x)
    while t1.degree(u):
        u = t1.child(u, 1)
    return SyncSubforest(u, 1, 0)


def whole(t1: Forest) -> SyncSubforest:
    return SyncSubforest(VIRTUAL_ROOT, 1, t1.degree(VIRTUAL_ROOT))


def plan_decomposition(t1: Forest, delta: int) -> DecompositionPlan:
    """Choose every transition used to compute ``S(t1)``, children first."""
    if delta < 1:
        raise ValueError("delta must be at least 1")
    plan = DecompositionPlan(delta)
    if t1.n == 0:
        return plan
    done: list[int] = []
    stack: list[tuple] = [(whole(t1), None)]
    while stack:
        s, decision = stack.pop()
        if decision is None:
            decision = _decide(t1, s, delta)
            stack.append((s, decision))
            for child in reversed(decision[2]):
                stack.append((child, None))
            continue
        kind, inner, kids = decision
        children = tuple(done[len(done) - len(kids):]) if kids else ()
        del done[len(done) - len(kids):]
        plan.steps.append(Step(kind, s, t1.sync_size(s), inner,
                               t1.sync_size(inner), children))
        done.append(len(plan.steps) - 1)
    return plan


# -- products --------------------------------------------------------------

def merge_product(a: MonotoneMatrix, size_a: int, b: MonotoneMatrix, size_b: int,
                  target: Target, kernel: Kernel = naive_kernel,
                  stats: Counter | None = None) -> MonotoneMatrix:
    """``S(A + B)`` with the bounded-difference product.

    The product wants its left factor to have the small entry range; when
    that is ``b``, both factors are reflected across the anti-diagonal,
    which reverses the order of a product.
    """
    if size_a == 0:
        return b
    if size_b == 0:
        return a
    m_a, m_b = target.bound(size_a), target.bound(size_b)
    if m_a <= m_b:
        return bounded_product(a, b, m_a, kernel, stats=stats)
    flipped = bounded_product(b.anti_transpose(), a.anti_transpose(), m_b,
                              kernel, stats=stats)
    return flipped.anti_transpose()


# -- the spine -------------------------------------------------------------

class Spine:
    """The path ``u_1 .. u_k`` from below ``vroot(F)`` down to ``vroot(F')``.

    ``left[i - 1]`` and ``right[i - 1]`` list the roots of the flanks
    ``l_i`` and ``r_i`` for ``i = 1 .. k + 1``.  Matrices of flank ranges
    ``l_{i,j} = l_i + ... + l_j`` and ``r_{i,j} = r_j + ... + r_i`` are
    built on demand, one chain per starting index.
    """

    def __init__(self, t1: Forest, outer: SyncSubforest, inner: SyncSubforest,
                 target: Target, stats: Counter | None = None):
        self.t1, self.target, self.stats = t1, target, stats
        self.outer, self.inner = outer, inner
        self.nodes, self.left, self.right = _spine_parts(t1, outer, inner)
        self.gap = t1.sync_size(outer) - t1.sync_size(inner)
        self._flank_cache: dict[tuple[str, int], tuple[MonotoneMatrix, int]] = {}
        self._chains: dict[tuple[str, int], list[tuple[MonotoneMatrix, int]]] = {}

    @property
    def k(self) -> int:
        return len(self.nodes)

    def node(self, x: int) -> int:
        """``u_x`` for ``1 <= x <= k``."""
        return self.nodes[x - 1]

    @property
    def thresholds(self) -> np.ndarray:
        """``0 .. 2 (|F| - |F'|)``."""
        return np.arange(2 * self.gap + 1, dtype=np.int64)

    def _flank(self, side: str, i: int) -> tuple[MonotoneMatrix, int]:
        key = (side, i)
        if key not in self._flank_cache:
            roots = (self.left if side == "l" else self.right)[i - 1]
            mat = roots_similarity(self.t1, roots, self.target, self.stats)
            self._flank_cache[key] = (mat, sum(self.t1.size[u] for u in roots))
        return self._flank_cache[key]

    def _chain(self, side: str, start: int) -> list[tuple[MonotoneMatrix, int]]:
        key = (side, start)
        if key not in self._chains:
            chain = [(empty_sim(self.target), 0)]
            for j in range(start, self.k + 2):
                acc, acc_size = chain[-1]
                mat, size = self._flank(side, j)
                if side == "l":
                    nxt = product(acc, acc_size, mat, size, self.target, self.stats)
                else:
                    nxt = product(mat, size, acc, acc_size, self.target, self.stats)
                chain.append((nxt, acc_size + size))
            self._chains[key] = chain
        return self._chains[key]

    def left_matrix(self, i: int, j: int) -> MonotoneMatrix:
        """``S(l_{i,j})``; ``j = i - 1`` gives the empty forest."""
        return self._chain("l", i)[j - i + 1][0]

    def right_matrix(self, i: int, j: int) -> MonotoneMatrix:
        """``S(r_{i,j})``; ``j = i - 1`` gives the empty forest."""
        return self._chain("r", i)[j - i + 1][0]

    def left_size(self, i: int, j: int) -> int:
        return self._chain("l", i)[j - i + 1][1]

    def right_size(self, i: int, j: int) -> int:
        return self._chain("r", i)[j - i + 1][1]

    def release(self, start: int) -> None:
        """Drop the chains that begin at ``start``."""
        self._chains.pop(("l", start), None)
        self._chains.pop(("r", start), None)


def _spine_parts(t1: Forest, outer: SyncSubforest, inner: SyncSubforest):
    """Spine nodes and flank root lists, after checking ``inner`` lies in ``outer``."""
    path = []
    u = inner.vroot
    while u != outer.vroot:
        if u == VIRTUAL_ROOT:
            raise ValueError("inner forest is not inside the outer forest")
        path.append(u)
        u = t1.parent[u]
    path.reverse()
    kids = t1.children
    if not path:
        if not (outer.x <= inner.x and inner.y <= outer.y and inner.x <= outer.y + 1):
            raise ValueError("inner child range is not inside the outer range")
        left = [list(kids[outer.vroot][outer.x - 1:inner.x - 1])]
        right = [list(kids[outer.vroot][inner.y:outer.y])]
        return [], left, right
    p = t1.child_pos[path[0]]
    if not outer.x <= p <= outer.y:
        raise ValueError("inner forest is not inside the outer forest")
    left = [list(kids[outer.vroot][outer.x - 1:p - 1])]
    right = [list(kids[outer.vroot][p:outer.y])]
    for parent, node in zip(path, path[1:]):
        q = t1.child_pos[node]
        left.append(list(kids[parent][:q - 1]))
        right.append(list(kids[parent][q:]))
    bottom = path[-1]
    left.append(list(kids[bottom][:inner.x - 1]))
    right.append(list(kids[bottom][inner.y:]))
    return path, left, right


# -- restricted matrices ---------------------------------------------------

class _Lifting:
    """Binary-lifting ancestor tables of the target, with window bounds.

    Slot 0 stands for the virtual root: its window ``[0, 2n + 2)`` contains
    everything, so searches that run out of real ancestors stop there.
    """

    def __init__(self, target: Target):
        f = target.forest
        n = f.n
        self.parent = np.array(f.parent, dtype=np.int64)
        self.parent[0] = 0
        self.l = np.concatenate([[0], target.l])
        self.r = np.concatenate([[target.size + 1], target.r])
        levels = max(1, (n + 1).bit_length())
        up = [self.parent]
        for _ in range(levels - 1):
            up.append(up[-1][up[-1]])
        self.up = up

    def deepest_proper_ancestor(self, start: np.ndarray, ok) -> np.ndarray:
        """Deepest proper ancestor of each start node satisfying ``ok``.

        ``ok(nodes, column)`` must hold on an upward-closed part of every
        root path; 0 means no real ancestor qualifies.
        """
        node = start.copy()
        for table in reversed(self.up):
            cand = table[node]
            move = (cand != 0) & ~ok(cand)
            node = np.where(move, cand, node)
        return self.parent[node]


def bottom_case(spine: Spine, x: int, s_inner: MonotoneMatrix) -> MonotoneMatrix:
    """Restricted matrix of ``sub(u_x)`` from mappings with no deeper spine node mapped.

    Maps ``u_x`` to ``v`` and splits ``sub(v) - v`` into a left part for
    ``l_{x+1,k+1}``, a middle part for ``F'`` and a right part for
    ``r_{x+1,k+1}``.  The split points run over the first column and last
    row where each flank reaches every threshold.
    """
    t = spine.target
    k = spine.k
    ts = spine.thresholds
    sl = spine.left_matrix(x + 1, k + 1)
    sr = spine.right_matrix(x + 1, k + 1)
    lv, rv = t.l[:, None], t.r[:, None]
    i = sl.mincol_many(lv + 1, ts[None, :])
    j = sr.maxrow_many(rv - 1, ts[None, :])
    left = sl.get_many(lv + 1, i)
    right = sr.get_many(j, rv - 1)
    mid = s_inner.get_many(i[:, :, None], j[:, None, :])
    eta = t.eta(spine.t1.label[spine.node(x)])
    total = eta[:, None, None] + left[:, :, None] + mid + right[:, None, :]
    if spine.stats is not None:
        spine.stats["bottom_iterations"] += total.size
    shape = total.shape
    return MonotoneMatrix.neg_inf(t.size, t.size).rangemax_many(
        np.broadcast_to(t.l[:, None, None], shape),
        np.broadcast_to(t.r[:, None, None], shape), saturate(total))


def middle_case(spine: Spine, x: int, restricted: dict[int, MonotoneMatrix],
                tree: PathMaxTree, lifting: _Lifting) -> np.ndarray:
    """Best mapping of ``sub(u_x) - u_x`` below each target node via a deeper mapped ``u_y``.

    Returns, for every target node ``v``, the largest value of
    ``s(l_{x+1,y})[l(v)+1, l(v')] + hat_y[l(v'), r(v')] + s(r_{x+1,y})[r(v'), r(v)-1]``
    over ``y > x`` and proper descendants ``v'`` of ``v``.  For fixed
    ``y`` and ``v'`` the flank terms only grow as ``v`` climbs, and they
    change exactly where ``v`` first leaves the window that some threshold
    allows; those nodes are found with threshold queries and binary
    lifting and handed to ``tree`` as root-path updates.
    """
    t = spine.target
    tree.reset()
    n = t.n
    vp = np.arange(1, n + 1, dtype=np.int64)
    lv, rv = t.l, t.r
    ts = spine.thresholds[1:]
    for y in range(x + 1, spine.k + 1):
        sl = spine.left_matrix(x + 1, y)
        sr = spine.right_matrix(x + 1, y)
        hat = restricted[y].get_many(lv, rv)
        starts = lifting.parent[vp]
        live = (hat > NEG_CUT) & (starts != 0)
        if not live.any():
            continue
        if len(ts):
            top = sl.get_many(np.ones_like(lv), lv)
            rows = sl.maxrow_many(lv[:, None], ts[None, :])
            lim_l = np.where(top[:, None] >= ts[None, :], rows - 1, -1)
            a = lifting.deepest_proper_ancestor(
                np.broadcast_to(vp[:, None], lim_l.shape).copy(),
                lambda c, lim=lim_l: lifting.l[c] <= lim)
            a = np.where(lim_l >= 0, a, 0)
            last = sr.get_many(rv, np.full_like(rv, t.size))
            cols = sr.mincol_many(rv[:, None], ts[None, :])
            lim_r = np.where(last[:, None] >= ts[None, :], cols + 1, t.size + 2)
            b = lifting.deepest_proper_ancestor(
                np.broadcast_to(vp[:, None], lim_r.shape).copy(),
                lambda c, lim=lim_r: lifting.r[c] >= lim)
            b = np.where(lim_r <= t.size + 1, b, 0)
            nodes = np.concatenate([starts[:, None], a, b], axis=1)
        else:
            nodes = starts[:, None]
        nodes = np.where(live[:, None], nodes, 0)
        safe = np.where(nodes == 0, 1, nodes)
        # Evaluate the split at each breakpoint; node 0 entries are dropped.
        rho = (hat[:, None]
               + sl.get_many(lifting.l[safe] + 1, lv[:, None])
               + sr.get_many(rv[:, None], lifting.r[safe] - 1))
        rho = np.where(nodes != 0, saturate(rho), NEG)
        if spine.stats is not None:
            spine.stats["middle_updates"] += int((nodes != 0).sum())
        tree.raise_to_root(nodes, rho)
    return tree.query_many(vp)


def middle_case_reference(spine: Spine, x: int, restricted: dict[int, MonotoneMatrix],
                          hat: MonotoneMatrix) -> MonotoneMatrix:
    """The same contribution by enumerating ``(v, z, w, y)`` directly.

    Slower by a factor of the threshold range; kept to cross-check
    :func:`middle_case`.
    """
    t = spine.target
    ts = spine.thresholds
    lv, rv = t.l[:, None], t.r[:, None]
    eta = t.eta(spine.t1.label[spine.node(x)])
    for y in range(x + 1, spine.k + 1):
        sl = spine.left_matrix(x + 1, y)
        sr = spine.right_matrix(x + 1, y)
        i = sl.mincol_many(lv + 1, ts[None, :])
        j = sr.maxrow_many(rv - 1, ts[None, :])
        total = (eta[:, None, None]
                 + sl.get_many(lv + 1, i)[:, :, None]
                 + restricted[y].get_many(i[:, :, None], j[:, None, :])
                 + sr.get_many(j, rv - 1)[:, None, :])
        shape = total.shape
        hat = hat.rangemax_many(np.broadcast_to(t.l[:, None, None], shape),
                                np.broadcast_to(t.r[:, None, None], shape),
                                saturate(total))
    return hat


def restricted_matrices(spine: Spine, s_inner: MonotoneMatrix,
                        middle: str = "fast") -> dict[int, MonotoneMatrix]:
    """Restricted matrices of ``sub(u_x)`` for ``x = k .. 1``."""
    if middle not in ("fast", "reference"):
        raise ValueError(f"unknown middle strategy {middle!r}")
    t = spine.target
    restricted: dict[int, MonotoneMatrix] = {}
    tree = PathMaxTree(t.forest) if t.n else None
    lifting = _Lifting(t)
    for x in range(spine.k, 0, -1):
        hat = bottom_case(spine, x, s_inner)
        if x < spine.k and t.n:
            if middle == "fast":
                phi = middle_case(spine, x, restricted, tree, lifting)
                eta = t.eta(spine.t1.label[spine.node(x)])
                hat = hat.rangemax_many(t.l, t.r, saturate(eta + phi))
            else:
                hat = middle_case_reference(spine, x, restricted, hat)
        restricted[x] = hat
        spine.release(x + 2)
    return restricted


def top_transition(spine: Spine, s_inner: MonotoneMatrix,
                   restricted: dict[int, MonotoneMatrix], kernel: Kernel = naive_kernel,
                   stats: Counter | None = None) -> MonotoneMatrix:
    """``S(F)`` from ``S(F')`` and the restricted matrices along the spine.

    Starts from the mappings that leave the whole spine unmapped, then for
    the highest mapped ``u_x``, mapped inside ``sub(v)``, joins the left
    flanks above it, ``sub(u_x)`` and the right flanks above it.
    """
    t = spine.target
    k = spine.k
    lsize, rsize = spine.left_size(1, k + 1), spine.right_size(1, k + 1)
    inner_size = spine.t1.sync_size(spine.inner)
    s = merge_product(spine.left_matrix(1, k + 1), lsize, s_inner, inner_size,
                      t, kernel, stats)
    s = merge_product(s, lsize + inner_size, spine.right_matrix(1, k + 1), rsize,
                      t, kernel, stats)
    if not t.n:
        return s
    ts = spine.thresholds
    lv, rv = t.l[:, None], t.r[:, None]
    for x in range(1, k + 1):
        sl = spine.left_matrix(1, x)
        sr = spine.right_matrix(1, x)
        i = sl.maxrow_many(lv, ts[None, :])
        j = sr.mincol_many(rv, ts[None, :])
        hat = restricted[x].get_many(t.l, t.r)
        total = (sl.get_many(i, lv)[:, :, None] + hat[:, None, None]
                 + sr.get_many(rv, j)[:, None, :])
        if stats is not None:
            stats["top_iterations"] += total.size
        s = s.rangemax_many(np.broadcast_to(i[:, :, None], total.shape),
                            np.broadcast_to(j[:, None, :], total.shape),
                            saturate(total))
    return s


def type2_transition(t1: Forest, outer: SyncSubforest, inner: SyncSubforest,
                     s_inner: MonotoneMatrix, t2, kernel: Kernel = naive_kernel,
                     stats: Counter | None = None, middle: str = "fast") -> MonotoneMatrix:
    """``S(outer)`` from ``S(inner)`` for a synchronous ``inner`` inside ``outer``."""
    target = Target.of(t2)
    spine = Spine(t1, outer, inner, target, stats)
    if stats is not None:
        stats["spine_nodes"] += spine.k
    restricted = restricted_matrices(spine, s_inner, middle)
    return top_transition(spine, s_inner, restricted, kernel, stats)


# -- driver ----------------------------------------------------------------

def decompose_compute(t1: Forest, t2, delta: int, kernel: Kernel = naive_kernel,
                      stats: Counter | None = None, middle: str = "fast",
                      plan: DecompositionPlan | None = None) -> MonotoneMatrix:
    """``S(t1)`` by executing a decomposition plan step by step."""
    target = Target.of(t2)
    if t1.n == 0:
        return empty_sim(target)
    plan = plan_decomposition(t1, delta) if plan is None else plan
    results: dict[int, MonotoneMatrix] = {}
    for idx, step in enumerate(plan.steps):
        if stats is not None:
            stats[step.kind] += 1
        if step.kind == TYPE1:
            a, b = step.children
            sa, sb = plan.steps[a].size, plan.steps[b].size
            results[idx] = merge_product(results.pop(a), sa, results.pop(b), sb,
                                         target, kernel, stats)
        else:
            s_inner = empty_sim(target) if step.kind == TYPE2_BASE \
                else results.pop(step.children[0])
            results[idx] = type2_transition(t1, step.forest, step.inner, s_inner,
                                            target, kernel, stats, middle)
    return results[len(plan.steps) - 1]


def ted_subcubic(f1: Forest, f2: Forest, delta: int | None = None,
                 kernel: Kernel | None = None, stats: Counter | None = None) -> int:
    """Unit-cost tree edit distance through the block decomposition."""
    if f1.n < f2.n:
        f1, f2 = f2, f1
    delta = default_delta(f2.n) if delta is None else delta
    s = decompose_compute(f1, f2, delta, kernel or naive_kernel, stats)
    return f1.n + f2.n - int(s.array[0, -1])
