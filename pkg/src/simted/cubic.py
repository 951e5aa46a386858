"""Similarity matrices by dynamic programming over subtrees.

For a forest ``F`` and a fixed target ``T2`` the similarity matrix
``S(F)`` holds ``sim(F, T2[i, j))`` for every window of the target.  It is
built bottom-up over ``F``:

* the empty forest gives zeros on and above the diagonal;
* a tree with root ``u`` starts from the matrix of ``F - u`` and, for each
  target node ``v``, offers ``u -> v`` on every window containing ``v``;
* a forest is the max-plus product of the matrix of all but its last tree
  with the matrix of its last tree.

Products use :func:`~simted.maxplus.mul1`, whose cost depends on the entry
bounds ``2 * min(|F|, |T2|)`` of the two factors.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .forest import VIRTUAL_ROOT, Forest
from .maxplus import mul1
from .monotone import NEG, MonotoneMatrix


@dataclass(frozen=True)
class Target:
    """Per-target arrays shared by every matrix computation against ``T2``."""

    forest: Forest
    l: np.ndarray
    r: np.ndarray
    labels: np.ndarray

    @classmethod
    def of(cls, t2: "Forest | Target") -> "Target":
        if isinstance(t2, Target):
            return t2
        bi = t2.bi
        return cls(t2, np.array(bi.l[1:], dtype=np.int64),
                   np.array(bi.r[1:], dtype=np.int64),
                   np.array(t2.label[1:], dtype=np.int64))

    @property
    def n(self) -> int:
        return self.forest.n

    @property
    def size(self) -> int:
        """Side length ``2|T2| + 1`` of every similarity matrix."""
        return 2 * self.forest.n + 1

    def eta(self, label: int) -> np.ndarray:
        """``eta(u, v)`` for a node labelled ``label`` against every target node."""
        return 2 - (self.labels != label).astype(np.int64)

    def bound(self, forest_size: int) -> int:
        return 2 * min(forest_size, self.n)


def empty_sim(t2) -> MonotoneMatrix:
    """``S(empty)``: zero on and above the diagonal, minus infinity below."""
    size = Target.of(t2).size
    a = np.zeros((size, size), dtype=np.int64)
    a[np.tril_indices(size, -1)] = NEG
    return MonotoneMatrix.from_dense(a)


def root_attach(s_child: MonotoneMatrix, label: int, t2) -> MonotoneMatrix:
    """Matrix of a tree from the matrix of the tree minus its root.

    ``label`` is the root's label.  Mapping the root to ``v`` leaves the
    rest of the tree to be mapped into ``sub(v) - v``, the window
    ``[l(v) + 1, r(v) - 1)``, and is available in every window that
    contains ``v``.
    """
    t = Target.of(t2)
    if t.n == 0:
        return s_child
    vals = s_child.get_many(t.l + 1, t.r - 1) + t.eta(label)
    return s_child.rangemax_many(t.l, t.r, vals)


def product(a: MonotoneMatrix, size_a: int, b: MonotoneMatrix, size_b: int,
            t2, stats: Counter | None = None) -> MonotoneMatrix:
    """``S(A + B)`` from ``S(A)`` and ``S(B)`` given the forest sizes."""
    t = Target.of(t2)
    if stats is not None:
        stats["pair_count"] += size_a * size_b
    if size_a == 0:
        return b
    if size_b == 0:
        return a
    return mul1(a, b, t.bound(size_a), t.bound(size_b), stats)


def roots_similarity(f: Forest, roots: Sequence[int], t2,
                     stats: Counter | None = None) -> MonotoneMatrix:
    """``S`` of the forest made of the subtrees of ``f`` rooted at ``roots``.

    The roots must be siblings or at least listed in left-to-right order
    with disjoint subtrees.  Subtree matrices are computed in postorder and
    dropped as soon as their parent has absorbed them.
    """
    t = Target.of(t2)
    acc, acc_size = empty_sim(t), 0
    for root in roots:
        sub = _subtree_similarity(f, root, t, stats)
        acc = product(acc, acc_size, sub, f.size[root], t, stats)
        acc_size += f.size[root]
        if stats is not None and acc_size > f.size[root]:
            stats["materialized"] += 1
    return acc


def _subtree_similarity(f: Forest, root: int, t: Target,
                        stats: Counter | None) -> MonotoneMatrix:
    empty = empty_sim(t)
    # Each frame: node, accumulated matrix of its finished children, their size.
    stack = [[root, empty, 0, 0]]
    result = None
    while stack:
        frame = stack[-1]
        u, acc, acc_size, next_child = frame
        kids = f.children[u]
        if result is not None:
            child = kids[next_child - 1]
            acc = product(acc, acc_size, result, f.size[child], t, stats)
            acc_size += f.size[child]
            if stats is not None and next_child >= 2:
                stats["materialized"] += 1
            frame[1], frame[2] = acc, acc_size
            result = None
        if next_child < len(kids):
            frame[3] += 1
            stack.append([kids[next_child], empty, 0, 0])
            continue
        stack.pop()
        result = root_attach(acc, f.label[u], t)
        if stats is not None:
            stats["materialized"] += 1
    return result


def subtree_similarity(f: Forest, u: int, t2, stats: Counter | None = None) -> MonotoneMatrix:
    """``S(sub(u))``."""
    return _subtree_similarity(f, u, Target.of(t2), stats)


def dp_similarity(f: Forest, t2, stats: Counter | None = None) -> MonotoneMatrix:
    """``S(F)`` for a whole forest."""
    return roots_similarity(f, f.children[VIRTUAL_ROOT], t2, stats)


def prefix_similarities(parts: Sequence[Forest], t2,
                        stats: Counter | None = None) -> list[MonotoneMatrix]:
    """``S(F1), S(F1 + F2), ..., S(F1 + ... + Fk)`` by repeated products."""
    t = Target.of(t2)
    out = []
    acc, acc_size = empty_sim(t), 0
    for part in parts:
        acc = product(acc, acc_size, dp_similarity(part, t, stats), part.n, t, stats)
        acc_size += part.n
        out.append(acc)
    return out


def suffix_similarities(parts: Sequence[Forest], t2,
                        stats: Counter | None = None) -> list[MonotoneMatrix]:
    """``S(Fi + ... + Fk)`` for every ``i``, in the order of ``parts``."""
    t = Target.of(t2)
    out = []
    acc, acc_size = empty_sim(t), 0
    for part in reversed(parts):
        acc = product(dp_similarity(part, t, stats), part.n, acc, acc_size, t, stats)
        acc_size += part.n
        out.append(acc)
    out.reverse()
    return out


def similarity(f1: Forest, f2: Forest, stats: Counter | None = None) -> int:
    """``sim(F1, F2)`` read off the top-right corner of ``S(F1)`` against ``F2``."""
    if f1.n < f2.n:
        f1, f2 = f2, f1
    return int(dp_similarity(f1, f2, stats).array[0, -1])


def ted_cubic(f1: Forest, f2: Forest, stats: Counter | None = None) -> int:
    """Unit-cost tree edit distance through similarity matrices."""
    return f1.n + f2.n - similarity(f1, f2, stats)
