"""Max-updates along root paths of a static forest, with point queries.

An update starts at a node and walks to the root of its tree, split into
consecutive segments whose values never decrease going up.  Under that
ordering, raising segment ``s`` to its value is the same as raising the
whole path from the bottom of ``s`` to the root: every higher segment
carries a value at least as large.  So each segment becomes one point
record at its bottom node, and the answer at ``v`` is the largest record
inside the subtree of ``v``.  Nodes are numbered in preorder, so that
subtree is the contiguous range ``v .. v + size(v) - 1`` and all answers
come from one sparse-table pass over the records.
"""

from __future__ import annotations

import numpy as np

from .forest import VIRTUAL_ROOT, Forest
from .monotone import NEG, to_public


class PathMaxTree:
    """Root-path max-updates and point queries on the topology of a forest."""

    def __init__(self, forest: Forest):
        self._forest = forest
        self._n = forest.n
        self._last = np.array([u + forest.size[u] - 1 for u in range(self._n + 1)],
                              dtype=np.int64)
        self._records = np.full(self._n + 1, NEG, dtype=np.int64)
        self._answers: np.ndarray | None = None
        self.operations = 0

    def reset(self) -> None:
        self._records.fill(NEG)
        self._answers = None

    def path_update(self, start: int, segments) -> None:
        """Apply ``[(bottom, value), ...]`` segments of the path from ``start``.

        The first bottom must be ``start``; each later bottom must be a
        proper ancestor of the previous one, and values must not decrease.
        A segment reaches up to just below the next bottom, the last one up
        to the root of the tree.
        """
        segments = list(segments)
        if not segments:
            raise ValueError("an update needs at least one segment")
        if not 1 <= start <= self._n:
            raise IndexError(f"no node {start}")
        f = self._forest
        prev_node, prev_value = None, None
        for node, value in segments:
            if prev_node is None:
                if node != start:
                    raise ValueError("the first segment must start at the update node")
            elif node == prev_node or not f.is_ancestor(node, prev_node):
                raise ValueError(f"segment at {node} is not above segment at {prev_node}")
            elif value < prev_value:
                raise ValueError("segment values must not decrease toward the root")
            prev_node, prev_value = node, value
        nodes = np.array([s[0] for s in segments], dtype=np.int64)
        values = np.array([s[1] for s in segments], dtype=np.int64)
        self.raise_to_root(nodes, values)

    def raise_to_root(self, nodes, values) -> None:
        """For each pair, raise every node from ``node`` up to its root to ``value``.

        This is the primitive behind :meth:`path_update`, exposed in batch
        form for callers that already guarantee the segment ordering.
        """
        nodes = np.asarray(nodes, dtype=np.int64).ravel()
        values = np.asarray(values, dtype=np.int64).ravel()
        keep = (nodes != VIRTUAL_ROOT) & (values > NEG)
        if keep.any():
            np.maximum.at(self._records, nodes[keep], values[keep])
            self._answers = None
        self.operations += int(nodes.size)

    def _flush(self) -> np.ndarray:
        if self._answers is None:
            self._answers = _range_max(self._records, np.arange(self._n + 1), self._last)
        return self._answers

    def query(self, v: int):
        if not 1 <= v <= self._n:
            raise IndexError(f"no node {v}")
        return to_public(self._flush()[v])

    def query_many(self, nodes) -> np.ndarray:
        """Internal int64 answers (``NEG`` when nothing covers a node)."""
        return self._flush()[np.asarray(nodes, dtype=np.int64)]


def _range_max(values: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """``max(values[lo[q] .. hi[q]])`` for every query, via a sparse table."""
    table = [values]
    width = 1
    while 2 * width <= len(values):
        prev = table[-1]
        table.append(np.maximum(prev[:-width], prev[width:]))
        width *= 2
    length = hi - lo + 1
    level = np.zeros_like(length)
    nz = length > 0
    level[nz] = np.floor(np.log2(length[nz])).astype(np.int64)
    out = np.empty(len(lo), dtype=np.int64)
    for k in np.unique(level):
        sel = level == k
        row = table[k]
        out[sel] = np.maximum(row[lo[sel]], row[hi[sel] - (1 << int(k)) + 1])
    return out
