"""Rooted ordered labeled forests and their bi-order traversal.

Nodes live in a flat arena indexed ``1..n`` in bi-order first-occurrence
(preorder) order.  Index ``0`` is the virtual root: it carries no label and
its children are the top-level trees of the forest.

The bi-order sequence lists every node twice, once on entry and once on
exit of a depth-first walk.  Positions are 1-based, so for a node ``u``::

    seq[l(u)] == seq[r(u) - 1] == u

and the subforest ``F[l, r)`` holds the nodes ``u`` with ``l <= l(u)`` and
``r(u) <= r``.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

VIRTUAL_ROOT = 0

_label_ids: dict[str, int] = {}
_label_names: list[str] = []


def intern_label(name: str) -> int:
    """Return the run-global integer id of a label name."""
    try:
        return _label_ids[name]
    except KeyError:
        _label_ids[name] = len(_label_names)
        _label_names.append(name)
        return _label_ids[name]


def label_name(label_id: int) -> str:
    return _label_names[label_id]


class ForestSyntaxError(ValueError):
    """Malformed bracket-notation input."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


@dataclass(frozen=True)
class BiOrderIndex:
    seq: tuple[int, ...]
    l: tuple[int, ...]
    r: tuple[int, ...]


@dataclass(frozen=True)
class SubforestRef:
    """The half-open bi-order window ``F[l, r)``."""

    l: int
    r: int


@dataclass(frozen=True)
class SyncSubforest:
    """``sub(vroot, [x, y])``: children ``x..y`` of ``vroot``, 1-based.

    An empty child range (``y == x - 1``) denotes the empty forest; the
    algorithms use it for flanks that have no trees.
    """

    vroot: int
    x: int
    y: int

    @property
    def is_empty(self) -> bool:
        return self.y < self.x


class Forest:
    """Immutable ordered forest over an arena of integer-labelled nodes.

    Build one with :func:`parse_forest`, :meth:`from_nested` or
    :func:`random_forest`.  All per-node tables are tuples indexed by node
    id, with slot 0 describing the virtual root.
    """

    __slots__ = ("n", "label", "parent", "children", "size", "depth",
                 "child_pos", "_child_prefix", "_bi")

    def __init__(self, label: Sequence[int], parent: Sequence[int],
                 children: Sequence[Sequence[int]]):
        n = len(label) - 1
        self.n = n
        self.label = tuple(label)
        self.parent = tuple(parent)
        self.children = tuple(tuple(c) for c in children)
        self._check()

        size = [1] * (n + 1)
        size[0] = n
        for u in range(n, 0, -1):
            if self.parent[u] != VIRTUAL_ROOT:
                size[self.parent[u]] += size[u]
        self.size = tuple(size)

        depth = [0] * (n + 1)
        child_pos = [0] * (n + 1)
        prefix = []
        for u in range(n + 1):
            acc = [0]
            for k, c in enumerate(self.children[u], start=1):
                child_pos[c] = k
                depth[c] = depth[u] + 1
                acc.append(acc[-1] + size[c])
            prefix.append(tuple(acc))
        self.depth = tuple(depth)
        self.child_pos = tuple(child_pos)
        self._child_prefix = tuple(prefix)

        seq: list[int] = []
        l = [0] * (n + 1)
        r = [0] * (n + 1)
        stack = [(c, False) for c in reversed(self.children[0])]
        while stack:
            u, leaving = stack.pop()
            seq.append(u)
            if leaving:
                r[u] = len(seq) + 1
            else:
                l[u] = len(seq)
                stack.append((u, True))
                stack.extend((c, False) for c in reversed(self.children[u]))
        self._bi = BiOrderIndex(tuple(seq), tuple(l), tuple(r))

    def _check(self) -> None:
        n = self.n
        if len(self.parent) != n + 1 or len(self.children) != n + 1:
            raise ValueError("label, parent and children tables differ in length")
        # Preorder numbering: walking the child lists from the virtual root
        # must visit 1, 2, ..., n in order.
        expected = 1
        stack = list(reversed(self.children[0]))
        while stack:
            u = stack.pop()
            if u != expected:
                raise ValueError("nodes are not numbered in preorder")
            expected += 1
            for c in self.children[u]:
                if self.parent[c] != u:
                    raise ValueError(f"parent/child links disagree at node {c}")
            stack.extend(reversed(self.children[u]))
        if expected != n + 1:
            raise ValueError("some nodes are unreachable from the virtual root")
        for c in self.children[0]:
            if self.parent[c] != VIRTUAL_ROOT:
                raise ValueError(f"root {c} has a non-virtual parent")

    # -- construction -----------------------------------------------------

    @classmethod
    def from_nested(cls, trees: Iterable) -> "Forest":
        """Build from ``(label, [subtrees...])`` pairs; labels are str or int."""
        label = [-1]
        parent = [VIRTUAL_ROOT]
        children: list[list[int]] = [[]]
        stack = [(tree, VIRTUAL_ROOT) for tree in reversed(list(trees))]
        while stack:
            (name, kids), par = stack.pop()
            u = len(label)
            label.append(intern_label(name) if isinstance(name, str) else int(name))
            parent.append(par)
            children.append([])
            children[par].append(u)
            stack.extend((kid, u) for kid in reversed(list(kids)))
        return cls(label, parent, children)

    def to_nested(self, u: int = VIRTUAL_ROOT) -> list:
        """The subforest below ``u`` as ``(label, [subtrees...])`` pairs."""
        last = u + self.size[u] if u != VIRTUAL_ROOT else self.n + 1
        built: dict[int, tuple] = {}
        for v in range(last - 1, u, -1):
            built[v] = (self.label[v], [built.pop(c) for c in self.children[v]])
        return [built.pop(c) for c in self.children[u]]

    @classmethod
    def empty(cls) -> "Forest":
        return cls([-1], [VIRTUAL_ROOT], [[]])

    # -- queries ----------------------------------------------------------

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        return isinstance(other, Forest) and self.label == other.label \
            and self.children == other.children

    def __hash__(self) -> int:
        return hash((self.label, self.children))

    def __repr__(self) -> str:
        return f"Forest({serialize_forest(self)!r})"

    @property
    def roots(self) -> tuple[int, ...]:
        return self.children[VIRTUAL_ROOT]

    @property
    def bi(self) -> BiOrderIndex:
        return self._bi

    def degree(self, u: int) -> int:
        return len(self.children[u])

    def child(self, u: int, k: int) -> int:
        """The ``k``-th child (1-based) of ``u``; ``u`` may be the virtual root."""
        return self.children[u][k - 1]

    def range_size(self, u: int, x: int, y: int) -> int:
        """Number of nodes in ``sub(u, [x, y])``; zero for an empty range."""
        if y < x:
            return 0
        p = self._child_prefix[u]
        return p[y] - p[x - 1]

    def sync_size(self, s: SyncSubforest) -> int:
        return self.range_size(s.vroot, s.x, s.y)

    def is_ancestor(self, u: int, v: int) -> bool:
        """Strict ancestry; the virtual root is an ancestor of every node."""
        if u == VIRTUAL_ROOT:
            return v != VIRTUAL_ROOT
        l, r = self._bi.l, self._bi.r
        return l[u] < l[v] and r[v] < r[u]

    def sync_nodes(self, s: SyncSubforest) -> range:
        """Node ids of ``sub(vroot, [x, y])``; contiguous by preorder numbering."""
        if s.is_empty:
            return range(0)
        first = self.child(s.vroot, s.x)
        return range(first, first + self.range_size(s.vroot, s.x, s.y))


def bi_order(forest: Forest) -> BiOrderIndex:
    return forest.bi


def subforest_nodes(forest: Forest, ref: SubforestRef) -> set[int]:
    """Nodes of ``F[l, r)``."""
    if not 1 <= ref.l <= ref.r <= 2 * forest.n + 1:
        raise IndexError(f"window [{ref.l}, {ref.r}) outside 1..{2 * forest.n + 1}")
    l, r = forest.bi.l, forest.bi.r
    return {u for u in range(1, forest.n + 1) if ref.l <= l[u] and r[u] <= ref.r}


def _check_sync(forest: Forest, s: SyncSubforest) -> None:
    if not 0 <= s.vroot <= forest.n:
        raise IndexError(f"no node {s.vroot}")
    d = forest.degree(s.vroot)
    if not (1 <= s.x <= s.y <= d or (s.y == s.x - 1 and 1 <= s.x <= d + 1)):
        raise IndexError(f"child range [{s.x}, {s.y}] invalid under node "
                         f"{s.vroot} with {d} children")


def sync_slice(forest: Forest, s: SyncSubforest) -> Forest:
    """Copy ``sub(vroot, [x, y])`` into a fresh forest."""
    _check_sync(forest, s)
    if s.is_empty:
        return Forest.empty()
    return Forest.from_nested(
        [(forest.label[c], forest.to_nested(c))
         for c in forest.children[s.vroot][s.x - 1:s.y]])


def sync_as_ref(forest: Forest, s: SyncSubforest) -> SubforestRef:
    """A bi-order window with the same node set as a synchronous subforest."""
    _check_sync(forest, s)
    if s.is_empty:
        return SubforestRef(1, 1)
    l, r = forest.bi.l, forest.bi.r
    return SubforestRef(l[forest.child(s.vroot, s.x)],
                        r[forest.child(s.vroot, s.y)])


def concat(*forests: Forest) -> Forest:
    """``F1 + F2 + ...``: the trees of each forest, left to right."""
    nested = []
    for f in forests:
        nested.extend(f.to_nested())
    return Forest.from_nested(nested)


def subtree(forest: Forest, u: int) -> Forest:
    return Forest.from_nested([(forest.label[u], forest.to_nested(u))])


# -- bracket notation ------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:([A-Za-z0-9_]+)|(\S))?")


def parse_forest(text: str) -> Forest:
    """Parse bracket notation: ``forest := tree (',' tree)*``, ``tree := label ['(' forest ')']``.

    Whitespace between tokens is ignored.  ``"a(b,c)"`` is a root ``a``
    with children ``b`` and ``c``; the empty string is the empty forest.
    """
    tokens: list[tuple[str, str, int]] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m.group(1) is not None:
            tokens.append(("label", m.group(1), m.start(1)))
        elif m.group(2) is not None:
            if m.group(2) not in "(),":
                raise ForestSyntaxError(f"unexpected character {m.group(2)!r}", m.start(2))
            tokens.append((m.group(2), m.group(2), m.start(2)))
        pos = m.end()
    tokens.append(("end", "", len(text)))

    label, parent, children = [-1], [VIRTUAL_ROOT], [[]]
    open_nodes = [VIRTUAL_ROOT]
    i = 0
    if tokens[0][0] == "end":
        return Forest(label, parent, children)
    while True:
        kind, value, at = tokens[i]
        if kind != "label":
            raise ForestSyntaxError("expected a label", at)
        u = len(label)
        label.append(intern_label(value))
        parent.append(open_nodes[-1])
        children.append([])
        children[open_nodes[-1]].append(u)
        i += 1
        if tokens[i][0] == "(":
            i += 1
            open_nodes.append(u)
            if tokens[i][0] != ")":
                continue
        elif tokens[i][0] == ",":
            i += 1
            continue
        # A tree just ended: close as many open nodes as there are ')'.
        while tokens[i][0] == ")" and len(open_nodes) > 1:
            open_nodes.pop()
            i += 1
        kind, value, at = tokens[i]
        if kind == ",":
            i += 1
        elif kind == "end" and len(open_nodes) == 1:
            return Forest(label, parent, children)
        elif kind == "end":
            raise ForestSyntaxError("expected ')'", at)
        else:
            raise ForestSyntaxError(f"unexpected {value!r}", at)


def serialize_forest(forest: Forest) -> str:
    """Canonical bracket notation: no whitespace, comma-separated siblings."""
    built: dict[int, str] = {}
    for u in range(forest.n, 0, -1):
        name = label_name(forest.label[u])
        kids = forest.children[u]
        built[u] = name + "(" + ",".join(built.pop(c) for c in kids) + ")" if kids else name
    return ",".join(built[c] for c in forest.roots)


# -- generators ------------------------------------------------------------

def random_forest(n: int, alphabet: int = 2, seed: int | None = None,
                  rng: random.Random | None = None) -> Forest:
    """Random ordered tree with ``n`` nodes by random parent insertion.

    Node ``i`` picks a uniformly random earlier node as its parent and a
    uniformly random slot among that parent's children.  Labels are drawn
    uniformly from ``alphabet`` symbols named ``a``, ``b``, ...
    """
    if n < 0 or alphabet < 1:
        raise ValueError("need n >= 0 and alphabet >= 1")
    rng = rng or random.Random(seed)
    if n == 0:
        return Forest.empty()
    kids: list[list[int]] = [[]]
    for i in range(1, n):
        p = rng.randrange(i)
        kids[p].insert(rng.randint(0, len(kids[p])), i)
        kids.append([])
    names = [_alphabet_name(rng.randrange(alphabet)) for _ in range(n)]
    # Parents precede children, so building from the last node up is safe.
    built: dict[int, tuple] = {}
    for u in range(n - 1, -1, -1):
        built[u] = (names[u], [built.pop(c) for c in kids[u]])
    return Forest.from_nested([built[0]])


def _alphabet_name(k: int) -> str:
    s = ""
    k += 1
    while k:
        k, rem = divmod(k - 1, 26)
        s = chr(ord("a") + rem) + s
    return s


def all_trees(n: int) -> list[list]:
    """Every ordered tree shape with ``n`` nodes as nested ``(0, kids)`` pairs."""
    if n == 0:
        return []
    return [(0, kids) for kids in _all_forests(n - 1)]


def _all_forests(n: int) -> list[list]:
    if n == 0:
        return [[]]
    out = []
    for first in range(1, n + 1):
        for t in all_trees(first):
            for rest in _all_forests(n - first):
                out.append([t] + rest)
    return out
