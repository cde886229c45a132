"""Labeled trees with internal valence at least three.

A rooted tree is either a leaf, stored as its positive integer label, or a
node, stored as a tuple of at least two child trees.  Children are always kept
sorted by :func:`hall_key`, which makes the tuple a canonical representative
of the isomorphism class.

Unrooted trees are stored rooted at their center:

* ``("V", (B1, ..., Bk))`` when the center is an internal vertex; each ``Bi``
  is the rooted branch hanging off the center (its root edge is the edge at
  the center).
* ``("E", J1, J2)`` when the center is an edge; the two halves share their
  root edge, which is the central edge, and ``J1 <= J2``.

Orientations are parities of edge orderings.  Every canonical tree carries a
reference ordering: for rooted trees the root edge first, then the edges of
each child block in child order (recursively); for ``"V"`` trees the branch
blocks in order; for ``"E"`` trees the central edge, then the remaining edges
of ``J1``, then those of ``J2``.  Functions returning a ``sign`` report the
parity of the permutation taking an input ordering to the reference one.
"""

from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Sequence, Union

RootedTree = Union[int, tuple]
UnrootedTree = tuple
Tree = Union[RootedTree, UnrootedTree]
Signature = tuple


class GeneratorKind(enum.Enum):
    FREE = "Z"
    TWO_TORSION = "Z2"


class TreeError(ValueError):
    pass


# ---------------------------------------------------------------------------
# basic structure


def is_leaf(t: Tree) -> bool:
    return isinstance(t, int)


def is_unrooted(t: Tree) -> bool:
    return isinstance(t, tuple) and len(t) > 0 and isinstance(t[0], str)


@lru_cache(maxsize=None)
def hall_key(t: RootedTree) -> tuple:
    """Sort key realising the Hall order: ``J < K`` iff ``hall_key(J) < hall_key(K)``.

    Leaves compare by label (label 1 smallest).  Heavier trees are smaller,
    at equal weight trees with more root children are smaller, and otherwise
    the sorted child lists are compared lexicographically.
    """
    if isinstance(t, int):
        return (-1, 0, t)
    return (-weight(t), -len(t), tuple(hall_key(c) for c in t))


def hall_compare(j: RootedTree, k: RootedTree) -> int:
    """Return -1, 0 or 1 according as ``j`` precedes, equals or follows ``k``."""
    a, b = hall_key(j), hall_key(k)
    return (a > b) - (a < b)


def unrooted_key(u: UnrootedTree) -> tuple:
    if u[0] == "V":
        return ("V", tuple(hall_key(b) for b in u[1]))
    return ("E", hall_key(u[1]), hall_key(u[2]))


def tree_key(t: Tree) -> tuple:
    return unrooted_key(t) if is_unrooted(t) else ("R", hall_key(t))


@lru_cache(maxsize=None)
def weight(t: RootedTree) -> int:
    if isinstance(t, int):
        return 1
    return sum(weight(c) for c in t)


@lru_cache(maxsize=None)
def edge_count(t: RootedTree) -> int:
    """Edges of a rooted tree, root edge included."""
    if isinstance(t, int):
        return 1
    return 1 + sum(edge_count(c) for c in t)


@lru_cache(maxsize=None)
def degree(t: RootedTree) -> int:
    if isinstance(t, int):
        return 0
    return len(t) - 2 + sum(degree(c) for c in t)


@lru_cache(maxsize=None)
def height(t: RootedTree) -> int:
    """Edges on a longest path from the root vertex down to a leaf."""
    if isinstance(t, int):
        return 1
    return 1 + max(height(c) for c in t)


@lru_cache(maxsize=None)
def labels(t: RootedTree) -> tuple:
    if isinstance(t, int):
        return (t,)
    return tuple(sorted(itertools.chain.from_iterable(labels(c) for c in t)))


def node(*children: RootedTree) -> RootedTree:
    """Unoriented canonical node with the given children."""
    if len(children) < 2:
        raise TreeError("an internal vertex needs at least two children")
    return tuple(sorted(children, key=hall_key))


def signature(t: Tree, m: int | None = None) -> Signature:
    labs = unrooted_labels(t) if is_unrooted(t) else labels(t)
    top = max(labs) if m is None else m
    out = [0] * top
    for lab in labs:
        out[lab - 1] += 1
    return tuple(out)


def unrooted_branches(u: UnrootedTree) -> tuple:
    return u[1] if u[0] == "V" else (u[1], u[2])


def unrooted_labels(u: UnrootedTree) -> tuple:
    return tuple(sorted(itertools.chain.from_iterable(labels(b) for b in unrooted_branches(u))))


def unrooted_weight(u: UnrootedTree) -> int:
    return sum(weight(b) for b in unrooted_branches(u))


def unrooted_edge_count(u: UnrootedTree) -> int:
    if u[0] == "V":
        return sum(edge_count(b) for b in u[1])
    return edge_count(u[1]) + edge_count(u[2]) - 1


def unrooted_degree(u: UnrootedTree) -> int:
    if u[0] == "V":
        return len(u[1]) - 3 + sum(degree(b) for b in u[1])
    return degree(u[1]) + degree(u[2])


def tree_degree(t: Tree) -> int:
    return unrooted_degree(t) if is_unrooted(t) else degree(t)


def tree_weight(t: Tree) -> int:
    return unrooted_weight(t) if is_unrooted(t) else weight(t)


def tree_edge_count(t: Tree) -> int:
    return unrooted_edge_count(t) if is_unrooted(t) else edge_count(t)


# ---------------------------------------------------------------------------
# orientation-reversing automorphisms


@lru_cache(maxsize=None)
def _rooted_reversible(t: RootedTree) -> bool:
    if isinstance(t, int):
        return False
    for a, b in zip(t, t[1:]):
        if a == b and edge_count(a) % 2 == 1:
            return True
    return any(_rooted_reversible(c) for c in set(t))


def has_reversing_automorphism(t: Tree) -> bool:
    """True iff some automorphism of ``t`` induces an odd edge permutation.

    Automorphism groups of trees are generated by swaps of identical sibling
    subtrees (and, for an edge-centered tree with equal halves, the half
    swap), so it suffices to inspect the parity of those generators.
    """
    if not is_unrooted(t):
        return _rooted_reversible(t)
    if t[0] == "V":
        br = t[1]
        for a, b in zip(br, br[1:]):
            if a == b and edge_count(a) % 2 == 1:
                return True
        return any(_rooted_reversible(b) for b in set(br))
    _, j1, j2 = t
    if j1 == j2 and (edge_count(j1) - 1) % 2 == 1:
        return True
    return _rooted_reversible(j1) or _rooted_reversible(j2)


def orientation_reversal_kind(t: Tree) -> GeneratorKind:
    return GeneratorKind.TWO_TORSION if has_reversing_automorphism(t) else GeneratorKind.FREE


# ---------------------------------------------------------------------------
# permutation parity and canonicalisation


def permutation_sign(seq: Sequence) -> int:
    """Sign of the permutation sorting ``seq`` (distinct, comparable items)."""
    n = len(seq)
    order = sorted(range(n), key=seq.__getitem__)
    seen = [False] * n
    cycles = 0
    for i in range(n):
        if not seen[i]:
            cycles += 1
            j = i
            while not seen[j]:
                seen[j] = True
                j = order[j]
    return -1 if (n - cycles) % 2 else 1


def _canon_raw(raw) -> tuple:
    """Canonicalise ``(edge_id, body)``; returns ``(tree, edge ids in reference order)``."""
    eid, body = raw
    if isinstance(body, int):
        return body, [eid]
    parts = [_canon_raw(c) for c in body]
    parts.sort(key=lambda p: hall_key(p[0]))
    ids = [eid]
    for p in parts:
        ids.extend(p[1])
    return tuple(p[0] for p in parts), ids


def _attach_ids(raw, counter: list) -> tuple:
    eid = counter[0]
    counter[0] += 1
    if isinstance(raw, int):
        if raw < 1:
            raise TreeError(f"labels are positive integers, got {raw}")
        return (eid, raw)
    kids = list(raw)
    if len(kids) < 2:
        raise TreeError("an internal vertex needs at least two children")
    return (eid, [_attach_ids(c, counter) for c in kids])


def canonicalize(raw, edge_order: Sequence[int] | None = None) -> tuple[RootedTree, int]:
    """Canonical form of a raw rooted tree together with an orientation sign.

    ``raw`` is a nested structure of ints (leaves) and lists/tuples (nodes) in
    any child order.  Its edges are enumerated in preorder (root edge first).
    ``edge_order[i]`` gives the position of the ``i``-th preorder edge in the
    input orientation; by default the preorder itself is the orientation.
    """
    with_ids = _attach_ids(raw, [0])
    tree, ids = _canon_raw(with_ids)
    if edge_order is not None:
        if sorted(edge_order) != list(range(len(ids))):
            raise TreeError("edge_order must be a permutation of the edges")
        ids = [edge_order[i] for i in ids]
    return tree, permutation_sign(ids)


def bracket(*trees: RootedTree) -> tuple[RootedTree, int]:
    """``(J1, ..., Jk)`` oriented root edge first, then each ``Ji`` in turn."""
    if len(trees) < 2:
        raise TreeError("bracket needs at least two trees")
    ids = []
    offset = 1
    blocks = []
    for t in trees:
        e = edge_count(t)
        blocks.append((t, list(range(offset, offset + e))))
        offset += e
    blocks.sort(key=lambda b: hall_key(b[0]))
    ids = [0]
    for _, block in blocks:
        ids.extend(block)
    return tuple(b[0] for b in blocks), permutation_sign(ids)


# ---------------------------------------------------------------------------
# graphs


@dataclass
class TreeGraph:
    """Mutable adjacency form of a tree with integer edge ids.

    ``adj[v]`` lists ``(neighbour, edge_id)``; ``leaf_labels`` maps leaf
    vertices to labels; ``root`` is the unlabeled root vertex of a rooted tree.
    """

    adj: dict = field(default_factory=dict)
    leaf_labels: dict = field(default_factory=dict)
    root: int | None = None

    def new_vertex(self) -> int:
        v = len(self.adj)
        while v in self.adj:
            v += 1
        self.adj[v] = []
        return v

    def add_edge(self, u: int, v: int, eid: int) -> None:
        self.adj[u].append((v, eid))
        self.adj[v].append((u, eid))

    def internal_vertices(self) -> list[int]:
        return [v for v, nb in self.adj.items() if len(nb) >= 3]

    def copy(self) -> "TreeGraph":
        return TreeGraph({v: list(nb) for v, nb in self.adj.items()}, dict(self.leaf_labels), self.root)


def _add_rooted(g: TreeGraph, t: RootedTree, parent: int, counter: list) -> int:
    v = g.new_vertex()
    g.add_edge(parent, v, counter[0])
    counter[0] += 1
    if isinstance(t, int):
        g.leaf_labels[v] = t
    else:
        for c in t:
            _add_rooted(g, c, v, counter)
    return v


def tree_to_graph(t: Tree) -> TreeGraph:
    """Graph with edge ids ``0..E-1`` listed in the reference orientation."""
    g = TreeGraph()
    counter = [0]
    if not is_unrooted(t):
        g.root = g.new_vertex()
        _add_rooted(g, t, g.root, counter)
    elif t[0] == "V":
        c = g.new_vertex()
        for b in t[1]:
            _add_rooted(g, b, c, counter)
    else:
        _, j1, j2 = t
        x = g.new_vertex()
        y = g.new_vertex()
        g.add_edge(x, y, 0)
        counter[0] = 1
        for c in j1:
            _add_rooted(g, c, x, counter)
        for c in j2:
            _add_rooted(g, c, y, counter)
    return g


def _canon_from(g: TreeGraph, v: int, parent: int, eid: int) -> tuple:
    if v in g.leaf_labels:
        return g.leaf_labels[v], [eid]
    parts = [_canon_from(g, w, v, e) for w, e in g.adj[v] if w != parent]
    if len(parts) < 2:
        raise TreeError("bivalent vertex in tree graph")
    parts.sort(key=lambda p: hall_key(p[0]))
    ids = [eid]
    for p in parts:
        ids.extend(p[1])
    return tuple(p[0] for p in parts), ids


def _farthest(g: TreeGraph, start: int) -> tuple[int, dict]:
    parent = {start: None}
    queue = deque([start])
    last = start
    while queue:
        v = queue.popleft()
        last = v
        for w, _ in g.adj[v]:
            if w not in parent:
                parent[w] = v
                queue.append(w)
    return last, parent


def graph_center(g: TreeGraph) -> tuple:
    """``("V", v)`` or ``("E", u, w, edge_id)`` for the center of the tree graph."""
    a, _ = _farthest(g, next(iter(g.adj)))
    b, parent = _farthest(g, a)
    path = [b]
    while path[-1] != a:
        path.append(parent[path[-1]])
    n = len(path) - 1
    if n % 2 == 0:
        return ("V", path[n // 2])
    u, w = path[(n - 1) // 2], path[(n + 1) // 2]
    eid = next(e for x, e in g.adj[u] if x == w)
    return ("E", u, w, eid)


def canonicalize_graph(g: TreeGraph) -> tuple[Tree, int]:
    """Canonical tree and sign relative to the ordering given by the edge ids."""
    if g.root is not None:
        ((w, e),) = g.adj[g.root]
        tree, ids = _canon_from(g, w, g.root, e)
        return tree, permutation_sign(ids)
    center = graph_center(g)
    if center[0] == "V":
        c = center[1]
        if c in g.leaf_labels:
            raise TreeError("tree has no internal vertex")
        parts = [_canon_from(g, w, c, e) for w, e in g.adj[c]]
        parts.sort(key=lambda p: hall_key(p[0]))
        ids = []
        for p in parts:
            ids.extend(p[1])
        return ("V", tuple(p[0] for p in parts)), permutation_sign(ids)
    _, u, w, m = center
    h1 = _canon_from(g, u, w, m)
    h2 = _canon_from(g, w, u, m)
    if hall_key(h2[0]) < hall_key(h1[0]):
        h1, h2 = h2, h1
    ids = [m] + h1[1][1:] + h2[1][1:]
    return ("E", h1[0], h2[0]), permutation_sign(ids)


def canonical_unrooted(u_raw_branches: Iterable) -> tuple[UnrootedTree, int]:
    """Canonical unrooted tree from raw branches around one internal vertex.

    Each branch is a raw rooted tree (see :func:`canonicalize`); edges are
    ordered branch by branch in preorder.
    """
    g = TreeGraph()
    c = g.new_vertex()
    counter = [0]
    branches = list(u_raw_branches)
    if len(branches) < 3:
        raise TreeError("the central vertex needs valence at least three")

    def add(raw, parent):
        v = g.new_vertex()
        g.add_edge(parent, v, counter[0])
        counter[0] += 1
        if isinstance(raw, int):
            g.leaf_labels[v] = raw
        else:
            if len(raw) < 2:
                raise TreeError("an internal vertex needs at least two children")
            for ch in raw:
                add(ch, v)

    for b in branches:
        add(b, c)
    return canonicalize_graph(g)


def inner_product(j1: RootedTree, j2: RootedTree) -> tuple[UnrootedTree, int]:
    """``<J1, J2>``: join the roots into one edge, numbered first, then ``J1``, ``J2``."""
    if isinstance(j1, int) and isinstance(j2, int):
        raise TreeError("inner product of two leaves has no internal vertex")
    g = TreeGraph()
    counter = [1]
    x = g.new_vertex()
    y = g.new_vertex()
    g.add_edge(x, y, 0)
    for v, t in ((x, j1), (y, j2)):
        if isinstance(t, int):
            g.leaf_labels[v] = t
        else:
            for c in t:
                _add_rooted(g, c, v, counter)
    return canonicalize_graph(g)


# ---------------------------------------------------------------------------
# enumeration


def _subvectors_desc(v: tuple) -> Iterator[tuple]:
    for p in itertools.product(*(range(x, -1, -1) for x in v)):
        if any(p):
            yield p


@lru_cache(maxsize=None)
def _vector_partitions(v: tuple, bound: tuple) -> tuple:
    """Multisets of nonzero vectors summing to ``v``, parts non-increasing, each ``<= bound``."""
    if not any(v):
        return ((),)
    out = []
    for p in _subvectors_desc(v):
        if p > bound:
            continue
        rest = tuple(a - b for a, b in zip(v, p))
        for tail in _vector_partitions(rest, p):
            out.append((p,) + tail)
    return tuple(out)


def _cost_range(tau: tuple) -> range:
    w = sum(tau)
    return range(1, max(1, w - 1) + 1)


def _group_costs(groups: list, budget: int) -> Iterator[list]:
    """Assign non-decreasing cost lists to groups of equal parts, summing to ``budget``."""
    if not groups:
        if budget == 0:
            yield []
        return
    (tau, mult), rest = groups[0], groups[1:]
    lo_rest = sum(m for _, m in rest)
    hi_rest = sum(m * _cost_range(t)[-1] for t, m in rest)
    costs = _cost_range(tau)
    for combo in itertools.combinations_with_replacement(costs, mult):
        s = sum(combo)
        if lo_rest <= budget - s <= hi_rest:
            for tail in _group_costs(rest, budget - s):
                yield [combo] + tail


def _branch_multisets(sig: tuple, min_parts: int, max_parts: int, budget: int, min_weight: int = 1) -> Iterator[tuple]:
    """Sorted tuples of rooted trees with total signature ``sig``.

    Each tree ``B`` costs ``degree(B) + 1``; the total cost must equal ``budget``.
    """
    for parts in _vector_partitions(sig, sig):
        if not (min_parts <= len(parts) <= max_parts):
            continue
        if any(sum(p) < min_weight for p in parts):
            continue
        groups = [(tau, len(list(grp))) for tau, grp in itertools.groupby(parts)]
        for costs in _group_costs(groups, budget):
            choices = []
            for (tau, _), combo in zip(groups, costs):
                for c, grp in itertools.groupby(combo):
                    k = len(list(grp))
                    choices.append(list(itertools.combinations_with_replacement(_rooted(tau, c - 1), k)))
            for pick in itertools.product(*choices):
                kids = [t for block in pick for t in block]
                yield tuple(sorted(kids, key=hall_key))


@lru_cache(maxsize=None)
def _rooted(sig: tuple, deg: int) -> tuple:
    w = sum(sig)
    if w == 1:
        return ((sig.index(1) + 1,) if deg == 0 else ())
    if deg < 0 or deg > w - 2:
        return ()
    out = set(_branch_multisets(sig, 2, deg + 2, deg + 2))
    return tuple(sorted(out, key=hall_key))


def _check_sig(sig: Sequence[int]) -> tuple:
    sig = tuple(int(x) for x in sig)
    if not sig or any(x < 0 for x in sig) or sum(sig) == 0:
        raise TreeError(f"invalid signature {sig}")
    return sig


def enumerate_rooted(sig: Sequence[int], deg: int) -> list[RootedTree]:
    """All canonical rooted trees with leaf signature ``sig`` and degree ``deg``."""
    return list(_rooted(_check_sig(sig), deg))


@lru_cache(maxsize=None)
def _unrooted(sig: tuple, deg: int) -> tuple:
    w = sum(sig)
    if w < 3 or deg < 0 or deg > w - 3:
        return ()
    out = []
    for br in _branch_multisets(sig, 3, deg + 3, deg + 3):
        hs = sorted((height(b) for b in br), reverse=True)
        if hs[0] == hs[1]:
            out.append(("V", br))
    for j1, j2 in _branch_multisets(sig, 2, 2, deg + 2, min_weight=2):
        if height(j1) == height(j2):
            out.append(("E", j1, j2))
    return tuple(sorted(out, key=unrooted_key))


def enumerate_unrooted(sig: Sequence[int], deg: int) -> list[UnrootedTree]:
    """All canonical unrooted trees with leaf signature ``sig`` and degree ``deg``."""
    return list(_unrooted(_check_sig(sig), deg))


# ---------------------------------------------------------------------------
# text encoding


def to_text(t: Tree) -> str:
    if is_unrooted(t):
        if t[0] == "V":
            return "@(" + ",".join(to_text(b) for b in t[1]) + ")"
        return "<" + to_text(t[1]) + "," + to_text(t[2]) + ">"
    if isinstance(t, int):
        return str(t)
    return "(" + ",".join(to_text(c) for c in t) + ")"


def _parse_raw(s: str, i: int) -> tuple:
    if i >= len(s):
        raise TreeError(f"unexpected end of {s!r}")
    if s[i] == "(":
        kids = []
        i += 1
        while True:
            kid, i = _parse_raw(s, i)
            kids.append(kid)
            if i >= len(s):
                raise TreeError(f"unexpected end of {s!r}")
            if s[i] == ",":
                i += 1
            elif s[i] == ")":
                return kids, i + 1
            else:
                raise TreeError(f"unexpected {s[i]!r} at {i}")
    j = i
    while j < len(s) and s[j].isdigit():
        j += 1
    if j == i:
        raise TreeError(f"expected a label at {i} in {s!r}")
    return int(s[i:j]), j


def parse_raw(text: str):
    s = "".join(text.split())
    raw, i = _parse_raw(s, 0)
    if i != len(s):
        raise TreeError(f"trailing characters in {text!r}")
    return raw


def from_text(text: str) -> Tree:
    """Inverse of :func:`to_text`; any child order is accepted."""
    s = "".join(text.split())
    if s.startswith("@"):
        return canonical_unrooted(parse_raw(s[1:]))[0]
    if s.startswith("<") and s.endswith(">"):
        pair = parse_raw("(" + s[1:-1] + ")")
        if len(pair) != 2:
            raise TreeError(f"inner product needs two halves: {text!r}")
        halves = [canonicalize(p)[0] for p in pair]
        return inner_product(*halves)[0]
    return canonicalize(parse_raw(s))[0]
