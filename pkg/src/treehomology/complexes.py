"""Tree chain complexes ``L`` (rooted), ``T`` (unrooted) and ``Lbar``.

``Lbar`` is the quotient of ``L`` by the subcomplex spanned by trees of the
form ``(i, J)`` with ``i`` a leaf; it is realised by dropping those trees from
the basis and projecting boundaries.
"""

from __future__ import annotations

import itertools
import os
from fractions import Fraction
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__
from .exactlinalg import ChainComplex, Ring, SparseMatrix, normalize
from .trees import (
    GeneratorKind,
    Tree,
    TreeError,
    TreeGraph,
    bracket,
    canonicalize_graph,
    enumerate_rooted,
    enumerate_unrooted,
    from_text,
    has_reversing_automorphism,
    is_unrooted,
    to_text,
    tree_degree,
    tree_to_graph,
)

FAMILIES = ("L", "T", "Lbar")
CACHE_FORMAT = 1


def is_leaf_bracket(t: Tree) -> bool:
    """True for rooted trees ``(i, J)``: trivalent top vertex with a leaf child."""
    return not is_unrooted(t) and not isinstance(t, int) and len(t) == 2 and any(isinstance(c, int) for c in t)


# ---------------------------------------------------------------------------
# expansions and boundary


def _split_vertex(g: TreeGraph, v: int, moved: Sequence[tuple]) -> TreeGraph:
    h = g.copy()
    w = h.new_vertex()
    for nbr, eid in moved:
        h.adj[v].remove((nbr, eid))
        h.adj[nbr].remove((v, eid))
        h.add_edge(w, nbr, eid)
    h.add_edge(v, w, -1)
    return h


def _graph_expansions(g: TreeGraph, v: int) -> list:
    inc = g.adj[v]
    k = len(inc)
    if k < 4:
        raise TreeError(f"vertex of valence {k} has no expansions")
    rest = inc[1:]
    out = []
    # blocks: {inc[0]} + (rest - S) stays, S moves; both blocks need >= 2 half-edges
    for size in range(2, k - 1):
        for moved in itertools.combinations(rest, size):
            out.append(canonicalize_graph(_split_vertex(g, v, moved)))
    return out


def expansions(t: Tree, vertex: int | None = None) -> list:
    """Signed expansions of ``t`` as ``(tree, sign)`` pairs.

    ``vertex`` indexes a vertex of :func:`tree_to_graph` ``(t)``; by default
    all vertices of valence at least four are expanded.  The new edge is
    numbered first and the old edges keep their reference order.
    """
    g = tree_to_graph(t)
    if vertex is not None:
        return _graph_expansions(g, vertex)
    out = []
    for v in sorted(g.adj):
        if len(g.adj[v]) >= 4:
            out.extend(_graph_expansions(g, v))
    return out


def boundary_of_tree(t: Tree) -> dict:
    """``d t`` over ``Z`` before any torsion reduction: ``{tree: coefficient}``."""
    acc: dict = {}
    for s, sign in expansions(t):
        acc[s] = acc.get(s, 0) + sign
    return {s: c for s, c in acc.items() if c}


def _keep(family: str, ring: Ring, t: Tree) -> bool:
    if family == "Lbar" and is_leaf_bracket(t):
        return False
    if ring is Ring.ZHALF and has_reversing_automorphism(t):
        return False
    return True


def reduce_chain(chain: dict, family: str, ring: Ring) -> dict:
    """Express a ``Z``-chain in the generators of ``family`` over ``ring``."""
    out = {}
    for t, c in chain.items():
        if not _keep(family, ring, t):
            continue
        c = normalize(ring, c, ring is Ring.Z and has_reversing_automorphism(t))
        if c:
            out[t] = c
    return out


def boundary(chain: dict, family: str, ring: Ring = Ring.Z, degree: int | None = None) -> dict:
    """Boundary of a chain ``{tree: coefficient}`` in the given complex."""
    acc: dict = {}
    for t, c in chain.items():
        if degree is not None and tree_degree(t) != degree:
            raise ValueError(f"{to_text(t)} does not have degree {degree}")
        for s, e in boundary_of_tree(t).items():
            acc[s] = acc.get(s, 0) + c * e
    return reduce_chain(acc, family, ring)


# ---------------------------------------------------------------------------
# complexes


@dataclass
class GradedComplex(ChainComplex):
    """Chain complex of trees with a fixed signature."""

    family: str = "L"
    signature: tuple = ()

    def kinds(self, k: int) -> list:
        if self.ring is not Ring.Z:
            return [GeneratorKind.FREE] * self.size(k)
        return [GeneratorKind.TWO_TORSION if f else GeneratorKind.FREE for f in self.torsion_flags(k)]

    def chain_to_vector(self, k: int, chain: dict) -> dict:
        idx = self.index(k)
        return {idx[t]: c for t, c in chain.items()}

    def vector_to_chain(self, k: int, vec) -> dict:
        gens = self.gens[k]
        items = vec.items() if isinstance(vec, dict) else enumerate(vec)
        return {gens[i]: c for i, c in items if c}


def degree_range(family: str, sig: Sequence[int]) -> range:
    n = sum(sig)
    if family == "L":
        if n < 2:
            raise ValueError("L needs at least two leaves")
        return range(0, n - 1)
    if family in ("T", "Lbar"):
        if n < 3:
            raise ValueError(f"{family} needs at least three leaves")
        return range(0, n - 2) if family == "T" else range(0, n - 1)
    raise ValueError(f"unknown family {family!r}")


def generators(family: str, sig: Sequence[int], k: int, ring: Ring = Ring.Z) -> list:
    if family == "T":
        trees = enumerate_unrooted(sig, k)
    else:
        trees = enumerate_rooted(sig, k)
    return [t for t in trees if _keep(family, ring, t)]


def build_complex(family: str, sig: Sequence[int], ring: Ring | str = Ring.Z,
                  max_degree: int | None = None, min_degree: int = 0) -> GradedComplex:
    """Build the complex of ``family`` for signature ``sig`` over ``ring``.

    Only degrees ``min_degree .. max_degree`` are generated (all by default);
    the boundary out of ``min_degree`` is omitted.
    """
    if isinstance(ring, str):
        ring = Ring.parse(ring)
    sig = tuple(sig)
    degs = [k for k in degree_range(family, sig)
            if k >= min_degree and (max_degree is None or k <= max_degree)]
    gens = {k: generators(family, sig, k, ring) for k in degs}
    torsion = {k: [ring is Ring.Z and has_reversing_automorphism(t) for t in gens[k]] for k in degs}
    C = GradedComplex(ring, gens, torsion, {}, family, sig)
    for k in degs:
        if k - 1 not in gens:
            continue
        idx = C.index(k - 1)
        flags = torsion[k - 1]
        m = SparseMatrix.zeros(len(gens[k - 1]), len(gens[k]))
        for j, t in enumerate(gens[k]):
            col = {}
            for s, c in boundary_of_tree(t).items():
                i = idx.get(s)
                if i is None:
                    continue
                c = normalize(ring, c, flags[i])
                if c:
                    col[i] = c
            if torsion[k][j] and any(not flags[i] for i in col):
                raise AssertionError(f"2-torsion generator {to_text(t)} has a free boundary term")
            m.cols[j] = col
        C.d[k] = m
    return C


def projection_matrix(sig: Sequence[int], k: int, ring: Ring = Ring.Z) -> SparseMatrix:
    """Quotient map ``L_k -> Lbar_k`` in the chosen bases."""
    src = generators("L", sig, k, ring)
    idx = {t: i for i, t in enumerate(generators("Lbar", sig, k, ring))}
    m = SparseMatrix.zeros(len(idx), len(src))
    for j, t in enumerate(src):
        if t in idx:
            m.cols[j] = {idx[t]: 1}
    return m


def bracket_chain_map(i: int, chain: dict, ring: Ring = Ring.Z) -> dict:
    """``X_i (x) J -> (i, J)`` extended linearly."""
    acc: dict = {}
    for t, c in chain.items():
        s, sign = bracket(i, t)
        acc[s] = acc.get(s, 0) + sign * c
    return reduce_chain(acc, "L", ring)


def _shift(sig: Sequence[int], i: int, delta: int) -> tuple:
    out = list(sig)
    out[i - 1] += delta
    return tuple(out)


def bracket_matrix(sig: Sequence[int], k: int, ring: Ring = Ring.Z) -> tuple:
    """Matrix of ``br: sum_i X_i (x) L_{sig - e_i} -> L_sig`` in degree ``k``.

    Returns ``(matrix, source)`` where ``source`` lists ``(i, J)`` pairs.
    """
    target = {t: j for j, t in enumerate(generators("L", sig, k, ring))}
    source = []
    for i in range(1, len(sig) + 1):
        if sig[i - 1] == 0:
            continue
        sub = _shift(sig, i, -1)
        if sum(sub) < 2:
            continue
        source += [(i, J) for J in generators("L", sub, k, ring)]
    m = SparseMatrix.zeros(len(target), len(source))
    for j, (i, J) in enumerate(source):
        m.cols[j] = {target[t]: c for t, c in bracket_chain_map(i, {J: 1}, ring).items()}
    return m, source


# ---------------------------------------------------------------------------
# cache files


def cache_key(family: str, sig: Sequence[int], ring: Ring, max_degree: int | None) -> str:
    top = "all" if max_degree is None else str(max_degree)
    sigtxt = "-".join(str(x) for x in sig)
    ringtxt = {Ring.Z: "Z", Ring.Z2: "Z2", Ring.ZHALF: "Zhalf"}[ring]
    return f"{family}_{sigtxt}_{ringtxt}_d{top}_v{__version__}.cx"


def write_complex(C: GradedComplex, path: str | os.PathLike) -> None:
    lines = [
        f"# treehomology complex format {CACHE_FORMAT}",
        f"family {C.family}",
        "signature " + ",".join(str(x) for x in C.signature),
        f"ring {C.ring.value}",
        f"version {__version__}",
        "degrees " + " ".join(str(k) for k in C.degrees()),
    ]
    for k in C.degrees():
        lines.append(f"generators {k} {C.size(k)}")
        for t, f in zip(C.gens[k], C.torsion_flags(k)):
            lines.append(("Z2 " if f else "Z ") + to_text(t))
    for k in sorted(C.d):
        m = C.d[k]
        lines.append(f"boundary {k} {m.nrows} {m.ncols} {m.nnz()}")
        lines += [f"{i + 1} {j + 1} {v}" for i, j, v in m.triplets()]
    tmp = Path(str(path) + ".tmp")
    tmp.write_text("\n".join(lines) + "\n")
    os.replace(tmp, path)


def read_complex(path: str | os.PathLike) -> GradedComplex:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("# treehomology complex"):
        raise ValueError(f"{path} is not a complex cache file")
    head = {}
    pos = 1
    while pos < len(lines) and not lines[pos].startswith("generators"):
        key, _, val = lines[pos].partition(" ")
        head[key] = val
        pos += 1
    if head.get("version") != __version__:
        raise ValueError(f"cache version {head.get('version')} does not match {__version__}")
    ring = Ring(head["ring"])
    sig = tuple(int(x) for x in head["signature"].split(","))
    gens, torsion, d = {}, {}, {}
    while pos < len(lines):
        parts = lines[pos].split()
        pos += 1
        if parts[0] == "generators":
            k, cnt = int(parts[1]), int(parts[2])
            gens[k], torsion[k] = [], []
            for ln in lines[pos:pos + cnt]:
                kind, txt = ln.split(" ", 1)
                gens[k].append(from_text(txt))
                torsion[k].append(kind == "Z2")
            pos += cnt
        elif parts[0] == "boundary":
            k, nr, nc, nnz = (int(x) for x in parts[1:5])
            trip = []
            for ln in lines[pos:pos + nnz]:
                i, j, v = ln.split()
                trip.append((int(i) - 1, int(j) - 1, normalize(ring, Fraction(v)) if ring is Ring.ZHALF else int(v)))
            pos += nnz
            d[k] = SparseMatrix.from_triplets(nr, nc, trip)
        else:
            raise ValueError(f"unexpected line {lines[pos - 1]!r}")
    return GradedComplex(ring, gens, torsion, d, head["family"], sig)


def cached_complex(family: str, sig: Sequence[int], ring: Ring = Ring.Z,
                   max_degree: int | None = None, cache_dir: str | os.PathLike | None = None) -> GradedComplex:
    """:func:`build_complex` backed by an optional on-disk cache."""
    if cache_dir is None:
        return build_complex(family, sig, ring, max_degree)
    path = Path(cache_dir) / cache_key(family, sig, ring, max_degree)
    if path.exists():
        try:
            return read_complex(path)
        except (ValueError, KeyError):
            pass
    C = build_complex(family, sig, ring, max_degree)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_complex(C, path)
    return C


def signatures(n: int, m: int, positive: bool = False) -> Iterable[tuple]:
    """All ``m``-tuples of nonnegative integers summing to ``n``."""
    for cut in itertools.combinations(range(n + m - 1), m - 1):
        prev, sig = -1, []
        for c in cut + (n + m - 1,):
            sig.append(c - prev - 1)
            prev = c
        if not positive or all(sig):
            yield tuple(sig)
