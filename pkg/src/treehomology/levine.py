"""Levine's map, the root-attaching chain map and the root-slide field.

The three objects here relate the complexes ``T`` and ``Lbar``:

* ``beta`` sums over the internal vertices of an unrooted tree the rooted
  tree obtained by attaching a root edge there; it is a chain map
  ``T_k -> Lbar_{k+1}``.
* ``eta_prime`` sends an unrooted tree of degree 0 to
  ``sum_v X_{l(v)} (x) B_v``, where ``B_v`` is the tree re-rooted at leaf ``v``.
* ``root_slide_field`` is a gradient vector field on ``Lbar`` over ``Z``
  whose critical generators are the trees with the root at the basepoint.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .complexes import (
    GradedComplex,
    _shift,
    bracket_matrix,
    build_complex,
    signatures,
)
from .exactlinalg import (
    AbelianGroup,
    LatticeCoords,
    Ring,
    SparseMatrix,
    _cat_cols,
    _two_relations,
    invariant_factors,
    kernel_of_map,
    normalize,
    subquotient,
)
from .morse import VectorField, morse_data, validate_field
from .trees import (
    TreeGraph,
    bracket,
    canonicalize_graph,
    degree,
    hall_key,
    graph_center,
    is_unrooted,
    to_text,
    tree_degree,
    tree_to_graph,
)


# ---------------------------------------------------------------------------
# graph helpers


def _attach_root(g: TreeGraph, v: int) -> tuple:
    """Canonical rooted tree with a new root edge at ``v``, numbered first."""
    h = g.copy()
    r = h.new_vertex()
    h.add_edge(r, v, -1)
    h.root = r
    return canonicalize_graph(h)


def _distances(g: TreeGraph, sources: Sequence[int]) -> dict:
    dist = {s: 0 for s in sources}
    queue = deque(sources)
    while queue:
        v = queue.popleft()
        for w, _ in g.adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def _underlying(J) -> tuple:
    """Unrooted graph of a rooted tree and the vertex set carrying the root.

    Returns ``(graph, endpoints)``: ``endpoints`` is ``(v,)`` when the root
    sits at an internal vertex of valence at least three and ``(x, y)`` when
    it subdivides the edge ``x -- y``.
    """
    g = tree_to_graph(J)
    r = g.root
    ((top, e0),) = g.adj[r]
    del g.adj[r]
    g.adj[top] = [(w, e) for w, e in g.adj[top] if w != r]
    g.root = None
    if len(g.adj[top]) >= 3:
        return g, (top,)
    (x, ex), (y, ey) = g.adj[top]
    del g.adj[top]
    g.adj[x] = [(w, e) if w != top else (y, ex) for w, e in g.adj[x]]
    g.adj[y] = [(w, e) if w != top else (x, ex) for w, e in g.adj[y]]
    return g, (x, y)


def basepoint(g: TreeGraph) -> tuple:
    """Basepoint of an unrooted tree graph as a tuple of vertices.

    A single vertex is returned when some internal vertex is fixed by every
    automorphism: the central vertex, or the endpoint of the central edge on
    the Hall-smaller side.  For ``<T, T>`` both endpoints of the central edge
    are returned, standing for its midpoint.
    """
    c = graph_center(g)
    if c[0] == "V":
        return (c[1],)
    _, u, w, m = c
    hu = _half(g, u, w, m)
    hw = _half(g, w, u, m)
    if hu == hw:
        return (u, w)
    return (u,) if hall_key(hu) < hall_key(hw) else (w,)


def _half(g: TreeGraph, v: int, away: int, eid: int):
    h = TreeGraph({}, dict(g.leaf_labels))
    h.adj = {x: list(nb) for x, nb in g.adj.items()}
    h.adj[v] = [(x, e) for x, e in h.adj[v] if x != away]
    h.adj[away] = [(x, e) for x, e in h.adj[away] if x != v]
    r = h.new_vertex()
    h.add_edge(r, v, eid)
    h.root = r
    # canonicalization only walks the component of the root
    return canonicalize_graph(h)[0]


# ---------------------------------------------------------------------------
# beta and eta'


def beta_tree(t) -> dict:
    """``beta(t)`` as a chain of rooted trees (root edge numbered first)."""
    g = tree_to_graph(t)
    sign = -1 if tree_degree(t) % 2 else 1
    acc: dict = {}
    for v in g.internal_vertices():
        s, c = _attach_root(g, v)
        acc[s] = acc.get(s, 0) + sign * c
    return {s: c for s, c in acc.items() if c}


def beta_chain(chain: dict) -> dict:
    acc: dict = {}
    for t, c in chain.items():
        for s, v in beta_tree(t).items():
            acc[s] = acc.get(s, 0) + c * v
    return {s: c for s, c in acc.items() if c}


def beta_matrix(T: GradedComplex, Lb: GradedComplex, k: int) -> SparseMatrix:
    """Matrix of ``beta: T_k -> Lbar_{k+1}``."""
    idx = Lb.index(k + 1)
    flags = Lb.torsion_flags(k + 1)
    m = SparseMatrix.zeros(Lb.size(k + 1), T.size(k))
    for j, t in enumerate(T.gens[k]):
        col = {}
        for s, c in beta_tree(t).items():
            i = idx[s]
            c = normalize(Lb.ring, c, flags[i])
            if c:
                col[i] = c
        m.cols[j] = col
    return m


def reroot_at_leaf(t, leaf: int) -> tuple:
    """``(label, B, sign)``: the tree ``t`` re-rooted at leaf vertex ``leaf``.

    ``sign`` compares the orientation of ``X_label (x) B`` with the one
    induced from ``t``, using the convention in which the root edge of
    ``(label, B)`` comes first and ``t`` keeps its edge order.
    """
    g = tree_to_graph(t) if not isinstance(t, TreeGraph) else t
    h = g.copy()
    label = h.leaf_labels.pop(leaf)
    ((w, e),) = h.adj[leaf]
    # subdivide the leaf edge: root and leaf hang off a new trivalent vertex
    h.adj[leaf] = []
    h.adj[w] = [(x, f) for x, f in h.adj[w] if x != leaf]
    u = h.new_vertex()
    r = h.new_vertex()
    h.add_edge(u, w, -2)
    h.add_edge(r, u, -1)
    h.add_edge(u, leaf, e)
    h.leaf_labels[leaf] = label
    h.root = r
    tree, s = canonicalize_graph(h)
    B = tree[0] if tree[1] == label else tree[1]
    ref, sb = bracket(label, B)
    if ref != tree:
        raise AssertionError(f"re-rooting {to_text(tree)} is not a leaf bracket")
    return label, B, s * sb


def eta_prime(t) -> dict:
    """``eta'(t)`` as ``{(i, B): coefficient}`` for a degree-0 unrooted tree."""
    g = tree_to_graph(t)
    acc: dict = {}
    for v in g.leaf_labels:
        i, B, s = reroot_at_leaf(g, v)
        acc[(i, B)] = acc.get((i, B), 0) + s
    return {k: c for k, c in acc.items() if c}


def eta_prime_chain(chain: dict) -> dict:
    acc: dict = {}
    for t, c in chain.items():
        for key, v in eta_prime(t).items():
            acc[key] = acc.get(key, 0) + c * v
    return {k: c for k, c in acc.items() if c}


# ---------------------------------------------------------------------------
# presentations of H_0


@dataclass
class Presentation:
    """``Z^gens / im relations`` with the generators it is based on."""

    gens: list
    relations: SparseMatrix

    @property
    def size(self) -> int:
        return len(self.gens)


def _h0_presentation(family: str, sig: Sequence[int]) -> Presentation:
    C = build_complex(family, sig, Ring.Z, max_degree=1)
    rel = _two_relations(C.torsion_flags(0))
    if 1 in C.d:
        rel = _cat_cols(C.boundary(1), rel)
    return Presentation(list(C.gens[0]), rel)


def _block_diag(blocks: Sequence[SparseMatrix]) -> SparseMatrix:
    nrows = sum(b.nrows for b in blocks)
    cols = []
    off = 0
    for b in blocks:
        cols += [{i + off: v for i, v in c.items()} for c in b.cols]
        off += b.nrows
    return SparseMatrix(nrows, len(cols), cols)


def _dense_cols(m: SparseMatrix) -> list:
    out = []
    for c in m.cols:
        v = [0] * m.nrows
        for i, x in c.items():
            v[i] = x
        out.append(v)
    return out


@dataclass
class DPrimeData:
    """``D'_sig`` as the kernel of the bracket on ``H_0(L)`` presentations."""

    signature: tuple
    group: AbelianGroup
    source: list
    source_relations: SparseMatrix
    target: Presentation
    bracket: SparseMatrix
    lattice_basis: list


def dprime_signature(sig: Sequence[int]) -> DPrimeData:
    """``D'`` in signature ``sig``: kernel of ``sum_i X_i (x) L'_{sig-e_i} -> L'_sig``."""
    sig = tuple(sig)
    F, source = bracket_matrix(sig, 0, Ring.Z)
    blocks = []
    for i in range(1, len(sig) + 1):
        if sig[i - 1] and sum(sig) - 1 >= 2:
            blocks.append(_h0_presentation("L", _shift(sig, i, -1)).relations)
    rel_src = _block_diag(blocks)
    target = _h0_presentation("L", sig)
    sq = kernel_of_map(F, rel_src, target.relations, n=len(source))
    return DPrimeData(sig, sq.group, source, rel_src, target, F, sq.lattice_basis)


def _sum_groups(groups) -> AbelianGroup:
    rank, factors = 0, []
    for g in groups:
        rank += g.rank
        factors += list(g.torsion)
    return AbelianGroup.from_factors(rank, factors)


def compute_dprime(n: int, m: int) -> AbelianGroup:
    """``D'_n`` for ``m`` generators: the sum over signatures of weight ``n + 2``."""
    return _sum_groups(dprime_signature(sig).group for sig in signatures(n + 2, m))


# ---------------------------------------------------------------------------
# the Levine map on H_0


@dataclass
class LevineReport:
    signature: tuple
    t_group: AbelianGroup
    dprime_group: AbelianGroup
    lands_in_dprime: bool
    well_defined: bool
    surjective: bool
    kernel: AbelianGroup
    cokernel: AbelianGroup

    @property
    def injective(self) -> bool:
        return self.kernel.is_trivial()

    @property
    def isomorphism(self) -> bool:
        return self.well_defined and self.lands_in_dprime and self.surjective and self.injective

    def kernel_killed_by(self, k: int) -> bool:
        return self.kernel.rank == 0 and all(k % f == 0 for f in self.kernel.torsion)

    def as_dict(self) -> dict:
        return {
            "signature": list(self.signature),
            "T": str(self.t_group),
            "Dprime": str(self.dprime_group),
            "lands_in_dprime": self.lands_in_dprime,
            "well_defined": self.well_defined,
            "surjective": self.surjective,
            "injective": self.injective,
            "isomorphism": self.isomorphism,
            "kernel": str(self.kernel),
            "cokernel": str(self.cokernel),
        }


def eta_prime_matrix(T0: Sequence, source: Sequence) -> SparseMatrix:
    """Matrix of ``eta'`` from degree-0 unrooted trees to ``(i, J)`` pairs."""
    idx = {key: j for j, key in enumerate(source)}
    m = SparseMatrix.zeros(len(source), len(T0))
    for j, t in enumerate(T0):
        m.cols[j] = {idx[key]: c for key, c in eta_prime(t).items()}
    return m


def levine_signature(sig: Sequence[int]) -> LevineReport:
    """Check that ``eta'`` induces an isomorphism ``H_0(T)_sig -> D'_sig``."""
    sig = tuple(sig)
    D = dprime_signature(sig)
    T = _h0_presentation("T", sig)
    E = eta_prime_matrix(T.gens, D.source)
    basis = D.lattice_basis
    z = len(basis)
    nsrc = len(D.source)
    coords = LatticeCoords(basis, nsrc)
    e_hat, lands = [], True
    for col in _dense_cols(E):
        c = coords.solve(col)
        if c is None:
            lands = False
            break
        e_hat.append(c)
    r_hat = [coords.solve(col) for col in _dense_cols(D.source_relations)]
    if not lands or any(c is None for c in r_hat):
        bad = AbelianGroup()
        return LevineReport(sig, _present(T), D.group, lands, False, False, bad, bad)
    rel_lat = LatticeCoords(r_hat, z)
    t_rel = _dense_cols(T.relations)
    well = all(rel_lat.contains(_apply(e_hat, col, z)) for col in t_rel)
    if z:
        M = [[c[i] for c in e_hat + r_hat] for i in range(z)]
        diag = invariant_factors(M) if M and M[0] else []
        nz = [abs(d) for d in diag if d]
        coker = AbelianGroup.from_factors(z - len(nz), [d for d in nz if d != 1])
    else:
        coker = AbelianGroup()
    Ehat = SparseMatrix.from_dense([[c[i] for c in e_hat] for i in range(z)]) if z else SparseMatrix.zeros(0, T.size)
    Rhat = SparseMatrix.from_dense([[c[i] for c in r_hat] for i in range(z)]) if z else SparseMatrix.zeros(0, 0)
    ker = kernel_of_map(Ehat, T.relations, Rhat, n=T.size).group if well else AbelianGroup()
    return LevineReport(sig, _present(T), D.group, lands, well, coker.is_trivial(), ker, coker)


def _apply(cols: list, x: Sequence[int], z: int) -> list:
    out = [0] * z
    for j, v in enumerate(x):
        if v:
            for i in range(z):
                out[i] += cols[j][i] * v
    return out


def _present(P: Presentation) -> AbelianGroup:
    return subquotient(P.size, None, None, P.relations).group


def verify_levine_iso(n: int, m: int) -> list:
    """Per-signature reports for all signatures of weight ``n + 2`` in ``m`` letters."""
    return [levine_signature(sig) for sig in signatures(n + 2, m)]


# ---------------------------------------------------------------------------
# the root-slide vector field on Lbar


def root_slide(J):
    """``Delta(J)`` for a rooted tree of ``Lbar``, or ``None`` when it vanishes."""
    g, ends = _underlying(J)
    if len(ends) == 1:
        return None
    b = basepoint(g)
    if set(b) == set(ends):
        return None
    dist = _distances(g, b)
    x, y = ends
    far = x if dist[x] > dist[y] else y
    return _attach_root(g, far)[0]


def root_slide_field(Lb: GradedComplex) -> VectorField:
    F = VectorField()
    for k in Lb.degrees():
        for J in Lb.gens[k]:
            D = root_slide(J)
            if D is not None:
                F.add(k + 1, J, D)
    return F


def _is_twin(t) -> bool:
    return is_unrooted(t) and t[0] == "E" and t[1] == t[2]


def at_basepoint(t):
    """``t^b``: the root attached at the basepoint (``(T, T)`` for ``<T, T>``)."""
    if _is_twin(t):
        return (t[1], t[1])
    g = tree_to_graph(t)
    (v,) = basepoint(g)
    return _attach_root(g, v)[0]


def at_endpoint(t):
    """``<T, T>^s``: the root attached at an endpoint of the central edge."""
    g = tree_to_graph(t)
    u, _ = basepoint(g)
    return _attach_root(g, u)[0]


@dataclass
class Section5Report:
    signature: tuple
    field_ok: bool
    critical_ok: bool
    phi_beta_ok: bool
    cok_acyclic: bool
    ker0_vanishes: bool
    twin_differential_ok: bool
    errors: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return (self.field_ok and self.critical_ok and self.phi_beta_ok and self.cok_acyclic
                and self.ker0_vanishes and self.twin_differential_ok)

    def as_dict(self) -> dict:
        return {
            "signature": list(self.signature),
            "ok": self.ok,
            "field_ok": self.field_ok,
            "critical_ok": self.critical_ok,
            "phi_beta_ok": self.phi_beta_ok,
            "cok_acyclic": self.cok_acyclic,
            "ker0_vanishes": self.ker0_vanishes,
            "twin_differential_ok": self.twin_differential_ok,
            "errors": list(self.errors),
            "counts": {str(k): v for k, v in self.counts.items()},
        }


def _col_vec(col: dict, n: int) -> list:
    v = [0] * n
    for i, x in col.items():
        v[i] = x
    return v


def verify_section5(sig: Sequence[int]) -> Section5Report:
    """Check the root-slide field on ``Lbar_sig`` and its relation to ``beta``."""
    sig = tuple(sig)
    Lb = build_complex("Lbar", sig, Ring.Z)
    T = build_complex("T", sig, Ring.Z)
    F = root_slide_field(Lb)
    rep = Section5Report(sig, False, False, False, False, False, False)
    val = validate_field(Lb, F)
    rep.field_ok = val.ok
    if not val.ok:
        rep.errors += val.errors
        return rep
    data = morse_data(Lb, F, check=False)
    crit = {k: set(data.critical_generators(k)) for k in Lb.degrees()}
    rep.counts = {k: len(crit[k]) for k in Lb.degrees()}

    # expected critical set
    expected = {k: set() for k in Lb.degrees()}
    twins = []
    for k in T.degrees():
        for t in T.gens[k]:
            if _is_twin(t):
                expected[k].add(at_basepoint(t))
                expected[k + 1].add(at_endpoint(t))
                twins.append((k, t))
            else:
                expected[k + 1].add(at_basepoint(t))
    rep.critical_ok = crit == expected
    if not rep.critical_ok:
        rep.errors.append("critical set differs from {t^b} + {<T,T>^s}")

    # phi beta on each generator of T
    P = {}
    ok = True
    for k in T.degrees():
        if k + 1 not in Lb.gens:
            continue
        B = beta_matrix(T, Lb, k)
        flags = [Lb.torsion_flags(k + 1)[i] for i in data.critical[k + 1]]
        Pk = data.flow[k + 1].matmul(B)
        Pk.cols = [{i: w for i, v in c.items() if (w := normalize(Ring.Z, v, flags[i]))} for c in Pk.cols]
        P[k + 1] = Pk
        crit_idx = {g: i for i, g in enumerate(data.critical_generators(k + 1))}
        for j, t in enumerate(T.gens[k]):
            col = Pk.cols[j]
            if _is_twin(t):
                s = crit_idx[at_endpoint(t)]
                tors = flags[s]
                want = {} if degree(t[1]) % 2 or tors else {s: 2}
                got = {i: abs(v) for i, v in col.items()}
            else:
                s = crit_idx[at_basepoint(t)]
                want = {s: 1}
                got = {i: abs(v) for i, v in col.items()}
            if got != want:
                ok = False
                rep.errors.append(f"phi beta({to_text(t)}) = {col}")
    rep.phi_beta_ok = ok

    # Cok = L^Delta / im(phi beta) is acyclic
    M = data.complex()
    acyclic = True
    for j in M.degrees():
        n = M.size(j)
        if n == 0:
            continue
        G = _two_relations(M.torsion_flags(j))
        if j + 1 in M.d:
            G = _cat_cols(M.boundary(j + 1), G)
        if j in P:
            G = _cat_cols(G, P[j])
        if j - 1 in M.gens and j in M.d:
            R = _two_relations(M.torsion_flags(j - 1))
            if j - 1 in P:
                R = _cat_cols(R, P[j - 1])
            H = subquotient(n, M.boundary(j), R, G, target_rows=M.size(j - 1)).group
        else:
            H = subquotient(n, None, None, G).group
        if not H.is_trivial():
            acyclic = False
            rep.errors.append(f"Cok has homology {H} in degree {j}")
    rep.cok_acyclic = acyclic

    # Ker_0 of phi beta vanishes in H_0(T)
    n0 = T.size(0)
    if 1 in P:
        K = subquotient(n0, P[1], _two_relations(M.torsion_flags(1)), _two_relations(T.torsion_flags(0)),
                        target_rows=M.size(1))
        rel = _two_relations(T.torsion_flags(0))
        if 1 in T.d:
            rel = _cat_cols(T.boundary(1), rel)
        lat = LatticeCoords(_dense_cols(rel), n0)
        rep.ker0_vanishes = all(lat.contains(v) for v in K.generators)
        if not rep.ker0_vanishes:
            rep.errors.append("a class of Ker_0 survives in H_0(T)")
    else:
        rep.ker0_vanishes = True

    # d^Delta <J,J>^s = +-(J,J) in Cok, i.e. away from the cells t^b = phi beta(t)
    tw_ok = True
    image_cells = {k: {at_basepoint(t) for t in T.gens[k - 1] if not _is_twin(t)}
                   for k in M.degrees() if k - 1 in T.gens}
    for k, t in twins:
        s = at_endpoint(t)
        col = M.boundary(k + 1).cols[M.index(k + 1)[s]]
        tgt = M.index(k)[at_basepoint(t)]
        gens = M.gens[k]
        kept = {i: abs(v) for i, v in col.items() if gens[i] not in image_cells.get(k, ())}
        if kept != {tgt: 1}:
            tw_ok = False
            rep.errors.append(f"d^Delta of {to_text(s)} is {col}")
    rep.twin_differential_ok = tw_ok
    return rep
