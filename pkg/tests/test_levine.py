import pytest
from hypothesis import given, settings, strategies as st

from treehomology.complexes import boundary, build_complex, signatures
from treehomology.exactlinalg import AbelianGroup, Ring, homology, normalize
from treehomology.levine import (
    _underlying,
    at_basepoint,
    at_endpoint,
    basepoint,
    beta_matrix,
    beta_tree,
    compute_dprime,
    dprime_signature,
    eta_prime,
    levine_signature,
    reroot_at_leaf,
    root_slide,
    root_slide_field,
    verify_levine_iso,
    verify_section5,
)
from treehomology.morse import validate_field
from treehomology.trees import (
    bracket,
    degree,
    enumerate_unrooted,
    from_text,
    has_reversing_automorphism,
    to_text,
    tree_degree,
    tree_to_graph,
)


def _positive(max_weight, min_weight=3):
    return [s for n in range(min_weight, max_weight + 1) for m in range(1, n + 1) for s in signatures(n, m, positive=True)]


# ---------------------------------------------------------------------------
# beta


@pytest.mark.parametrize("sig", [(1, 1, 1, 1), (2, 2, 1), (1, 1, 1, 1, 1), (3, 3), (2, 2, 2), (1, 1, 2, 2)])
def test_beta_is_a_chain_map(sig):
    T = build_complex("T", sig)
    Lb = build_complex("Lbar", sig)
    for k in T.degrees():
        if k == 0:
            continue
        lhs = Lb.boundary(k + 1).matmul(beta_matrix(T, Lb, k)).to_dense()
        rhs = beta_matrix(T, Lb, k - 1).matmul(T.boundary(k)).to_dense()
        flags = Lb.torsion_flags(k)
        for i, (a, b) in enumerate(zip(lhs, rhs)):
            assert all(normalize(Ring.Z, x - y, flags[i]) == 0 for x, y in zip(a, b))


def test_beta_of_tripod_is_one_tree():
    assert beta_tree(from_text("@(1,2,3)")) == {(1, 2, 3): 1}


def test_beta_has_one_term_per_internal_vertex():
    t = from_text("<(1,2),(3,4)>")
    assert len(beta_tree(t)) == 2
    assert all(degree(s) == 1 for s in beta_tree(t))


def test_beta_kills_twins_with_odd_halves():
    t = from_text("<(1,1,2),(1,1,2)>")
    assert tree_degree(t) == 2
    assert all(v % 2 == 0 for v in beta_tree(t).values())


# ---------------------------------------------------------------------------
# eta'


@pytest.mark.parametrize("sig", _positive(6))
def test_eta_prime_is_the_boundary_of_the_rooted_sum(sig):
    # d(t^r) in L consists of leaf brackets (l_v, B_v); unbracketing gives eta'(t)
    for t in enumerate_unrooted(sig, 0):
        d = boundary(beta_tree(t), "L")
        img: dict = {}
        for (i, B), c in eta_prime(t).items():
            s, sign = bracket(i, B)
            img[s] = img.get(s, 0) + sign * c
        torsion = has_reversing_automorphism(t)
        clean = lambda ch: {k: v % 2 if torsion else v for k, v in ch.items() if (v % 2 if torsion else v)}
        assert clean(img) == clean(d), to_text(t)


def test_eta_prime_tripod_has_three_terms():
    e = eta_prime(from_text("@(1,2,3)"))
    assert sorted(i for i, _ in e) == [1, 2, 3]
    assert all(abs(c) == 1 for c in e.values())


def test_eta_prime_four_leaf_example():
    # leaves i, j, k, l = 1, 2, 3, 4 with cherries (i, l) and (j, k)
    t = from_text("<(1,4),(2,3)>")
    got = {(i, to_text(B)) for i, B in eta_prime(t)}
    want = {
        (4, to_text(from_text("(1,(2,3))"))),
        (1, to_text(from_text("((3,2),4)"))),
        (2, to_text(from_text("(3,(4,1))"))),
        (3, to_text(from_text("((1,4),2)"))),
    }
    assert got == want
    assert all(abs(c) == 1 for c in eta_prime(t).values())


def test_reroot_returns_a_leaf_bracket():
    g = tree_to_graph(from_text("<(1,2),(3,4)>"))
    for v in g.leaf_labels:
        label, B, sign = reroot_at_leaf(g, v)
        assert label == g.leaf_labels[v] and sign in (1, -1)


# ---------------------------------------------------------------------------
# D' and the isomorphism


@pytest.mark.parametrize("sig", [(2, 1), (2, 2), (3, 2), (2, 3), (3, 3), (1, 1, 1, 1), (2, 2, 1), (4, 2), (1, 1, 1, 1, 1)])
def test_dprime_is_h1_of_lbar(sig):
    Lb = build_complex("Lbar", sig, Ring.Z, max_degree=2)
    assert homology(Lb, 1) == dprime_signature(sig).group


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_dprime_torsion_pattern(n):
    g = compute_dprime(n, 2)
    if n % 2 == 0:
        assert not g.torsion
    else:
        assert all(d == 2 for d in g.torsion)


def test_dprime_known_values():
    assert compute_dprime(2, 2) == AbelianGroup(1, ())
    assert dprime_signature((2, 3)).group == AbelianGroup(0, (2,))


@pytest.mark.parametrize("n, m", [(1, 2), (2, 2), (3, 2), (3, 1), (1, 3), (2, 3)])
def test_levine_map_is_an_isomorphism(n, m):
    for rep in verify_levine_iso(n, m):
        assert rep.lands_in_dprime and rep.well_defined
        assert rep.surjective and rep.injective and rep.isomorphism
        assert rep.t_group == rep.dprime_group
        assert rep.kernel_killed_by(n + 2)


def test_levine_report_with_torsion():
    rep = levine_signature((2, 3))
    assert rep.t_group == AbelianGroup(0, (2,)) and rep.isomorphism
    d = rep.as_dict()
    assert d["T"] == "Z2" and d["isomorphism"] is True


# ---------------------------------------------------------------------------
# basepoints and the root-slide field


def test_basepoints():
    tripod = tree_to_graph(from_text("@(1,2,3)"))
    assert len(basepoint(tripod)) == 1
    twin = tree_to_graph(from_text("<(1,2),(1,2)>"))
    assert len(basepoint(twin)) == 2
    lopsided = tree_to_graph(from_text("<(1,2),(1,3)>"))
    (v,) = basepoint(lopsided)
    assert sorted(lopsided.leaf_labels[w] for w, _ in lopsided.adj[v] if w in lopsided.leaf_labels) == [1, 2]


def test_root_slide_examples():
    # the root moves away from the centre y of 1,2 - x - y - z - 3,4
    assert root_slide(from_text("((1,2),((3,4),5))")) == from_text("(1,2,((3,4),5))")
    assert root_slide(from_text("((1,2),(1,2))")) is None
    assert root_slide(from_text("((1,2),3,4)")) is None


def test_underlying_tree_of_a_mid_edge_root():
    g, ends = _underlying(from_text("((1,2),(3,4))"))
    assert len(ends) == 2
    assert sorted(len(g.adj[v]) for v in ends) == [3, 3]


@pytest.mark.parametrize("sig", [(2, 2), (3, 3), (2, 2, 1), (1, 1, 1, 1, 1), (4, 2)])
def test_root_slide_field_is_a_gradient_field(sig):
    Lb = build_complex("Lbar", sig, Ring.Z)
    F = root_slide_field(Lb)
    assert validate_field(Lb, F).ok


def test_twin_representatives():
    t = from_text("<(1,2),(1,2)>")
    assert at_basepoint(t) == from_text("((1,2),(1,2))")
    s = at_endpoint(t)
    assert degree(s) == 1


@settings(max_examples=12)
@given(st.sampled_from(_positive(6)))
def test_section5_structure(sig):
    rep = verify_section5(sig)
    assert rep.ok, rep.errors
    assert rep.as_dict()["ok"]


def test_section5_small_cases():
    for sig in [(2, 2), (2, 2, 1), (3, 3)]:
        rep = verify_section5(sig)
        assert rep.field_ok and rep.critical_ok and rep.phi_beta_ok
        assert rep.cok_acyclic and rep.ker0_vanishes and rep.twin_differential_ok
