import random

import pytest
from hypothesis import given, settings, strategies as st

from treehomology.complexes import build_complex
from treehomology.exactlinalg import ChainComplex, Ring, SparseMatrix, homology, homology_all
from treehomology.morse import (
    InvalidField,
    RandomComplexConfig,
    VectorField,
    check_identities,
    flow,
    morse_data,
    morse_homology_cross_check,
    path_weights_naive,
    random_complex,
    random_gradient_field,
    validate_field,
)

rings = st.sampled_from(list(Ring))


@settings(max_examples=40)
@given(st.integers(0, 10**9), rings)
def test_random_complex_has_the_announced_homology(seed, ring):
    C, known = random_complex(random.Random(seed), RandomComplexConfig(ring=ring))
    assert C.check_d_squared()
    for k in C.degrees():
        assert homology(C, k, reduce=False) == known[k]


@settings(max_examples=40)
@given(st.integers(0, 10**9), rings)
def test_morse_complex_identities(seed, ring):
    rng = random.Random(seed)
    C, known = random_complex(rng, RandomComplexConfig(ring=ring, max_generators=25))
    F = random_gradient_field(C, rng)
    assert validate_field(C, F).ok
    data = morse_data(C, F)
    assert check_identities(data) == []
    M = data.complex()
    assert M.check_d_squared()
    for k in C.degrees():
        assert homology(M, k, reduce=False) == known[k]


@settings(max_examples=25)
@given(st.integers(0, 10**9), rings)
def test_dynamic_programming_matches_path_enumeration(seed, ring):
    rng = random.Random(seed)
    C, _ = random_complex(rng, RandomComplexConfig(ring=ring, max_generators=16))
    F = random_gradient_field(C, rng)
    data = morse_data(C, F)
    for k in C.degrees():
        if k - 1 not in C.gens:
            continue
        crit_below = data.critical[k - 1]
        for j, b in enumerate(data.critical[k]):
            naive = path_weights_naive(C, F, k, b)
            dp = {crit_below[p]: v for p, v in data.d[k].cols[j].items()}
            assert naive == dp


def interval():
    # two vertices joined by one edge
    d = SparseMatrix.from_dense([[-1], [1]])
    return ChainComplex(Ring.Z, {0: ["a", "b"], 1: ["e"]}, {0: [False, False], 1: [False]}, {1: d})


def test_single_pair_is_the_quotient_by_an_acyclic_subcomplex():
    C = interval()
    F = VectorField()
    F.add(1, "a", "e")
    data = morse_data(C, F)
    assert data.critical_generators(0) == ["b"]
    assert data.critical_generators(1) == []
    # flowing a lands on b with the coefficient that kills the boundary of e
    assert flow(C, F, 0, {"a": 1}, data) == {"b": 1}
    assert morse_homology_cross_check(C, F)


def square():
    # boundary of a square: four vertices, four edges
    d = SparseMatrix.from_dense([[-1, 0, 0, 1], [1, -1, 0, 0], [0, 1, -1, 0], [0, 0, 1, -1]])
    return ChainComplex(Ring.Z, {0: list("abcd"), 1: ["ab", "bc", "cd", "da"]}, {0: [False] * 4, 1: [False] * 4}, {1: d})


def test_closed_gradient_path_is_rejected():
    C = square()
    F = VectorField()
    F.add(1, "a", "ab")
    F.add(1, "b", "bc")
    F.add(1, "c", "cd")
    F.add(1, "d", "da")
    rep = validate_field(C, F)
    assert not rep.ok and rep.cycle
    with pytest.raises(InvalidField):
        morse_data(C, F)


def test_invalid_pairs_are_reported():
    C = square()
    bad = VectorField()
    bad.add(1, "a", "bc")  # not an incidence
    assert not validate_field(C, bad).ok
    twice = VectorField()
    twice.add(1, "a", "ab")
    twice.add(1, "b", "ab")
    assert not validate_field(C, twice).ok


def test_non_unit_coefficient_is_rejected():
    d = SparseMatrix.from_dense([[2]])
    C = ChainComplex(Ring.Z, {0: ["v"], 1: ["e"]}, {0: [False], 1: [False]}, {1: d})
    F = VectorField()
    F.add(1, "v", "e")
    assert not validate_field(C, F).ok
    CH = ChainComplex(Ring.ZHALF, C.gens, C.torsion, C.d)
    assert validate_field(CH, F).ok


def test_mixed_kinds_are_rejected():
    d = SparseMatrix.from_dense([[1]])
    C = ChainComplex(Ring.Z, {0: ["v"], 1: ["e"]}, {0: [True], 1: [False]}, {1: d})
    F = VectorField()
    F.add(1, "v", "e")
    assert not validate_field(C, F).ok


@pytest.mark.parametrize("sig", [(2, 2), (1, 1, 1, 1), (2, 2, 1)])
def test_random_fields_on_tree_complexes(sig):
    rng = random.Random(sum(sig))
    for ring in Ring:
        C = build_complex("L", sig, ring)
        F = random_gradient_field(C, rng)
        data = morse_data(C, F)
        assert check_identities(data) == []
        assert homology_all(data.complex(), reduce=False) == homology_all(C)
