import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from treehomology.exactlinalg import (
    AbelianGroup,
    ChainComplex,
    LatticeCoords,
    Ring,
    SparseMatrix,
    divide,
    homology,
    homology_all,
    invariant_factors,
    is_unit,
    kernel_of_map,
    normalize,
    rank_mod2,
    reduce_complex,
    smith_normal_form,
    solve_in_lattice,
    subquotient,
)


def det(M):
    """Exact determinant by fraction-valued elimination."""
    n = len(M)
    A = [[Fraction(x) for x in row] for row in M]
    out = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c]), None)
        if p is None:
            return 0
        if p != c:
            A[c], A[p] = A[p], A[c]
            out = -out
        out *= A[c][c]
        for r in range(c + 1, n):
            f = A[r][c] / A[c][c]
            for k in range(c, n):
                A[r][k] -= f * A[c][k]
    return int(out)


def determinantal_factors(M):
    """Invariant factors as ratios of gcds of k x k minors."""
    m, n = len(M), len(M[0]) if M else 0
    prev, out = 1, []
    for k in range(1, min(m, n) + 1):
        g = 0
        for rows in itertools.combinations(range(m), k):
            for cols in itertools.combinations(range(n), k):
                g = math.gcd(g, det([[M[i][j] for j in cols] for i in rows]))
        if g == 0:
            break
        out.append(g // prev)
        prev = g
    return out


def matmul(A, B):
    return [[sum(a * b for a, b in zip(row, col)) for col in zip(*B)] for row in A]


small_matrices = st.integers(1, 4).flatmap(
    lambda m: st.integers(1, 4).flatmap(
        lambda n: st.lists(st.lists(st.integers(-6, 6), min_size=n, max_size=n), min_size=m, max_size=m)
    )
)


@given(small_matrices)
def test_smith_form_matches_determinantal_divisors(M):
    assert invariant_factors(M) == determinantal_factors(M)
    assert [abs(d) for d in smith_normal_form(M).nonzero()] == determinantal_factors(M)


@given(small_matrices)
def test_smith_transforms(M):
    s = smith_normal_form(M, transforms=True)
    D = matmul(matmul(s.U, M), s.V)
    for i, row in enumerate(D):
        for j, x in enumerate(row):
            assert x == (s.diag[i] if i == j and i < len(s.diag) else 0)
    n = len(M)
    assert matmul(s.U, s.Uinv) == [[int(i == j) for j in range(n)] for i in range(n)]


def test_smith_examples():
    assert invariant_factors([[2, 0], [0, 3]]) == [1, 6]
    assert invariant_factors([[2, 4], [6, 8]]) == [2, 4]
    assert invariant_factors([[0, 0], [0, 0]]) == []


@given(small_matrices)
def test_rank_mod2_matches_brute_force(M):
    n = len(M[0])
    vectors = [tuple(x % 2 for x in row) for row in M]
    span = {tuple([0] * n)}
    for v in vectors:
        span |= {tuple((a + b) % 2 for a, b in zip(s, v)) for s in span}
    assert 2 ** rank_mod2(M) == len(span)


@given(st.lists(st.integers(0, 4), min_size=0, max_size=3), st.integers(0, 3))
def test_group_text_round_trip(factors, rank):
    g = AbelianGroup.from_factors(rank, [f for f in factors if f >= 2])
    assert AbelianGroup.parse(str(g)) == g


def test_group_canonical_form():
    assert AbelianGroup.from_factors(0, [2, 3]) == AbelianGroup(0, (6,))
    assert str(AbelianGroup(3, (2, 2))) == "Z^3 + Z2^2"
    assert str(AbelianGroup()) == "0"
    assert AbelianGroup.parse("Z+Z2") == AbelianGroup(1, (2,))
    with pytest.raises(ValueError):
        AbelianGroup(0, (2, 3))


def test_ring_arithmetic():
    assert normalize(Ring.Z, 3, torsion=True) == 1
    assert normalize(Ring.Z2, -3) == 1
    assert is_unit(Ring.ZHALF, Fraction(-4))
    assert not is_unit(Ring.ZHALF, 3)
    assert not is_unit(Ring.Z, 2)
    assert divide(Ring.ZHALF, 3, 2) == Fraction(3, 2)


def test_sparse_matrix_text_round_trip():
    m = SparseMatrix.from_dense([[0, 2], [-1, 0], [0, 0]])
    assert SparseMatrix.from_text(m.to_text()).to_dense() == m.to_dense()
    assert m.transpose().to_dense() == [[0, -1, 0], [2, 0, 0]]
    assert m.nnz() == 2


def test_subquotient_simple():
    # {x in Z^2 : x1 + x2 even} is spanned by (1, 1) and (2, 0); dividing by (2, 0) leaves Z
    sq = subquotient(2, [[1, 1]], [[2]], [[2], [0]])
    assert sq.group == AbelianGroup(1, ())
    sq = subquotient(2, None, None, [[2, 0], [0, 3]])
    assert sq.group == AbelianGroup(0, (6,))


def test_kernel_of_map():
    # Z2 --(x2)--> Z4 is injective; Z4 --(x2)--> Z4 has kernel Z2
    assert kernel_of_map([[2]], [[2]], [[4]]).group.is_trivial()
    assert kernel_of_map([[2]], [[4]], [[4]]).group == AbelianGroup(0, (2,))


@given(small_matrices, st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_lattice_coordinates(M, x):
    cols = [list(c) for c in zip(*M)]
    n = len(M)
    v = [sum(c[i] * xi for c, xi in zip(cols, x)) for i in range(n)]
    lat = LatticeCoords(cols, n)
    c = lat.solve(v)
    assert c is not None
    assert [sum(col[i] * ci for col, ci in zip(cols, c)) for i in range(n)] == v
    assert (solve_in_lattice(M, v) is not None)


def rp2(ring=Ring.Z):
    # cellular chain complex of the real projective plane
    d1 = SparseMatrix.from_dense([[0]])
    d2 = SparseMatrix.from_dense([[2]])
    return ChainComplex(ring, {0: ["v"], 1: ["e"], 2: ["f"]}, {0: [False], 1: [False], 2: [False]}, {1: d1, 2: d2})


def test_rp2():
    H = homology_all(rp2())
    assert [str(H[k]) for k in range(3)] == ["Z", "Z2", "0"]
    H2 = homology_all(rp2(Ring.Z2))
    assert [str(H2[k]) for k in range(3)] == ["Z2", "Z2", "Z2"]
    H3 = homology_all(rp2(Ring.ZHALF))
    assert [str(H3[k]) for k in range(3)] == ["Z", "0", "0"]


def test_torsion_generators():
    # Z -> Z2 (the map is onto) leaves 2Z as H_1
    d = SparseMatrix.from_dense([[1]])
    C = ChainComplex(Ring.Z, {0: ["a"], 1: ["b"]}, {0: [True], 1: [False]}, {1: d})
    assert homology(C, 1) == AbelianGroup(1, ())
    assert homology(C, 0).is_trivial()
    assert C.check_d_squared()


def random_complex_with_squares(rng):
    """d_2 = A, d_1 = B with B A = 0 built from a random kernel basis."""
    n1 = rng.randint(1, 5)
    B = [[rng.randint(-3, 3) for _ in range(n1)] for _ in range(rng.randint(1, 4))]
    s = smith_normal_form(B, transforms=True)
    kernel = [[s.V[i][j] for i in range(n1)] for j in range(s.rank, n1)]
    cols = []
    for _ in range(rng.randint(0, 4)):
        coeffs = [rng.randint(-2, 2) for _ in kernel]
        cols.append([sum(c * k[i] for c, k in zip(coeffs, kernel)) for i in range(n1)])
    A = [[c[i] for c in cols] for i in range(n1)] if cols else [[] for _ in range(n1)]
    gens = {0: list(range(len(B))), 1: list(range(n1)), 2: list(range(len(cols)))}
    tors = {k: [False] * len(v) for k, v in gens.items()}
    d = {1: SparseMatrix.from_dense(B)}
    d[2] = SparseMatrix.from_dense(A) if cols else SparseMatrix.zeros(n1, 0)
    return ChainComplex(Ring.Z, gens, tors, d)


@given(st.integers(0, 10**6))
def test_reduction_preserves_homology(seed):
    C = random_complex_with_squares(random.Random(seed))
    assert C.check_d_squared()
    for k in C.degrees():
        assert homology(C, k, reduce=True) == homology(C, k, reduce=False)
    R = reduce_complex(C)
    assert R.check_d_squared()
    assert sum(R.size(k) for k in R.degrees()) <= sum(C.size(k) for k in C.degrees())


@given(st.integers(0, 10**6))
def test_euler_characteristic(seed):
    C = random_complex_with_squares(random.Random(seed))
    chi = sum((-1) ** k * C.size(k) for k in C.degrees())
    assert chi == sum((-1) ** k * homology(C, k).rank for k in C.degrees())
