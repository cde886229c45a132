"""Exact linear algebra over Z, Z/2 and Z[1/2].

Matrices are column-sparse (one ``{row: value}`` dict per column).  Homology
of complexes whose chain groups are ``Z^a + (Z/2)^b`` is computed from the
presentation "free module modulo ``2g`` for each 2-torsion generator ``g``".
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence


class Ring(enum.Enum):
    Z = "Z"
    Z2 = "Z2"
    ZHALF = "Z[1/2]"

    @classmethod
    def parse(cls, name: str) -> "Ring":
        aliases = {"z": cls.Z, "zz": cls.Z, "z2": cls.Z2, "z/2": cls.Z2, "f2": cls.Z2,
                   "z[1/2]": cls.ZHALF, "zhalf": cls.ZHALF, "dyadic": cls.ZHALF}
        try:
            return aliases[name.strip().lower()]
        except KeyError:
            raise ValueError(f"unsupported ring {name!r}") from None


def is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def normalize(ring: Ring, value, torsion: bool = False):
    """Reduce a coefficient into the coefficient group of a generator."""
    if ring is Ring.Z2:
        return int(value) % 2
    if ring is Ring.ZHALF:
        v = Fraction(value)
        if not is_power_of_two(v.denominator):
            raise ValueError(f"{v} is not a dyadic fraction")
        return v
    if torsion:
        return int(value) % 2
    return int(value)


def is_unit(ring: Ring, value, torsion: bool = False) -> bool:
    """Whether ``value`` is invertible in the coefficient ring of a generator."""
    if ring is Ring.Z2 or torsion:
        return int(value) % 2 == 1 if ring is not Ring.ZHALF else False
    if ring is Ring.ZHALF:
        v = Fraction(value)
        return v != 0 and is_power_of_two(abs(v.numerator))
    return value in (1, -1)


def divide(ring: Ring, value, unit, torsion: bool = False):
    """``value / unit`` where ``unit`` satisfies :func:`is_unit`."""
    if ring is Ring.Z2 or torsion:
        return int(value) % 2
    if ring is Ring.ZHALF:
        return Fraction(value) / Fraction(unit)
    return value * unit  # unit is +-1


# ---------------------------------------------------------------------------
# sparse matrices


@dataclass
class SparseMatrix:
    """Column-sparse matrix with no stored zeros."""

    nrows: int
    ncols: int
    cols: list = field(default_factory=list)

    def __post_init__(self):
        if not self.cols:
            self.cols = [dict() for _ in range(self.ncols)]
        if len(self.cols) != self.ncols:
            raise ValueError("column count mismatch")

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "SparseMatrix":
        return cls(nrows, ncols, [dict() for _ in range(ncols)])

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence]) -> "SparseMatrix":
        nrows = len(rows)
        ncols = len(rows[0]) if nrows else 0
        cols = [{i: rows[i][j] for i in range(nrows) if rows[i][j] != 0} for j in range(ncols)]
        return cls(nrows, ncols, cols)

    @classmethod
    def from_triplets(cls, nrows: int, ncols: int, triplets: Iterable) -> "SparseMatrix":
        m = cls.zeros(nrows, ncols)
        for i, j, v in triplets:
            if (i, j) in m:
                raise ValueError(f"duplicate coordinate ({i}, {j})")
            if v != 0:
                m.cols[j][i] = v
        return m

    def __contains__(self, ij) -> bool:
        i, j = ij
        return i in self.cols[j]

    def get(self, i: int, j: int, default=0):
        return self.cols[j].get(i, default)

    def to_dense(self) -> list:
        out = [[0] * self.ncols for _ in range(self.nrows)]
        for j, col in enumerate(self.cols):
            for i, v in col.items():
                out[i][j] = v
        return out

    def triplets(self) -> list:
        return sorted((i, j, v) for j, col in enumerate(self.cols) for i, v in col.items())

    def nnz(self) -> int:
        return sum(len(c) for c in self.cols)

    def transpose(self) -> "SparseMatrix":
        t = SparseMatrix.zeros(self.ncols, self.nrows)
        for j, col in enumerate(self.cols):
            for i, v in col.items():
                t.cols[i][j] = v
        return t

    def matmul(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.ncols != other.nrows:
            raise ValueError("shape mismatch")
        out = SparseMatrix.zeros(self.nrows, other.ncols)
        for j, col in enumerate(other.cols):
            acc: dict = {}
            for k, v in col.items():
                for i, w in self.cols[k].items():
                    acc[i] = acc.get(i, 0) + w * v
            out.cols[j] = {i: v for i, v in acc.items() if v != 0}
        return out

    def is_zero(self) -> bool:
        return all(not c for c in self.cols)

    def to_text(self) -> str:
        """Coordinate format, one ``row col value`` line per entry, 1-indexed."""
        lines = [f"{self.nrows} {self.ncols} {self.nnz()}"]
        lines += [f"{i + 1} {j + 1} {v}" for i, j, v in self.triplets()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SparseMatrix":
        rows = [ln.split() for ln in text.strip().splitlines() if ln.strip() and not ln.startswith("#")]
        nrows, ncols, _ = (int(x) for x in rows[0])
        trip = [(int(i) - 1, int(j) - 1, _parse_number(v)) for i, j, v in rows[1:]]
        return cls.from_triplets(nrows, ncols, trip)


def _parse_number(s: str):
    return Fraction(s) if "/" in s else int(s)


# ---------------------------------------------------------------------------
# abelian groups


@dataclass(frozen=True)
class AbelianGroup:
    """``Z^rank + Z/d1 + ... + Z/dk`` with ``d1 | d2 | ... | dk``, each ``>= 2``."""

    rank: int = 0
    torsion: tuple = ()

    def __post_init__(self):
        t = tuple(int(d) for d in self.torsion)
        if any(d < 2 for d in t) or any(b % a for a, b in zip(t, t[1:])):
            raise ValueError(f"torsion {t} is not an invariant-factor chain")
        object.__setattr__(self, "torsion", t)

    @classmethod
    def from_factors(cls, rank: int, factors: Iterable[int]) -> "AbelianGroup":
        """Canonical form from an arbitrary list of cyclic orders (primary decomposition)."""
        return cls(rank, invariant_chain(factors))

    def is_trivial(self) -> bool:
        return self.rank == 0 and not self.torsion

    def order_of_torsion(self) -> int:
        out = 1
        for d in self.torsion:
            out *= d
        return out

    def __str__(self) -> str:
        parts = []
        if self.rank:
            parts.append("Z" if self.rank == 1 else f"Z^{self.rank}")
        counts: dict = {}
        for d in self.torsion:
            counts[d] = counts.get(d, 0) + 1
        for d in sorted(counts):
            parts.append(f"Z{d}" if counts[d] == 1 else f"Z{d}^{counts[d]}")
        return " + ".join(parts) if parts else "0"

    @classmethod
    def parse(cls, text: str) -> "AbelianGroup":
        text = text.strip()
        if text == "0":
            return cls()
        rank = 0
        factors: list = []
        for term in text.split("+"):
            m = re.fullmatch(r"\s*Z(\d*)(?:\^(\d+))?\s*", term)
            if not m:
                raise ValueError(f"cannot parse group term {term!r}")
            d, e = m.group(1), int(m.group(2) or 1)
            if d:
                factors += [int(d)] * e
            else:
                rank += e
        return cls.from_factors(rank, factors)


def groups_isomorphic(g: AbelianGroup, h: AbelianGroup) -> bool:
    return g.rank == h.rank and g.torsion == h.torsion


def _factorize(n: int) -> dict:
    out: dict = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def invariant_chain(factors: Iterable[int]) -> tuple:
    """Invariant factors of ``+ Z/d`` over the given orders (units dropped)."""
    by_prime: dict = {}
    for d in factors:
        d = abs(int(d))
        if d == 0:
            raise ValueError("zero is not a torsion order")
        for p, e in _factorize(d).items():
            by_prime.setdefault(p, []).append(e)
    if not by_prime:
        return ()
    length = max(len(v) for v in by_prime.values())
    chain = [1] * length
    for p, exps in by_prime.items():
        exps = sorted(exps)
        for i, e in enumerate(exps):
            chain[length - len(exps) + i] *= p ** e
    return tuple(d for d in chain if d > 1)


# ---------------------------------------------------------------------------
# Smith normal form


@dataclass
class SNFResult:
    """``diag`` has ``min(m, n)`` entries; when requested ``U @ A @ V == D``."""

    diag: list
    U: list | None = None
    V: list | None = None
    Uinv: list | None = None

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diag if d != 0)

    def nonzero(self) -> list:
        return [d for d in self.diag if d != 0]


def _identity(n: int) -> list:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _as_dense(A) -> list:
    if isinstance(A, SparseMatrix):
        return A.to_dense()
    return [list(r) for r in A]


def smith_normal_form(A, transforms: bool = False) -> SNFResult:
    """Smith normal form of an integer matrix by unimodular row/column moves.

    Pivots are chosen with minimal absolute value.  With ``transforms`` the
    result carries ``U``, ``V`` (and ``Uinv``) with ``U A V = diag``.
    """
    M = _as_dense(A)
    m = len(M)
    n = len(M[0]) if m else (A.ncols if isinstance(A, SparseMatrix) else 0)
    U = _identity(m) if transforms else None
    Ui = _identity(m) if transforms else None
    V = _identity(n) if transforms else None

    def swap_rows(i, j):
        M[i], M[j] = M[j], M[i]
        if transforms:
            U[i], U[j] = U[j], U[i]
            for r in Ui:
                r[i], r[j] = r[j], r[i]

    def swap_cols(i, j):
        for r in M:
            r[i], r[j] = r[j], r[i]
        if transforms:
            for r in V:
                r[i], r[j] = r[j], r[i]

    def add_row(dst, src, q):  # row dst += q * row src
        if q == 0:
            return
        rs, rd = M[src], M[dst]
        for k in range(n):
            if rs[k]:
                rd[k] += q * rs[k]
        if transforms:
            us, ud = U[src], U[dst]
            for k in range(m):
                if us[k]:
                    ud[k] += q * us[k]
            for r in Ui:  # inverse: col src -= q * col dst
                if r[dst]:
                    r[src] -= q * r[dst]

    def add_col(dst, src, q):  # col dst += q * col src
        if q == 0:
            return
        for r in M:
            if r[src]:
                r[dst] += q * r[src]
        if transforms:
            for r in V:
                if r[src]:
                    r[dst] += q * r[src]

    def neg_row(i):
        M[i] = [-x for x in M[i]]
        if transforms:
            U[i] = [-x for x in U[i]]
            for r in Ui:
                r[i] = -r[i]

    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            row = M[i]
            for j in range(t, n):
                v = row[j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        swap_rows(t, i)
        swap_cols(t, j)
        while True:
            p = M[t][t]
            done = True
            for i in range(t + 1, m):
                if M[i][t]:
                    q = -_round_div(M[i][t], p)
                    add_row(i, t, q)
                    if M[i][t]:
                        done = False
            for j in range(t + 1, n):
                if M[t][j]:
                    q = -_round_div(M[t][j], p)
                    add_col(j, t, q)
                    if M[t][j]:
                        done = False
            if not done:
                best = None
                for i in range(t, m):
                    if M[i][t] and (best is None or abs(M[i][t]) < best[0]):
                        best = (abs(M[i][t]), "r", i)
                for j in range(t, n):
                    if M[t][j] and (best is None or abs(M[t][j]) < best[0]):
                        best = (abs(M[t][j]), "c", j)
                if best[1] == "r":
                    swap_rows(t, best[2])
                else:
                    swap_cols(t, best[2])
                continue
            bad = None
            for i in range(t + 1, m):
                row = M[i]
                for j in range(t + 1, n):
                    if row[j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(t, bad, 1)
        if M[t][t] < 0:
            neg_row(t)
        t += 1
    diag = [M[i][i] for i in range(min(m, n))]
    return SNFResult(diag, U, V, Ui)


def _round_div(a: int, b: int) -> int:
    q, r = divmod(a, b)
    if 2 * abs(r) > abs(b):
        q += 1 if (r > 0) == (b > 0) else 0
    return q


def _sparse_rows(A) -> tuple:
    if isinstance(A, SparseMatrix):
        rows: dict = {}
        for j, col in enumerate(A.cols):
            for i, v in col.items():
                rows.setdefault(i, {})[j] = v
        return rows, A.nrows, A.ncols
    rows = {i: {j: v for j, v in enumerate(r) if v} for i, r in enumerate(A)}
    return {i: r for i, r in rows.items() if r}, len(A), (len(A[0]) if A else 0)


def invariant_factors(A) -> list:
    """Nonzero Smith diagonal of an integer matrix (ascending, units included).

    Unit pivots are eliminated sparsely first; the remaining block goes through
    the dense algorithm.
    """
    rows, _, _ = _sparse_rows(A)
    cols: dict = {}
    for i, r in rows.items():
        for j in r:
            cols.setdefault(j, set()).add(i)
    units = 0
    changed = True
    while changed:
        changed = False
        cand = sorted(rows, key=lambda i: len(rows[i]))
        for i in cand:
            if i not in rows:
                continue
            r = rows[i]
            piv = None
            for j, v in r.items():
                if v in (1, -1) and (piv is None or len(cols[j]) < len(cols[piv])):
                    piv = j
            if piv is None:
                continue
            pv = r[piv]
            for k in list(cols[piv]):
                if k == i:
                    continue
                rk = rows[k]
                q = rk[piv] * pv
                for j, v in r.items():
                    nv = rk.get(j, 0) - q * v
                    if nv:
                        if j not in rk:
                            cols[j].add(k)
                        rk[j] = nv
                    else:
                        rk.pop(j, None)
                        cols[j].discard(k)
                if not rk:
                    del rows[k]
            for j in r:
                cols[j].discard(i)
            del rows[i]
            del cols[piv]
            units += 1
            changed = True
    live_cols = sorted({j for r in rows.values() for j in r})
    live_rows = sorted(rows)
    dense = [[rows[i].get(j, 0) for j in live_cols] for i in live_rows]
    rest = smith_normal_form(dense).nonzero() if dense and live_cols else []
    return sorted([1] * units + [abs(d) for d in rest])


def rank_mod2(A) -> int:
    """Rank over GF(2) using integer bitsets."""
    rows, _, _ = _sparse_rows(A)
    basis: dict = {}
    for r in rows.values():
        bits = 0
        for j, v in r.items():
            if v % 2:
                bits |= 1 << j
        while bits:
            top = bits.bit_length() - 1
            if top in basis:
                bits ^= basis[top]
            else:
                basis[top] = bits
                break
    return len(basis)


def clear_denominators(A: SparseMatrix) -> SparseMatrix:
    """Scale each column by a power of two so all entries become integers."""
    out = SparseMatrix.zeros(A.nrows, A.ncols)
    for j, col in enumerate(A.cols):
        den = 1
        for v in col.values():
            den = max(den, Fraction(v).denominator)
        out.cols[j] = {i: int(Fraction(v) * den) for i, v in col.items()}
    return out


def odd_part(n: int) -> int:
    n = abs(n)
    while n and n % 2 == 0:
        n //= 2
    return n


# ---------------------------------------------------------------------------
# subquotients of lattices


def _hstack(blocks: Sequence[list], nrows: int) -> list:
    out = [[] for _ in range(nrows)]
    for b in blocks:
        for i in range(nrows):
            out[i].extend(b[i] if b else [])
    return out


def _to_dense_cols(A, nrows: int) -> list:
    if A is None:
        return [[] for _ in range(nrows)]
    if isinstance(A, SparseMatrix):
        return A.to_dense() if A.nrows else [[] for _ in range(nrows)]
    return [list(r) for r in A] if A else [[] for _ in range(nrows)]


@dataclass
class Subquotient:
    """``{x : D x in im R} / im G`` with its isomorphism type and generators.

    ``generators[i]`` is an integer vector representing the cyclic summand of
    order ``orders[i]`` (``0`` meaning infinite order).
    """

    group: AbelianGroup
    generators: list
    orders: list
    lattice_basis: list


def subquotient(n: int, D=None, R=None, G=None, target_rows: int | None = None) -> Subquotient:
    """Compute ``{x in Z^n : D x in im R} / im G`` (``im G`` must lie in the former).

    ``D`` is ``p x n``, ``R`` is ``p x q``, ``G`` is ``n x s``; any may be empty.
    """
    p = target_rows if target_rows is not None else (D.nrows if isinstance(D, SparseMatrix) else (len(D) if D else 0))
    Dd = _to_dense_cols(D, p) if p else []
    Rd = _to_dense_cols(R, p) if p else []
    if p and any(row for row in Dd):
        M = _hstack([Dd, Rd], p)
        snf = smith_normal_form(M, transforms=True)
        r = snf.rank
        width = len(M[0])
        kernel_cols = [[snf.V[i][j] for i in range(n)] for j in range(r, width)]
    else:
        kernel_cols = [[int(i == j) for i in range(n)] for j in range(n)]
    # lattice basis of the projected kernel
    if kernel_cols:
        K = [[c[i] for c in kernel_cols] for i in range(n)]
        sk = smith_normal_form(K, transforms=True)
        z = sk.rank
        basis = [[sk.Uinv[i][j] * sk.diag[j] for i in range(n)] for j in range(z)]
        Ku, kd = sk.U, sk.diag
    else:
        z, basis, Ku, kd = 0, [], None, []
    Gd = _to_dense_cols(G, n) if n else []
    gcols = len(Gd[0]) if Gd and Gd[0] else 0
    coords = [[0] * gcols for _ in range(z)]
    if gcols and z:
        UG = [[sum(Ku[i][k] * Gd[k][j] for k in range(n) if Ku[i][k] and Gd[k][j]) for j in range(gcols)] for i in range(n)]
        for i in range(z, n):
            if any(UG[i]):
                raise ValueError("image is not contained in the cycle lattice")
        for i in range(z):
            for j in range(gcols):
                q, rem = divmod(UG[i][j], kd[i])
                if rem:
                    raise ValueError("image is not contained in the cycle lattice")
                coords[i][j] = q
    elif gcols:
        if any(any(row) for row in Gd):
            raise ValueError("image is not contained in the cycle lattice")
    if z == 0:
        return Subquotient(AbelianGroup(), [], [], [])
    if gcols:
        sq = smith_normal_form(coords, transforms=True)
        diag = sq.diag + [0] * (z - len(sq.diag))
        Cinv = sq.Uinv
    else:
        diag = [0] * z
        Cinv = _identity(z)
    gens, orders, factors, rank = [], [], [], 0
    for j in range(z):
        d = abs(diag[j])
        if d == 1:
            continue
        vec = [sum(basis[k][i] * Cinv[k][j] for k in range(z)) for i in range(n)]
        gens.append(vec)
        orders.append(d)
        if d == 0:
            rank += 1
        else:
            factors.append(d)
    return Subquotient(AbelianGroup.from_factors(rank, factors), gens, orders, basis)


def solve_in_lattice(A, b) -> list | None:
    """Integer ``x`` with ``A x = b`` or ``None``; ``A`` dense ``p x n``."""
    p = len(A)
    n = len(A[0]) if p else 0
    if n == 0:
        return [] if not any(b) else None
    s = smith_normal_form(A, transforms=True)
    Ub = [sum(s.U[i][k] * b[k] for k in range(p)) for i in range(p)]
    y = [0] * n
    for i in range(p):
        d = s.diag[i] if i < len(s.diag) else 0
        if d == 0:
            if Ub[i]:
                return None
        else:
            q, r = divmod(Ub[i], d)
            if r:
                return None
            y[i] = q
    return [sum(s.V[i][k] * y[k] for k in range(n)) for i in range(n)]


def kernel_of_map(F, rel_src=None, rel_tgt=None, n: int | None = None) -> Subquotient:
    """Kernel of the map ``coker(rel_src) -> coker(rel_tgt)`` induced by ``F``.

    ``F`` is ``p x n``; relations are given as column matrices.
    """
    if n is None:
        n = F.ncols if isinstance(F, SparseMatrix) else (len(F[0]) if F else 0)
    p = F.nrows if isinstance(F, SparseMatrix) else len(F)
    return subquotient(n, F, rel_tgt, rel_src, target_rows=p)


# ---------------------------------------------------------------------------
# chain complexes


@dataclass
class ChainComplex:
    """Based chain complex ``C_k = Z^a + (Z/2)^b`` (or free over ``Z/2``, ``Z[1/2]``).

    ``d[k]`` is the boundary ``C_k -> C_{k-1}`` as a :class:`SparseMatrix`;
    ``torsion[k][i]`` flags 2-torsion generators (only meaningful over ``Z``).
    """

    ring: Ring
    gens: dict
    torsion: dict
    d: dict

    def degrees(self) -> list:
        return sorted(self.gens)

    def size(self, k: int) -> int:
        return len(self.gens.get(k, ()))

    def boundary(self, k: int) -> SparseMatrix:
        if k in self.d:
            return self.d[k]
        return SparseMatrix.zeros(self.size(k - 1), self.size(k))

    def torsion_flags(self, k: int) -> list:
        return self.torsion.get(k, [False] * self.size(k))

    def index(self, k: int) -> dict:
        cache = self.__dict__.setdefault("_index_cache", {})
        if k not in cache:
            cache[k] = {g: i for i, g in enumerate(self.gens.get(k, ()))}
        return cache[k]

    def check_d_squared(self) -> bool:
        for k in self.degrees():
            if k - 1 not in self.gens or k - 2 not in self.gens:
                continue
            prod = self.boundary(k - 1).matmul(self.boundary(k))
            flags = self.torsion_flags(k - 2)
            for col in prod.cols:
                for i, v in col.items():
                    if normalize(self.ring, v, flags[i]) != 0:
                        return False
        return True


def _two_relations(flags: Sequence[bool]) -> SparseMatrix:
    idx = [i for i, f in enumerate(flags) if f]
    m = SparseMatrix.zeros(len(flags), len(idx))
    for j, i in enumerate(idx):
        m.cols[j][i] = 2
    return m


def _cat_cols(a: SparseMatrix, b: SparseMatrix) -> SparseMatrix:
    return SparseMatrix(a.nrows, a.ncols + b.ncols, [dict(c) for c in a.cols] + [dict(c) for c in b.cols])


def homology(C: ChainComplex, k: int, reduce: bool = True) -> AbelianGroup:
    """``H_k(C)`` as an abelian group.

    Over ``Z`` this is ``{x : d x in 2T_{k-1}} / (im d_{k+1} + 2T_k)``, where
    ``T_j`` spans the 2-torsion generators.  Over ``Z/2`` the result is
    ``(Z/2)^dim``; over ``Z[1/2]`` only odd torsion can survive.
    With ``reduce`` the complex is first shrunk by unit-pivot cancellation.
    """
    if k not in C.gens:
        return AbelianGroup()
    if not C.check_d_squared():
        raise ValueError("inconsistent complex: d o d != 0")
    if reduce:
        C = reduce_complex(C, lo=k - 1, hi=k + 1)
    dk, dk1 = C.boundary(k), C.boundary(k + 1)
    n = C.size(k)
    if C.ring is Ring.Z2:
        dim = n - rank_mod2(dk) - rank_mod2(dk1)
        return AbelianGroup(0, (2,) * dim)
    if C.ring is Ring.ZHALF:
        fk = invariant_factors(clear_denominators(dk))
        fk1 = invariant_factors(clear_denominators(dk1))
        odd = [odd_part(d) for d in fk1]
        return AbelianGroup.from_factors(n - len(fk) - len(fk1), [d for d in odd if d > 1])
    tk1 = C.torsion_flags(k - 1) if k - 1 in C.gens else []
    tk = C.torsion_flags(k)
    if not any(tk1) and not any(tk):
        fk = invariant_factors(dk) if dk.nnz() else []
        fk1 = invariant_factors(dk1) if dk1.nnz() else []
        return AbelianGroup.from_factors(n - len(fk) - len(fk1), [d for d in fk1 if d > 1])
    G = _cat_cols(dk1, _two_relations(tk))
    if k - 1 in C.gens and C.size(k - 1):
        sq = subquotient(n, dk, _two_relations(tk1), G, target_rows=C.size(k - 1))
    else:
        sq = subquotient(n, None, None, G, target_rows=0)
    return sq.group


def homology_all(C: ChainComplex, reduce: bool = True) -> dict:
    return {k: homology(C, k, reduce=reduce) for k in C.degrees()}


# ---------------------------------------------------------------------------
# unit-pivot cancellation


def reduce_complex(C: ChainComplex, lo: int | None = None, hi: int | None = None) -> ChainComplex:
    """Cancel pairs ``(a, b)`` with ``a`` appearing in ``d b`` with unit coefficient.

    Each cancellation is the quotient by the acyclic subcomplex ``<b, d b>``,
    so homology in degrees ``lo+1 .. hi-1`` is preserved.  Pairs never mix free
    and 2-torsion generators.  Only degrees in ``[lo, hi]`` are touched.
    """
    degs = [k for k in C.degrees() if (lo is None or k >= lo) and (hi is None or k <= hi)]
    if not degs:
        return C
    ring = C.ring
    cols = {k: {j: dict(c) for j, c in enumerate(C.boundary(k).cols)} for k in degs}
    flags = {k: list(C.torsion_flags(k)) for k in degs}
    rows: dict = {}
    for k in degs:
        r: dict = {}
        for j, c in cols[k].items():
            for i in c:
                r.setdefault(i, set()).add(j)
        rows[k] = r
    alive = {k: set(range(C.size(k))) for k in degs}

    def eliminate(k: int, a: int, b: int) -> None:
        colb = cols[k][b]
        r = colb[a]
        tor = flags[k - 1][a]
        for b2 in list(rows[k].get(a, ())):
            if b2 == b:
                continue
            col2 = cols[k][b2]
            q = divide(ring, col2[a], r, tor)
            for i, v in colb.items():
                nv = normalize(ring, col2.get(i, 0) - q * v, flags[k - 1][i])
                if nv:
                    if i not in col2:
                        rows[k].setdefault(i, set()).add(b2)
                    col2[i] = nv
                elif i in col2:
                    del col2[i]
                    rows[k][i].discard(b2)
        for i in colb:
            rows[k][i].discard(b)
        del cols[k][b]
        rows[k].pop(a, None)
        alive[k].discard(b)
        alive[k - 1].discard(a)
        if k + 1 in cols:
            for c in rows[k + 1].pop(b, ()):
                cols[k + 1][c].pop(b, None)
        if k - 1 in cols:
            for i in cols[k - 1].pop(a, {}):
                rows[k - 1][i].discard(a)

    for k in sorted(degs, reverse=True):
        if k - 1 not in cols:
            continue
        progress = True
        while progress:
            progress = False
            for b in sorted(cols[k], key=lambda j: len(cols[k][j])):
                colb = cols[k].get(b)
                if not colb:
                    continue
                tb = flags[k][b]
                best = None
                for a, v in colb.items():
                    if flags[k - 1][a] != tb:
                        continue
                    if is_unit(ring, v, tb):
                        cnt = len(rows[k].get(a, ()))
                        if best is None or cnt < best[0]:
                            best = (cnt, a)
                if best is not None:
                    eliminate(k, best[1], b)
                    progress = True

    new_gens, new_tor, new_d = dict(C.gens), dict(C.torsion), dict(C.d)
    remap = {}
    for k in degs:
        keep = sorted(alive[k])
        remap[k] = {old: new for new, old in enumerate(keep)}
        new_gens[k] = [C.gens[k][i] for i in keep]
        new_tor[k] = [flags[k][i] for i in keep]
    for k in degs:
        below = remap.get(k - 1)
        keep = sorted(alive[k])
        if below is None:
            if k - 1 in C.gens:
                old = C.boundary(k)
                new_d[k] = SparseMatrix(old.nrows, len(keep), [dict(old.cols[j]) for j in keep])
            continue
        m = SparseMatrix.zeros(len(below), len(keep))
        for nj, oj in enumerate(keep):
            m.cols[nj] = {below[i]: v for i, v in cols[k][oj].items()}
        new_d[k] = m
    if hi is not None and hi + 1 in C.gens:
        old = C.boundary(hi + 1)
        m = SparseMatrix.zeros(len(remap[hi]), old.ncols)
        for j, c in enumerate(old.cols):
            m.cols[j] = {remap[hi][i]: v for i, v in c.items() if i in remap[hi]}
        new_d[hi + 1] = m
    out = ChainComplex(ring, new_gens, new_tor, new_d)
    return out


class LatticeCoords:
    """Coordinates of integer vectors in the lattice spanned by given columns.

    ``basis`` is a list of column vectors (any spanning set); a single Smith
    decomposition is reused for every query.
    """

    def __init__(self, basis: Sequence[Sequence[int]], dim: int):
        self.dim = dim
        self.ncols = len(basis)
        if not basis:
            self._snf = None
            return
        A = [[basis[j][i] for j in range(self.ncols)] for i in range(dim)]
        self._snf = smith_normal_form(A, transforms=True)

    def solve(self, v: Sequence[int]) -> list | None:
        """Integer ``c`` with ``sum_j c_j basis_j = v``, or ``None``."""
        if self._snf is None:
            return [] if not any(v) else None
        s = self._snf
        Uv = [sum(s.U[i][k] * v[k] for k in range(self.dim) if v[k]) for i in range(self.dim)]
        y = [0] * self.ncols
        for i in range(self.dim):
            d = s.diag[i] if i < len(s.diag) else 0
            if d == 0:
                if Uv[i]:
                    return None
            else:
                q, r = divmod(Uv[i], d)
                if r:
                    return None
                y[i] = q
        return [sum(s.V[i][k] * y[k] for k in range(self.ncols) if y[k]) for i in range(self.ncols)]

    def contains(self, v: Sequence[int]) -> bool:
        return self.solve(v) is not None
