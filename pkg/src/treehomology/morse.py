"""Algebraic discrete Morse theory on based chain complexes.

A vector field is a partial matching ``a <-> b`` with ``a`` in degree
``k-1`` and ``b = Delta(a)`` in degree ``k`` such that the coefficient of
``a`` in ``d b`` is a unit.  Over ``Z`` with 2-torsion generators a pair
never mixes a free and a 2-torsion generator.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .exactlinalg import (
    AbelianGroup,
    ChainComplex,
    Ring,
    SparseMatrix,
    divide,
    homology,
    is_unit,
    normalize,
)


@dataclass
class VectorField:
    """Pairs ``(k, a, b)``: ``a`` is a generator of degree ``k-1``, ``b`` of degree ``k``."""

    pairs: list = field(default_factory=list)

    def add(self, k: int, a, b) -> None:
        self.pairs.append((k, a, b))

    def __len__(self) -> int:
        return len(self.pairs)

    def to_text(self, fmt=str) -> str:
        return "\n".join(f"{k} {fmt(a)} {fmt(b)}" for k, a, b in self.pairs)


@dataclass
class ValidationReport:
    ok: bool
    errors: list = field(default_factory=list)
    cycle: list | None = None

    def as_dict(self) -> dict:
        return {"ok": self.ok, "errors": list(self.errors),
                "cycle": None if self.cycle is None else [str(x) for x in self.cycle]}


class InvalidField(ValueError):
    pass


def _indexed(C: ChainComplex, field_: VectorField) -> dict:
    """``{k: {a_index: b_index}}`` for the pairs of ``field_``."""
    out: dict = {}
    for k, a, b in field_.pairs:
        ia = C.index(k - 1).get(a)
        ib = C.index(k).get(b)
        if ia is None or ib is None:
            raise InvalidField(f"pair ({a}, {b}) is not in the complex at degree {k}")
        out.setdefault(k, {})[ia] = ib
    return out


def _find_cycle(nodes, succ) -> list | None:
    """Iterative three-colour DFS; returns a closed walk if one exists."""
    colour: dict = {}
    for start in nodes:
        if colour.get(start):
            continue
        colour[start] = 1
        stack = [(start, iter(succ(start)))]
        path = [start]
        while stack:
            v, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                colour[v] = 2
                stack.pop()
                path.pop()
                continue
            c = colour.get(nxt, 0)
            if c == 1:
                return path[path.index(nxt):] + [nxt]
            if c == 0:
                colour[nxt] = 1
                stack.append((nxt, iter(succ(nxt))))
                path.append(nxt)
    return None


def validate_field(C: ChainComplex, field_: VectorField) -> ValidationReport:
    """Check matching, unit coefficients, kind purity and absence of closed paths."""
    errors = []
    seen: dict = {}
    for k, a, b in field_.pairs:
        for deg, g in ((k - 1, a), (k, b)):
            if (deg, g) in seen:
                errors.append(f"generator {g} (degree {deg}) appears in two pairs")
            seen[(deg, g)] = True
    try:
        pairs = _indexed(C, field_)
    except InvalidField as exc:
        return ValidationReport(False, [str(exc)])
    for k, m in pairs.items():
        d = C.boundary(k)
        ft_lo, ft_hi = C.torsion_flags(k - 1), C.torsion_flags(k)
        for a, b in m.items():
            if ft_lo[a] != ft_hi[b]:
                errors.append(f"pair ({C.gens[k - 1][a]}, {C.gens[k][b]}) mixes generator kinds")
                continue
            r = d.get(a, b)
            if not is_unit(C.ring, r, ft_lo[a]):
                errors.append(f"coefficient {r} of {C.gens[k - 1][a]} in d{C.gens[k][b]} is not a unit")
    if errors:
        return ValidationReport(False, errors)
    for k, m in pairs.items():
        d = C.boundary(k)

        def succ(a, m=m, d=d):
            return [x for x in d.cols[m[a]] if x != a and x in m]

        cyc = _find_cycle(sorted(m), succ)
        if cyc is not None:
            gens = C.gens[k - 1]
            witness = []
            for a in cyc:
                witness += [gens[a], C.gens[k][m[a]]]
            return ValidationReport(False, [f"closed gradient path in degree {k}"], witness[:-1])
    return ValidationReport(True)


@dataclass
class MorseData:
    """Critical generators, Morse differential and flow.

    ``critical[k]`` lists indices into ``C.gens[k]``; ``d[k]`` is the Morse
    differential between critical generators; ``flow[k]`` maps all of
    ``C_k`` onto the critical generators of degree ``k``.
    """

    source: ChainComplex
    critical: dict
    d: dict
    flow: dict

    def critical_generators(self, k: int) -> list:
        return [self.source.gens[k][i] for i in self.critical.get(k, [])]

    def complex(self) -> ChainComplex:
        C = self.source
        gens = {k: self.critical_generators(k) for k in C.degrees()}
        tors = {k: [C.torsion_flags(k)[i] for i in self.critical[k]] for k in C.degrees()}
        return ChainComplex(C.ring, gens, tors, dict(self.d))


def _flow_degree(C: ChainComplex, j: int, lower: dict, upper: set, crit_pos: dict) -> list:
    """``phi_j`` as a list of ``{critical position: coefficient}``, one per generator."""
    ring = C.ring
    n = C.size(j)
    flags = C.torsion_flags(j)
    d = C.boundary(j + 1) if lower else None
    memo: list = [None] * n
    crit_flags = [flags[i] for i in sorted(crit_pos, key=crit_pos.get)]
    for a in range(n):
        if a in crit_pos:
            memo[a] = {crit_pos[a]: 1}
        elif a in upper:
            memo[a] = {}
    active = [False] * n
    for start in range(n):
        if memo[start] is not None:
            continue
        stack = [(start, False)]
        while stack:
            a, ready = stack.pop()
            if memo[a] is not None:
                continue
            col = d.cols[lower[a]]
            if not ready:
                if active[a]:
                    raise InvalidField("closed gradient path encountered in flow")
                active[a] = True
                stack.append((a, True))
                stack.extend((x, False) for x in col if x != a and memo[x] is None)
                continue
            r = col[a]
            acc: dict = {}
            for x, c in col.items():
                if x == a:
                    continue
                q = -divide(ring, c, r, flags[a])
                for p, v in memo[x].items():
                    acc[p] = acc.get(p, 0) + q * v
            memo[a] = {p: w for p, v in acc.items() if (w := normalize(ring, v, crit_flags[p]))}
    return memo


def morse_data(C: ChainComplex, field_: VectorField, check: bool = True) -> MorseData:
    """Morse complex of ``C`` for a gradient vector field."""
    if check:
        rep = validate_field(C, field_)
        if not rep.ok:
            raise InvalidField("; ".join(rep.errors))
    pairs = _indexed(C, field_)
    degs = C.degrees()
    lower = {k: {} for k in degs}
    upper = {k: set() for k in degs}
    for k, m in pairs.items():
        for a, b in m.items():
            lower[k - 1][a] = b
            upper[k].add(b)
    critical = {k: [i for i in range(C.size(k)) if i not in lower[k] and i not in upper[k]] for k in degs}
    flow, phi = {}, {}
    for k in degs:
        crit_pos = {i: p for p, i in enumerate(critical[k])}
        phi[k] = _flow_degree(C, k, lower[k], upper[k], crit_pos)
        fm = SparseMatrix.zeros(len(critical[k]), C.size(k))
        fm.cols = [dict(x) for x in phi[k]]
        flow[k] = fm
    dm = {}
    for k in degs:
        if k - 1 not in C.gens:
            continue
        d = C.boundary(k)
        tflags = [C.torsion_flags(k - 1)[i] for i in critical[k - 1]]
        m = SparseMatrix.zeros(len(critical[k - 1]), len(critical[k]))
        for j, b in enumerate(critical[k]):
            acc: dict = {}
            for a, c in d.cols[b].items():
                for p, v in phi[k - 1][a].items():
                    acc[p] = acc.get(p, 0) + c * v
            m.cols[j] = {p: w for p, v in acc.items() if (w := normalize(C.ring, v, tflags[p]))}
        dm[k] = m
    return MorseData(C, critical, dm, flow)


def flow(C: ChainComplex, field_: VectorField, k: int, chain: dict, data: MorseData | None = None) -> dict:
    """Apply the flow to a chain ``{generator: coefficient}`` of degree ``k``."""
    data = data or morse_data(C, field_)
    idx = C.index(k)
    crit = data.critical_generators(k)
    flags = [C.torsion_flags(k)[i] for i in data.critical[k]]
    acc: dict = {}
    for g, c in chain.items():
        for p, v in data.flow[k].cols[idx[g]].items():
            acc[p] = acc.get(p, 0) + c * v
    return {crit[p]: w for p, v in acc.items() if (w := normalize(C.ring, v, flags[p]))}


def morse_differential(C: ChainComplex, field_: VectorField) -> dict:
    return morse_data(C, field_).d


def path_weights_naive(C: ChainComplex, field_: VectorField, k: int, b: int) -> dict:
    """Morse boundary of critical ``b`` (degree ``k``) by explicit path enumeration.

    Sums ``c_1 (-c_2/r_1) ... (-c_m/r_{m-1})`` over all gradient paths
    ``b -> a_1 -> Delta(a_1) -> a_2 -> ... -> a_m`` ending at a critical
    ``a_m``.  Also asserts that a path never returns to a free generator
    after visiting a 2-torsion one.
    """
    pairs = _indexed(C, field_)
    lower = pairs.get(k, {})
    upper_below = set(pairs.get(k - 1, {}).values())
    d = C.boundary(k)
    flags = C.torsion_flags(k - 1)
    ring = C.ring
    out: dict = {}

    def walk(a, weight, prev, seen_torsion):
        if seen_torsion and not flags[a]:
            raise AssertionError("gradient path left the 2-torsion part")
        seen_torsion = seen_torsion or flags[a]
        if a not in lower and a not in upper_below:
            out[a] = out.get(a, 0) + weight
            return
        if a in upper_below:
            return
        col = d.cols[lower[a]]
        r = col[a]
        for x, c in col.items():
            if x == a:
                continue
            walk(x, weight * -divide(ring, c, r, flags[a]), a, seen_torsion)

    for a, c in d.cols[b].items():
        walk(a, c, None, C.torsion_flags(k)[b])
    return {a: w for a, v in out.items() if (w := normalize(ring, v, flags[a]))}


def morse_homology_cross_check(C: ChainComplex, field_: VectorField) -> bool:
    M = morse_data(C, field_).complex()
    return all(homology(C, k, reduce=False) == homology(M, k, reduce=False) for k in C.degrees())


# ---------------------------------------------------------------------------
# chain-level identities


def _compose(A: SparseMatrix, B: SparseMatrix, ring: Ring, flags) -> SparseMatrix:
    P = A.matmul(B)
    for col in P.cols:
        for i in list(col):
            v = normalize(ring, col[i], flags[i])
            if v:
                col[i] = v
            else:
                del col[i]
    return P


def check_identities(data: MorseData) -> list:
    """Failures of ``(d^D)^2 = 0``, ``d^D phi = phi d`` and ``phi(Delta a) = 0``."""
    C = data.source
    fails = []
    for k in C.degrees():
        cflags = [C.torsion_flags(k - 1)[i] for i in data.critical.get(k - 1, [])] if k - 1 in C.gens else []
        if k - 2 in C.gens and k - 1 in C.gens:
            c2 = [C.torsion_flags(k - 2)[i] for i in data.critical[k - 2]]
            if not _compose(data.d[k - 1], data.d[k], C.ring, c2).is_zero():
                fails.append(f"Morse differential squares to nonzero at degree {k}")
        if k - 1 in C.gens:
            lhs = _compose(data.flow[k - 1], C.boundary(k), C.ring, cflags)
            rhs = _compose(data.d[k], data.flow[k], C.ring, cflags)
            if lhs.to_dense() != rhs.to_dense():
                fails.append(f"phi d != d^D phi at degree {k}")
    return fails


# ---------------------------------------------------------------------------
# random complexes with known homology


@dataclass
class RandomComplexConfig:
    max_generators: int = 40
    top_degree: int = 3
    max_coefficient: int = 6
    scramble_steps: int = 60
    ring: Ring = Ring.Z


def random_complex(rng: random.Random, cfg: RandomComplexConfig | None = None) -> tuple:
    """A random complex together with its known homology ``{k: AbelianGroup}``.

    The complex is a direct sum of elementary pieces (lone generators, and
    two-term complexes ``Z -d-> Z``, ``Z2 -> Z2``, ``Z -> Z2``) whose homology
    is known, followed by random changes of basis.
    """
    cfg = cfg or RandomComplexConfig()
    ring = cfg.ring
    degs = list(range(cfg.top_degree + 1))
    gens: dict = {k: [] for k in degs}
    tors: dict = {k: [] for k in degs}
    entries: list = []  # (k, row, col, value)
    rank = {k: 0 for k in degs}
    factors: dict = {k: [] for k in degs}
    target = rng.randint(2, cfg.max_generators)
    counter = 0

    def new(k, torsion):
        nonlocal counter
        gens[k].append(f"g{counter}")
        tors[k].append(torsion)
        counter += 1
        return len(gens[k]) - 1

    while counter < target:
        k = rng.choice(degs)
        kinds = ["free", "pair"]
        if ring is Ring.Z:
            kinds += ["tfree", "tpair", "mixed"]
        piece = rng.choice(kinds)
        if piece in ("pair", "tpair", "mixed") and k == 0:
            piece = "free" if piece == "pair" else "tfree"
        if piece == "free":
            new(k, False)
            rank[k] += 1
        elif piece == "tfree":
            new(k, True)
            factors[k].append(2)
        elif piece == "pair":
            if ring is Ring.Z2:
                c = 1
            else:
                c = rng.choice([1, -1]) * rng.randint(1, cfg.max_coefficient)
            b, a = new(k, False), new(k - 1, False)
            entries.append((k, a, b, c))
            t = abs(c) if ring is Ring.Z else (_odd(c) if ring is Ring.ZHALF else 1)
            if t > 1:
                factors[k - 1].append(t)
        elif piece == "tpair":
            b, a = new(k, True), new(k - 1, True)
            entries.append((k, a, b, 1))
        else:
            b, a = new(k, False), new(k - 1, True)
            entries.append((k, a, b, 1))
            rank[k] += 1
    d = {}
    for k in degs[1:]:
        d[k] = SparseMatrix.zeros(len(gens[k - 1]), len(gens[k]))
    for k, a, b, c in entries:
        d[k].cols[b][a] = normalize(ring, c, tors[k - 1][a])
    C = ChainComplex(ring, gens, tors, d)
    _scramble(C, rng, cfg)
    if ring is Ring.Z2:
        known = {k: AbelianGroup(0, (2,) * rank[k]) for k in degs}
    else:
        known = {k: AbelianGroup.from_factors(rank[k], factors[k]) for k in degs}
    return C, known


def _odd(c: int) -> int:
    c = abs(c)
    while c % 2 == 0:
        c //= 2
    return c


def _scramble(C: ChainComplex, rng: random.Random, cfg: RandomComplexConfig) -> None:
    """Random elementary basis changes ``x' = x + c y`` and unit rescalings."""
    ring = C.ring
    for _ in range(cfg.scramble_steps):
        k = rng.choice(C.degrees())
        n = C.size(k)
        if n == 0:
            continue
        flags = C.torsion_flags(k)
        x = rng.randrange(n)
        if ring is Ring.ZHALF and rng.random() < 0.2:
            u = Fraction(rng.choice([1, -1]) * 2 ** rng.randint(-2, 2))
            if k - 1 in C.gens and k in C.d:
                C.d[k].cols[x] = {i: v * u for i, v in C.d[k].cols[x].items()}
            if k + 1 in C.d:
                for col in C.d[k + 1].cols:
                    if x in col:
                        col[x] = col[x] / u
            continue
        if n < 2:
            continue
        y = rng.randrange(n)
        if y == x or (flags[x] and not flags[y]):
            continue
        c = rng.choice([1, -1, 2, -3]) if ring is not Ring.Z2 else 1
        if k in C.d:  # column op on d_k
            dk = C.d[k]
            below = C.torsion_flags(k - 1)
            col = dict(dk.cols[x])
            for i, v in dk.cols[y].items():
                col[i] = col.get(i, 0) + c * v
            dk.cols[x] = {i: w for i, v in col.items() if (w := normalize(ring, v, below[i]))}
        if k + 1 in C.d:  # row op on d_{k+1}: row_y -= c row_x
            for col in C.d[k + 1].cols:
                if x in col:
                    v = normalize(ring, col.get(y, 0) - c * col[x], flags[y])
                    if v:
                        col[y] = v
                    else:
                        col.pop(y, None)
    perm = {}
    for k in C.degrees():
        order = list(range(C.size(k)))
        rng.shuffle(order)
        perm[k] = {old: new for new, old in enumerate(order)}
        C.gens[k] = [C.gens[k][i] for i in order]
        C.torsion[k] = [C.torsion[k][i] for i in order]
    for k, m in C.d.items():
        cols = [None] * m.ncols
        for old, col in enumerate(m.cols):
            cols[perm[k][old]] = {perm[k - 1][i]: v for i, v in col.items()}
        m.cols = cols
    C.__dict__.pop("_index_cache", None)


def random_gradient_field(C: ChainComplex, rng: random.Random, attempts: int | None = None) -> VectorField:
    """Greedy random gradient field: shuffled unit pairs kept while acyclic."""
    cands = []
    for k in C.degrees():
        if k - 1 not in C.gens:
            continue
        fl, fh = C.torsion_flags(k - 1), C.torsion_flags(k)
        for b, col in enumerate(C.boundary(k).cols):
            for a, v in col.items():
                if fl[a] == fh[b] and is_unit(C.ring, v, fl[a]):
                    cands.append((k, a, b))
    rng.shuffle(cands)
    if attempts is not None:
        cands = cands[:attempts]
    used: set = set()
    field_ = VectorField()
    for k, a, b in cands:
        if (k - 1, a) in used or (k, b) in used:
            continue
        field_.add(k, C.gens[k - 1][a], C.gens[k][b])
        if validate_field(C, field_).ok:
            used.add((k - 1, a))
            used.add((k, b))
        else:
            field_.pairs.pop()
    return field_
