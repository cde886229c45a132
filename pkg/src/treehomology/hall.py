"""Hall trees, Hall problems and the vector fields killing degree-one homology.

Two variants are supported:

* ``"dyadic"``: coefficients ``Z[1/2]``.  Trees with identical sibling
  subtrees of odd edge count vanish; the fields are ``Delta0`` and ``Delta1``.
* ``"mod2"``: coefficients ``Z/2``.  Trees ``(H, H)`` survive and the fields
  are the primed versions built from Hall' problems.

Trees are edited as nested Python lists so that node identity survives
copying (``copy.deepcopy`` with a memo); every contraction merges one node
into its parent.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

from .complexes import boundary, build_complex
from .exactlinalg import Ring
from .morse import VectorField, morse_data, validate_field
from .trees import (
    RootedTree,
    has_reversing_automorphism,
    hall_key,
    is_unrooted,
    to_text,
    degree,
    weight,
)

VARIANTS = ("dyadic", "mod2")


def _check_variant(variant: str) -> str:
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    return variant


def _prec(a: RootedTree, b: RootedTree) -> bool:
    return hall_key(a) < hall_key(b)


# ---------------------------------------------------------------------------
# Hall trees


@lru_cache(maxsize=None)
def is_hall(t: RootedTree) -> bool:
    """Recursive Hall condition on a unitrivalent rooted tree."""
    if isinstance(t, int):
        return True
    if len(t) != 2:
        return False
    h1, h2 = t
    if h1 == h2 or not (is_hall(h1) and is_hall(h2)):
        return False
    if isinstance(h1, int):
        return True
    return not _prec(h1[1], h2)


def is_hall_prime(t: RootedTree) -> bool:
    if is_hall(t):
        return True
    return not isinstance(t, int) and len(t) == 2 and t[0] == t[1] and is_hall(t[0])


@lru_cache(maxsize=None)
def _hall_trees(sig: tuple) -> tuple:
    n = sum(sig)
    if n == 1:
        return (sig.index(1) + 1,)
    out = []
    for part in _subsignatures(sig):
        rest = tuple(a - b for a, b in zip(sig, part))
        for h1 in _hall_trees(part):
            if not isinstance(h1, int) and weight(h1) == n:
                continue
            for h2 in _hall_trees(rest):
                if not _prec(h1, h2):
                    continue
                if isinstance(h1, int) or not _prec(h1[1], h2):
                    out.append((h1, h2))
    return tuple(sorted(set(out), key=hall_key))


def _subsignatures(sig: tuple) -> Iterator[tuple]:
    def rec(i, acc):
        if i == len(sig):
            if 0 < sum(acc) < sum(sig):
                yield tuple(acc)
            return
        for x in range(sig[i] + 1):
            yield from rec(i + 1, acc + [x])

    yield from rec(0, [])


def hall_basis(sig: Sequence[int]) -> list:
    """Hall trees with signature ``sig`` in increasing Hall order."""
    sig = tuple(sig)
    if sum(sig) == 0:
        return []
    return list(_hall_trees(sig))


def hall_prime_basis(sig: Sequence[int]) -> list:
    """Hall trees plus ``(H, H)`` with ``H`` Hall."""
    sig = tuple(sig)
    out = hall_basis(sig)
    if all(x % 2 == 0 for x in sig):
        half = tuple(x // 2 for x in sig)
        out += [(h, h) for h in hall_basis(half)]
    return sorted(out, key=hall_key)


def witt_number(sig: Sequence[int]) -> int:
    """Multigraded Witt formula: dimension of the free Lie algebra in multidegree ``sig``."""
    from math import factorial, gcd

    sig = tuple(sig)
    n = sum(sig)
    g = 0
    for x in sig:
        g = gcd(g, x)
    total = 0
    for d in range(1, g + 1):
        if g % d:
            continue
        mu = _mobius(d)
        if mu == 0:
            continue
        term = factorial(n // d)
        for x in sig:
            term //= factorial(x // d)
        total += mu * term
    return total // n


def witt_total(n: int, m: int) -> int:
    """Necklace formula ``(1/n) sum_{d | n} mu(d) m^(n/d)``."""
    return sum(_mobius(d) * m ** (n // d) for d in range(1, n + 1) if n % d == 0) // n


def _mobius(n: int) -> int:
    out, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            out = -out
        p += 1
    return -out if n > 1 else out


# ---------------------------------------------------------------------------
# raw trees and problems


def _to_raw(t: RootedTree):
    return t if isinstance(t, int) else [_to_raw(c) for c in t]


def _canon(raw) -> RootedTree:
    if isinstance(raw, int):
        return raw
    return tuple(sorted((_canon(c) for c in raw), key=hall_key))


def _walk(raw, parent=None) -> Iterator[tuple]:
    """``(node, parent)`` for every internal node, preorder."""
    if isinstance(raw, int):
        return
    yield raw, parent
    for c in raw:
        yield from _walk(c, raw)


def _merge(parent: list, node: list) -> None:
    i = next(i for i, c in enumerate(parent) if c is node)
    parent[i:i + 1] = node


def _parent_of(raw, node):
    for n, p in _walk(raw):
        if n is node:
            return p
    raise KeyError("node not found")


@dataclass
class HallProblem:
    """A Hall problem: contracting ``node`` into ``parent`` resolves it.

    ``kind`` is ``"plain"`` for ``((H', H''), H2)`` (``node`` is
    ``(H', H'')``) or ``"symmetric"`` for ``(H, H)`` (``node`` is ``(H, H)``).
    """

    node: list
    parent: list
    kind: str

    def location(self) -> RootedTree:
        return _canon(self.parent if self.kind == "plain" else self.node)


def _problems(raw, variant: str, parent=None) -> list:
    """Hall problems of full subtrees of ``raw`` (a degree-zero subtree).

    In the ``"mod2"`` variant symmetric problems ``(H, H)`` are included,
    except when ``(H, H)`` has no parent (it is the whole tree).
    """
    out = []
    for node, par in _walk(raw, parent):
        if len(node) != 2:
            continue
        c0, c1 = _canon(node[0]), _canon(node[1])
        if c0 == c1:
            if variant == "mod2" and par is not None and is_hall(c0):
                out.append(HallProblem(node, par, "symmetric"))
            continue
        (h1, r1), (h2, _) = sorted(((c0, node[0]), (c1, node[1])), key=lambda p: hall_key(p[0]))
        if isinstance(h1, int) or not (is_hall(h1) and is_hall(h2)):
            continue
        if _prec(h1[1], h2):
            out.append(HallProblem(r1, node, "plain"))
    return out


def _contracted(raw, prob: HallProblem, extra: Sequence = ()) -> tuple:
    """Canonical tree after contracting ``prob`` (and then each node in ``extra``)."""
    memo: dict = {}
    new = copy.deepcopy(raw, memo)
    _merge(memo[id(prob.parent)], memo[id(prob.node)])
    for node in extra:
        n = memo[id(node)]
        _merge(_parent_of(new, n), n)
    return _canon(new)


def hall_problems(t: RootedTree, variant: str = "dyadic") -> list:
    """``(problem location, contraction)`` pairs for a degree-zero tree."""
    raw = _to_raw(t)
    return [(p.location(), _contracted(raw, p)) for p in _problems(raw, _check_variant(variant))]


def _max_contraction(raw, probs: list) -> tuple:
    best = None
    for p in probs:
        c = _contracted(raw, p)
        if best is None or hall_key(c) > hall_key(best[0]):
            best = (c, p)
    return best


def _zero(t, variant: str) -> bool:
    return variant == "dyadic" and has_reversing_automorphism(t)


# ---------------------------------------------------------------------------
# degree zero


@lru_cache(maxsize=None)
def _delta0(t: RootedTree, variant: str):
    if degree(t) != 0 or is_unrooted(t) or isinstance(t, int):
        raise ValueError(f"{t!r} is not a degree-zero rooted tree")
    raw = _to_raw(t)
    best = _max_contraction(raw, _problems(raw, variant))
    return None if best is None else best[0]


def delta0(t: RootedTree) -> RootedTree | None:
    """``Delta0``: ``None`` on Hall trees, else the Hall-maximal contraction."""
    return _delta0(t, "dyadic")


def delta0_prime(t: RootedTree) -> RootedTree | None:
    """``Delta0'``: ``None`` on Hall' trees, else the maximal Hall' contraction."""
    return _delta0(t, "mod2")


# ---------------------------------------------------------------------------
# degree one


def _four_valent(raw):
    found = [(n, p) for n, p in _walk(raw) if len(n) > 2]
    if len(found) != 1 or len(found[0][0]) != 3:
        raise ValueError("expected exactly one 4-valent vertex")
    return found[0]


def _degree1_expansions(t: RootedTree) -> list:
    """The degree-zero trees obtained by expanding the 4-valent vertex."""
    raw = _to_raw(t)
    node, _ = _four_valent(raw)
    out = []
    for i, j in ((0, 1), (0, 2), (1, 2)):
        memo: dict = {}
        new = copy.deepcopy(raw, memo)
        n = memo[id(node)]
        k = 3 - i - j
        n[:] = [[n[i], n[j]], n[k]]
        out.append(_canon(new))
    return out


@lru_cache(maxsize=None)
def is_hall1(t: RootedTree, variant: str = "dyadic") -> bool:
    """Whether ``t`` is the image of a nonzero degree-zero tree under the degree-zero field."""
    _check_variant(variant)
    if degree(t) != 1:
        raise ValueError("Hall_1 is defined in degree one")
    for j0 in set(_degree1_expansions(t)):
        if _zero(j0, variant):
            continue
        if _delta0(j0, variant) == t:
            return True
    return False


def hall1_characterization(t: RootedTree, variant: str = "dyadic") -> bool:
    """Combinatorial test for Hall_1 (resp. Hall'_1) through the expanded tree."""
    raw = _to_raw(t)
    node, _ = _four_valent(raw)
    (A, rA), (B, rB), (C, rC) = sorted(((_canon(c), c) for c in node), key=lambda p: hall_key(p[0]))
    patterns = []
    if _strict_pattern(A, B, C):
        patterns.append((rA, rB, rC))
    if variant == "mod2":
        if A == B and is_hall(A):
            patterns.append((rA, rB, rC))
        if B == C and is_hall(B):
            patterns.append((rB, rC, rA))
    for x, y, z in patterns:
        je, _ = _expand(raw, node, x, y, z)
        cje = _canon(je)
        if _zero(cje, variant):
            continue
        best = _max_contraction(je, _problems(je, variant))
        if best is not None and best[0] == t:
            return True
    return False


def _strict_pattern(A, B, C) -> bool:
    if not (_prec(A, B) and _prec(B, C) and is_hall(A) and is_hall(B) and is_hall(C)):
        return False
    return isinstance(A, int) or not _prec(A[1], B)


def _expand(raw, node, x, y, z) -> tuple:
    """Copy of ``raw`` with ``node = (x, y, z)`` replaced by ``((x, y), z)``; returns (copy, new inner node)."""
    memo: dict = {}
    new = copy.deepcopy(raw, memo)
    n = memo[id(node)]
    inner = [memo.get(id(x), x), memo.get(id(y), y)]
    n[:] = [inner, memo.get(id(z), z)]
    return new, inner


@dataclass
class Delta1Result:
    """Image of a degree-one tree: ``coefficient * tree`` with the problem type."""

    tree: RootedTree
    coefficient: Fraction
    case: str
    ambiguous: bool = False


def _delta1(t: RootedTree, variant: str) -> Delta1Result | None:
    if degree(t) != 1 or is_unrooted(t):
        raise ValueError(f"{t!r} is not a degree-one rooted tree")
    if _zero(t, variant):
        raise ValueError(f"{to_text(t)} vanishes over Z[1/2]")
    if is_hall1(t, variant):
        return None
    raw = _to_raw(t)
    node, _ = _four_valent(raw)
    (A, rA), (B, rB), (C, rC) = sorted(((_canon(c), c) for c in node), key=lambda p: hall_key(p[0]))
    hA, hB, hC = is_hall(A), is_hall(B), is_hall(C)

    def inside(*subs):
        probs = []
        for s in subs:
            if not isinstance(s, int):
                probs += _problems(s, variant, node)
        best = _max_contraction(raw, probs)
        if best is None:
            raise AssertionError(f"no Hall problem inside the branches of {to_text(t)}")
        return Delta1Result(best[0], Fraction(1), "i")

    # type (i): a branch at the 4-valent vertex is not Hall
    if variant == "mod2":
        if A == B and not hA:
            return inside(rA)
        if _prec(A, B) and B == C and not hB:
            return inside(rB)
        if _prec(A, B) and _prec(B, C) and not (hA and hB and hC):
            return inside(rA, rB, rC)
    elif not (hA and hB and hC):
        return inside(rA, rB, rC)
    # type (ii): A = (A', A'') with A'' < B
    if _prec(A, B) and _prec(B, C) and not isinstance(A, int) and _prec(A[1], B):
        memo: dict = {}
        new = copy.deepcopy(raw, memo)
        _merge(memo[id(node)], memo[id(rA)])
        return Delta1Result(_canon(new), Fraction(1), "ii")
    # types (iii) and (iv): t is the contraction of a problem of the expanded tree
    if _strict_pattern(A, B, C):
        x, y, z = rA, rB, rC
    elif variant == "mod2" and A == B:
        x, y, z = rA, rB, rC
    elif variant == "mod2" and B == C:
        x, y, z = rB, rC, rA
    else:
        raise AssertionError(f"unclassified degree-one tree {to_text(t)}")
    je, inner = _expand(raw, node, x, y, z)
    if _zero(_canon(je), variant):
        return _type_iv(raw, node, je)
    probs = [p for p in _problems(je, variant) if p.node is not inner]
    best = _max_contraction(je, probs)
    own = _contracted(je, next(p for p in _problems(je, variant) if p.node is inner))
    if best is None or hall_key(best[0]) < hall_key(own):
        raise AssertionError(f"{to_text(t)} should have been Hall_1")
    return Delta1Result(_contracted(je, best[1], extra=[inner]), Fraction(1), "iii")


def _type_iv(raw, node, je) -> Delta1Result:
    """Contract the twin of ``((A,B),C)`` whose swap makes the expanded tree vanish."""
    choices = []
    child = node
    while True:
        par = _parent_of(raw, child)
        if par is None:
            break
        expanded = _canon(_subtree_in(je, raw, child))
        for sib in par:
            if sib is not child and _canon(sib) == expanded:
                choices.append((par, child, sib))
                break
        child = par
    if not choices:
        raise AssertionError("vanishing expanded tree without a twin copy")
    par, child, sib = choices[0]
    memo: dict = {}
    new = copy.deepcopy(raw, memo)
    npar = memo[id(par)]
    i = next(i for i, c in enumerate(npar) if c is memo[id(sib)])
    npar[i] = copy.deepcopy(child)
    return Delta1Result(_canon(new), Fraction(1, 2), "iv", ambiguous=len(choices) > 1)


def _subtree_in(je, raw, child):
    """The subtree of ``je`` occupying the position of ``child`` in ``raw``."""
    path = _path_to(raw, child)
    cur = je
    for i in path:
        cur = cur[i]
    return cur


def _path_to(raw, target) -> list:
    stack = [(raw, [])]
    while stack:
        n, p = stack.pop()
        if n is target:
            return p
        if not isinstance(n, int):
            for i, c in enumerate(n):
                stack.append((c, p + [i]))
    raise KeyError("node not found")


def delta1(t: RootedTree) -> Delta1Result | None:
    return _delta1(t, "dyadic")


def delta1_prime(t: RootedTree) -> Delta1Result | None:
    return _delta1(t, "mod2")


# ---------------------------------------------------------------------------
# the combined fields


@dataclass
class HallReport:
    signature: tuple
    variant: str
    valid: bool
    vectors: int
    critical: dict
    hall_count: int
    critical_matches_basis: bool
    errors: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)
    ambiguous: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.valid and self.critical.get(1, 0) == 0 and self.critical_matches_basis

    def as_dict(self) -> dict:
        return {"signature": list(self.signature), "variant": self.variant, "ok": self.ok,
                "valid": self.valid, "vectors": self.vectors,
                "criticalByDegree": {str(k): v for k, v in sorted(self.critical.items())},
                "hallCount": self.hall_count, "criticalMatchesBasis": self.critical_matches_basis,
                "errors": self.errors, "witnesses": self.witnesses, "ambiguous": self.ambiguous}


def hall_field(C, variant: str) -> tuple:
    """Degree-zero and degree-one fields on an ``L`` complex; returns (field, ambiguous trees)."""
    d0 = delta0 if variant == "dyadic" else delta0_prime
    d1 = delta1 if variant == "dyadic" else delta1_prime
    fld = VectorField()
    ambiguous = []
    for t in C.gens.get(0, []):
        b = d0(t)
        if b is not None:
            fld.add(1, t, b)
    if 2 in C.gens:
        for t in C.gens.get(1, []):
            r = d1(t)
            if r is not None:
                fld.add(2, t, r.tree)
                if r.ambiguous:
                    ambiguous.append(to_text(t))
    return fld, ambiguous


def verify_degree1_killed(sig: Sequence[int], variant: str = "dyadic") -> HallReport:
    """Build the Hall field on ``L`` for ``sig`` and check it kills degree one."""
    _check_variant(variant)
    sig = tuple(sig)
    ring = Ring.ZHALF if variant == "dyadic" else Ring.Z2
    C = build_complex("L", sig, ring, max_degree=2)
    fld, ambiguous = hall_field(C, variant)
    rep = validate_field(C, fld)
    basis = hall_basis(sig) if variant == "dyadic" else hall_prime_basis(sig)
    if not rep.ok:
        return HallReport(sig, variant, False, len(fld), {}, len(basis), False, rep.errors,
                          [str(x) for x in (rep.cycle or [])], ambiguous)
    data = morse_data(C, fld, check=False)
    crit = {k: len(v) for k, v in data.critical.items() if k <= 1}
    crit0 = set(data.critical_generators(0))
    matches = crit0 == set(basis)
    witnesses = [to_text(t) for t in data.critical_generators(1)][:5]
    return HallReport(sig, variant, True, len(fld), crit, len(basis), matches, [], witnesses, ambiguous)


def expansions_increase(j: RootedTree, image: RootedTree, ring: Ring = Ring.Z) -> bool:
    """Every term of ``d(image)`` other than ``j`` is Hall-greater than ``j``.

    Terms are taken with their net coefficient over ``ring``, so expansions
    that cancel (for instance in pairs over ``Z/2``) are ignored.
    """
    key = hall_key(j)
    return all(hall_key(s) > key for s in boundary({image: 1}, "L", ring) if s != j)
