"""End-to-end acceptance checks, one PASS/FAIL line per criterion."""

import itertools
import math
import random
import time

import pytest

from treehomology.cli import REFERENCE_TABLE, JobConfig, compute_table
from treehomology.complexes import build_complex, signatures
from treehomology.exactlinalg import AbelianGroup, Ring, homology, homology_all
from treehomology.hall import VARIANTS, hall_basis, hall_prime_basis, verify_degree1_killed
from treehomology.levine import verify_levine_iso, verify_section5
from treehomology.morse import (
    RandomComplexConfig,
    check_identities,
    morse_data,
    random_complex,
    random_gradient_field,
    validate_field,
)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
        return ok

    return emit


def positive_signatures(lo, hi, max_letters=None):
    for n in range(lo, hi + 1):
        for m in range(1, (max_letters or n) + 1):
            yield from signatures(n, m, positive=True)


def test_criterion_1_reference_table(report):
    start = time.monotonic()
    cells = compute_table(JobConfig("table"), 2, 6, 2, 6)
    elapsed = time.monotonic() - start
    bad = {c: v for c, v in cells.items() if AbelianGroup.parse(v) != REFERENCE_TABLE[c]}
    ok = not bad and elapsed <= 600
    report(1, ok, f"T_(j,k) for 2 <= j,k <= 6 matches the reference table ({len(cells)} cells, {elapsed:.1f}s)")
    assert not bad, bad
    assert elapsed <= 600


def test_criterion_2_h1_vanishes(report):
    start = time.monotonic()
    bad = []
    count = 0
    for sig in positive_signatures(2, 7, max_letters=3):
        C = build_complex("L", sig, Ring.Z, max_degree=2)
        count += 1
        if 1 in C.gens and not homology(C, 1).is_trivial():
            bad.append(sig)
    elapsed = time.monotonic() - start
    ok = not bad and elapsed <= 900
    report(2, ok, f"H_1(L; Z) = 0 for {count} signatures with |sig| <= 7, m <= 3 ({elapsed:.1f}s)")
    assert not bad, bad
    assert elapsed <= 900


def test_criterion_3_hall_fields(report):
    start = time.monotonic()
    bad = []
    count = 0
    for sig in positive_signatures(2, 6):
        for variant in VARIANTS:
            rep = verify_degree1_killed(sig, variant)
            count += 1
            if not (rep.valid and rep.critical.get(1, 0) == 0):
                bad.append((sig, variant, rep.errors[:2]))
    elapsed = time.monotonic() - start
    ok = not bad and elapsed <= 600
    report(3, ok, f"Hall fields valid with no degree-1 critical trees ({count} cases, {elapsed:.1f}s)")
    assert not bad, bad
    assert elapsed <= 600


def test_criterion_4_levine_isomorphism(report):
    start = time.monotonic()
    bad = []
    count = 0
    for m, nmax in ((2, 4), (3, 3)):
        for n in range(1, nmax + 1):
            for rep in verify_levine_iso(n, m):
                count += 1
                if not (rep.isomorphism and rep.surjective and rep.t_group == rep.dprime_group
                        and rep.kernel_killed_by(n + 2)):
                    bad.append(rep.as_dict())
    elapsed = time.monotonic() - start
    ok = not bad and elapsed <= 900
    report(4, ok, f"eta' is an isomorphism onto D' ({count} signatures, {elapsed:.1f}s)")
    assert not bad, bad
    assert elapsed <= 900


def test_criterion_5_morse_engine(report):
    start = time.monotonic()
    rng = random.Random(20260515)
    fields = 0
    bad = []
    rings = itertools.cycle(list(Ring))
    while fields < 240:
        ring = next(rings)
        C, known = random_complex(rng, RandomComplexConfig(ring=ring, max_generators=40))
        F = random_gradient_field(C, rng)
        if not F.pairs or not validate_field(C, F).ok:
            continue
        fields += 1
        data = morse_data(C, F)
        M = data.complex()
        fails = check_identities(data)
        HC = homology_all(C, reduce=False)
        HM = homology_all(M, reduce=False)
        if fails or HC != HM or HC != known:
            bad.append((ring.value, fails))
    elapsed = time.monotonic() - start
    ok = not bad and elapsed <= 300
    report(5, ok, f"{fields} random gradient fields: H(C) = H(C^D), (d^D)^2 = 0, d^D phi = phi d ({elapsed:.1f}s)")
    assert not bad, bad
    assert elapsed <= 300


def test_criterion_6_root_slide_structure(report):
    bad = []
    count = 0
    for sig in positive_signatures(3, 6):
        rep = verify_section5(sig)
        count += 1
        if not (rep.field_ok and rep.critical_ok and rep.cok_acyclic and rep.ker0_vanishes):
            bad.append((sig, rep.errors[:3]))
    ok = not bad
    report(6, ok, f"root-slide field, critical set, acyclic Cok, Ker_0 dies in T ({count} signatures)")
    assert not bad, bad


def test_criterion_7_torsion_bounds(report):
    bad = []
    count = 0
    for sig in positive_signatures(2, 6):
        n = sum(sig)
        for family in ("L", "T"):
            if family == "T" and n < 3:
                continue
            count += 1
            H = homology_all(build_complex(family, sig, Ring.Z))
            for k, g in H.items():
                if k >= 1 and (g.rank or any(math.factorial(n) % d for d in g.torsion)):
                    bad.append((family, sig, k, str(g)))
    ok = not bad
    report(7, ok, f"H_k has rank 0 for k >= 1 and torsion dividing |sig|! ({count} complexes)")
    assert not bad, bad


def lyndon_count(sig):
    letters = [i for i, c in enumerate(sig) for _ in range(c)]
    return sum(
        1 for w in set(itertools.permutations(letters))
        if all(w < w[i:] + w[:i] for i in range(1, len(w)))
    )


def test_criterion_8_hall_counts(report):
    bad = []
    count = 0
    for n in range(1, 9):
        for m in (1, 2, 3):
            for sig in signatures(n, m):
                count += 1
                h = len(hall_basis(sig))
                if h != lyndon_count(sig):
                    bad.append(("hall", sig))
                half = len(hall_basis(tuple(x // 2 for x in sig))) if all(x % 2 == 0 for x in sig) else 0
                if len(hall_prime_basis(sig)) != h + half:
                    bad.append(("prime", sig))
    ok = not bad
    report(8, ok, f"Hall counts equal necklace counts and Hall' = Hall + Hall(half) ({count} signatures)")
    assert not bad, bad
