"""Run the desk-scale verifications with configurable bounds and print a summary."""

import argparse
import math
import time
from dataclasses import dataclass, fields

from treehomology.complexes import build_complex, signatures
from treehomology.exactlinalg import Ring, homology, homology_all
from treehomology.hall import VARIANTS, verify_degree1_killed
from treehomology.levine import verify_levine_iso, verify_section5


@dataclass
class VerifyConfig:
    h1_max_weight: int = 7
    h1_max_letters: int = 3
    hall_max_weight: int = 6
    levine_max_n_two_letters: int = 4
    levine_max_n_three_letters: int = 3
    section5_max_weight: int = 6
    torsion_max_weight: int = 6


def positive(lo, hi, max_letters=None):
    for n in range(lo, hi + 1):
        for m in range(1, (max_letters or n) + 1):
            yield from signatures(n, m, positive=True)


def check_h1(cfg):
    for sig in positive(2, cfg.h1_max_weight, cfg.h1_max_letters):
        C = build_complex("L", sig, Ring.Z, max_degree=2)
        if 1 in C.gens and not homology(C, 1).is_trivial():
            return f"H_1 nonzero for {sig}"


def check_hall(cfg):
    for sig in positive(2, cfg.hall_max_weight):
        for v in VARIANTS:
            rep = verify_degree1_killed(sig, v)
            if not rep.ok:
                return f"{v} field fails on {sig}: {rep.errors[:1]}"


def check_levine(cfg):
    for m, top in ((2, cfg.levine_max_n_two_letters), (3, cfg.levine_max_n_three_letters)):
        for n in range(1, top + 1):
            for rep in verify_levine_iso(n, m):
                if not rep.isomorphism:
                    return f"eta' fails on {rep.signature}: {rep.as_dict()}"


def check_section5(cfg):
    for sig in positive(3, cfg.section5_max_weight):
        rep = verify_section5(sig)
        if not rep.ok:
            return f"root-slide structure fails on {sig}: {rep.errors[:2]}"


def check_torsion(cfg):
    for sig in positive(2, cfg.torsion_max_weight):
        n = sum(sig)
        for fam in ("L", "T") if n >= 3 else ("L",):
            for k, g in homology_all(build_complex(fam, sig)).items():
                if k and (g.rank or any(math.factorial(n) % d for d in g.torsion)):
                    return f"H_{k}({fam}) = {g} for {sig}"


CHECKS = {
    "h1-vanish": check_h1,
    "hall-fields": check_hall,
    "levine-iso": check_levine,
    "root-slide": check_section5,
    "torsion-bounds": check_torsion,
}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    for f in fields(VerifyConfig):
        ap.add_argument("--" + f.name.replace("_", "-"), type=int, default=f.default)
    ap.add_argument("--only", choices=sorted(CHECKS), action="append")
    args = ap.parse_args()
    cfg = VerifyConfig(**{f.name: getattr(args, f.name) for f in fields(VerifyConfig)})
    failed = 0
    for name in args.only or CHECKS:
        start = time.monotonic()
        problem = CHECKS[name](cfg)
        failed += problem is not None
        print(f"{name:15} {'FAIL ' + problem if problem else 'PASS'} ({time.monotonic() - start:.1f}s)")
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
