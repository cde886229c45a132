"""Print D'_n next to H_0(T) in each signature of weight n + 2."""

import argparse

from treehomology.levine import verify_levine_iso


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nmax", type=int, default=4)
    ap.add_argument("--m", type=int, default=2)
    args = ap.parse_args()
    for n in range(1, args.nmax + 1):
        for rep in verify_levine_iso(n, args.m):
            sig = ",".join(map(str, rep.signature))
            print(f"n={n} sig=({sig}) T={rep.t_group} D'={rep.dprime_group} iso={rep.isomorphism}")


if __name__ == "__main__":
    main()
