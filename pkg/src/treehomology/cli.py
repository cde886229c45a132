"""Command line front end.

Exit status: 0 when every check holds, 1 when a check is falsified and 2
when the time budget ran out before all cells or signatures were computed.
"""

from __future__ import annotations

import csv
import io
import json
import multiprocessing
import sys
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import click

from . import __version__
from .complexes import FAMILIES, cached_complex, signatures
from .exactlinalg import AbelianGroup, Ring, homology
from .hall import VARIANTS, hall_basis, hall_prime_basis, verify_degree1_killed, witt_number
from .levine import levine_signature, verify_section5
from .trees import to_text

EXIT_OK, EXIT_FALSIFIED, EXIT_RESOURCE = 0, 1, 2
SKIPPED = "SKIPPED(budget)"
CACHE_ENV = "TREEHOMOLOGY_CACHE"

_REFERENCE_ROWS = {
    2: "Z, Z2, Z, Z2, Z, Z2, Z, Z2",
    3: "Z2, Z, Z2, Z, Z+Z2, Z, Z+Z2, Z^2",
    4: "Z, Z2, Z^2, Z+Z2, Z^3, Z^2+Z2^2, Z^5, Z^3+Z2^2",
    5: "Z2, Z, Z+Z2, Z^3, Z^3+Z2^2, Z^6, Z^7+Z2^2, Z^11",
    6: "Z, Z+Z2, Z^3, Z^3+Z2^2, Z^9, Z^9+Z2^3, Z^19, Z^22+Z2^5",
    7: "Z2, Z, Z^2+Z2^2, Z^6, Z^9+Z2^3, Z^19, Z^28+Z2^5, Z^47",
    8: "Z, Z+Z2, Z^5, Z^7+Z2^2, Z^19, Z^28+Z2^5, Z^58",
    9: "Z2, Z^2, Z^3+Z2^2, Z^11, Z^22+Z2^5, Z^47",
    10: "Z, Z+Z2, Z^7, Z^13+Z2^3, Z^36",
    11: "Z2, Z^2, Z^5+Z2^3, Z^18",
    12: "Z, Z^2+Z2, Z^9",
}

# T_(j,k) = H_0 of the tree complex with j leaves labelled 1 and k labelled 2
REFERENCE_TABLE = {
    (j, k): AbelianGroup.parse(cell)
    for j, row in _REFERENCE_ROWS.items()
    for k, cell in enumerate((c.strip() for c in row.split(",")), start=2)
}


@dataclass
class JobConfig:
    command: str
    fmt: str = "text"
    cache_dir: str | None = None
    jobs: int = 1
    budget_secs: float | None = None


# ---------------------------------------------------------------------------
# scheduling


def run_jobs(fn: Callable, items: Sequence, cfg: JobConfig) -> list:
    """Apply ``fn`` to ``items`` in order; entries past the budget are ``None``.

    With ``cfg.jobs > 1`` the items are fanned out to a process pool which is
    terminated when the budget runs out.
    """
    deadline = None if cfg.budget_secs is None else time.monotonic() + cfg.budget_secs
    results: list = [None] * len(items)
    if cfg.jobs <= 1 or len(items) <= 1:
        for i, x in enumerate(items):
            if deadline is not None and time.monotonic() > deadline:
                break
            results[i] = fn(x)
        return results
    pool = multiprocessing.Pool(cfg.jobs)
    try:
        it = pool.imap(fn, items)
        for i in range(len(items)):
            timeout = None if deadline is None else max(0.0, deadline - time.monotonic())
            try:
                results[i] = it.next(timeout)
            except multiprocessing.TimeoutError:
                break
    finally:
        pool.terminate()
        pool.join()
    return results


def _parse_sig(text: str) -> tuple:
    try:
        sig = tuple(int(x) for x in text.replace(" ", "").split(",") if x)
    except ValueError:
        raise click.BadParameter(f"signature must be comma-separated integers, got {text!r}")
    if not sig or any(x < 0 for x in sig):
        raise click.BadParameter(f"bad signature {text!r}")
    return sig


def _emit(cfg: JobConfig, payload: dict, rows: list, columns: Sequence[str], text: str) -> None:
    if cfg.fmt == "json":
        click.echo(json.dumps(payload, indent=2, sort_keys=True))
    elif cfg.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([r.get(c, "") for c in columns])
        click.echo(buf.getvalue(), nl=False)
    else:
        click.echo(text)


# ---------------------------------------------------------------------------
# workers (module level so that they pickle)


def _table_cell(args) -> str:
    j, k, cache_dir = args
    C = cached_complex("T", (j, k), Ring.Z, max_degree=1, cache_dir=cache_dir)
    return str(homology(C, 0))


def _h1_cell(args) -> dict:
    sig, ring, cache_dir = args
    C = cached_complex("L", sig, Ring.parse(ring), max_degree=2, cache_dir=cache_dir)
    h = homology(C, 1) if 1 in C.gens else AbelianGroup()
    return {"signature": list(sig), "H1": str(h), "ok": h.is_trivial()}


def _morse_cell(args) -> dict:
    sig, variant = args
    return verify_degree1_killed(sig, variant).as_dict()


def _levine_cell(sig) -> dict:
    rep = levine_signature(sig)
    return rep.as_dict() | {"kernelKilled": rep.kernel_killed_by(sum(sig))}


def _section5_cell(sig) -> dict:
    return verify_section5(sig).as_dict()


# ---------------------------------------------------------------------------
# commands


@click.group()
@click.version_option(__version__)
@click.option("--format", "fmt", type=click.Choice(["text", "json", "csv"]), default="text", show_default=True)
@click.option("--cache-dir", type=click.Path(file_okay=False), envvar=CACHE_ENV, default=None,
              help=f"Directory for cached complexes (env {CACHE_ENV}).")
@click.option("--jobs", type=click.IntRange(1), default=1, show_default=True, help="Worker processes.")
@click.option("--budget-secs", type=click.FloatRange(0), default=None, help="Wall-clock budget in seconds.")
@click.pass_context
def main(ctx: click.Context, fmt: str, cache_dir: str | None, jobs: int, budget_secs: float | None) -> None:
    """Homology of tree complexes, Hall bases and Levine's map."""
    ctx.obj = JobConfig("", fmt, cache_dir, jobs, budget_secs)


def compute_table(cfg: JobConfig, jmin: int, jmax: int, kmin: int, kmax: int) -> dict:
    """``{(j, k): group string or SKIPPED}``, cheapest cells first."""
    cells = sorted(((j, k) for j in range(jmin, jmax + 1) for k in range(kmin, kmax + 1)),
                   key=lambda c: (c[0] + c[1], c))
    # T_(j,k) = T_(k,j): compute each unordered pair once
    todo = sorted({tuple(sorted(c)) for c in cells}, key=lambda c: (c[0] + c[1], c))
    values = run_jobs(_table_cell, [(j, k, cfg.cache_dir) for j, k in todo], cfg)
    got = dict(zip(todo, values))
    return {c: got[tuple(sorted(c))] or SKIPPED for c in cells}


@main.command()
@click.option("--jmin", type=click.IntRange(1), default=2, show_default=True)
@click.option("--jmax", type=click.IntRange(1), default=6, show_default=True)
@click.option("--kmin", type=click.IntRange(1), default=2, show_default=True)
@click.option("--kmax", type=click.IntRange(1), default=6, show_default=True)
@click.option("--check/--no-check", default=True, show_default=True,
              help="Compare with the reference table where it is defined.")
@click.pass_obj
def table(cfg: JobConfig, jmin: int, jmax: int, kmin: int, kmax: int, check: bool) -> None:
    """Table of the groups T_(j,k) = H_0(T) in signature (j, k)."""
    cfg.command = "table"
    if jmin + kmin < 3:
        raise click.BadParameter("need j + k >= 3")
    cells = compute_table(cfg, jmin, jmax, kmin, kmax)
    mismatches = []
    for (j, k), v in cells.items():
        ref = REFERENCE_TABLE.get((j, k))
        if check and ref is not None and v != SKIPPED and AbelianGroup.parse(v) != ref:
            mismatches.append({"j": j, "k": k, "computed": v, "expected": str(ref)})
    skipped = any(v == SKIPPED for v in cells.values())
    rows = [{"j": j, "k": k, "group": v, "reference": str(REFERENCE_TABLE.get((j, k), ""))}
            for (j, k), v in sorted(cells.items())]
    ks = list(range(kmin, kmax + 1))
    width = max(len(v) for v in cells.values())
    lines = [("j\\k".ljust(5) + " ".join(str(k).ljust(width) for k in ks)).rstrip()]
    for j in range(jmin, jmax + 1):
        lines.append(str(j).ljust(5) + " ".join(cells[(j, k)].ljust(width) for k in ks).rstrip())
    for m in mismatches:
        lines.append(f"MISMATCH ({m['j']},{m['k']}): computed {m['computed']}, expected {m['expected']}")
    payload = {"cells": rows, "mismatches": mismatches, "skipped": skipped}
    _emit(cfg, payload, rows, ["j", "k", "group", "reference"], "\n".join(lines))
    sys.exit(EXIT_FALSIFIED if mismatches else EXIT_RESOURCE if skipped else EXIT_OK)


def _targets(sig: str | None, n: int | None, m: int | None, positive: bool = False) -> list:
    if sig:
        return [_parse_sig(sig)]
    if n is None or m is None:
        raise click.UsageError("give --sig or both --n and --m")
    return list(signatures(n, m, positive=positive))


def _finish(cfg: JobConfig, what: str, items: list, results: list, ok_key: Callable[[dict], bool],
            extra: dict | None = None, columns: Sequence[str] = ("signature", "ok")) -> None:
    done = [r for r in results if r is not None]
    failures = [r for r in done if not ok_key(r)]
    skipped = len(done) < len(items)
    rows = [dict(r, signature=",".join(map(str, r["signature"])), ok=ok_key(r)) for r in done]
    payload = {"check": what, "results": done, "passed": not failures and not skipped,
               "falsified": bool(failures), "skipped": [list(s) for s, r in zip(items, results) if r is None]}
    payload.update(extra or {})
    lines = []
    for r in rows:
        tag = f" {r['variant']}" if "variant" in r else ""
        lines.append(f"{what} ({r['signature']}){tag}: {'PASS' if r['ok'] else 'FAIL'}")
    for s, r in zip(items, results):
        if r is None:
            lines.append(f"{what} ({','.join(map(str, s))}): {SKIPPED}")
    if failures:
        lines.append(f"first witness: {json.dumps(failures[0], sort_keys=True)}")
    _emit(cfg, payload, rows, columns, "\n".join(lines))
    sys.exit(EXIT_FALSIFIED if failures else EXIT_RESOURCE if skipped else EXIT_OK)


@main.command()
@click.argument("what", type=click.Choice(["h1-vanish", "morse-fields", "levine-iso", "section5"]))
@click.option("--n", "n", type=click.IntRange(1), default=None, help="Weight parameter.")
@click.option("--m", "m", type=click.IntRange(1), default=None, help="Number of labels.")
@click.option("--sig", default=None, help="A single signature such as 2,3.")
@click.option("--ring", type=click.Choice([r.value for r in Ring]), default="Z", show_default=True,
              help="Coefficients for h1-vanish.")
@click.option("--variant", type=click.Choice(list(VARIANTS) + ["both"]), default="both", show_default=True,
              help="Hall field variant for morse-fields.")
@click.pass_obj
def verify(cfg: JobConfig, what: str, n, m, sig, ring, variant) -> None:
    """Run a verification over all signatures of a given size.

    For h1-vanish, morse-fields and section5 the signatures have weight N;
    for levine-iso they have weight N + 2 (the degree of Levine's map is N).
    """
    cfg.command = f"verify {what}"
    if what == "h1-vanish":
        items = _targets(sig, n, m)
        results = run_jobs(_h1_cell, [(s, ring, cfg.cache_dir) for s in items], cfg)
        _finish(cfg, what, items, results, lambda r: r["ok"], {"ring": ring}, ("signature", "H1", "ok"))
    elif what == "morse-fields":
        sigs = _targets(sig, n, m, positive=True)
        variants = list(VARIANTS) if variant == "both" else [variant]
        items = [s for s in sigs for _ in variants]
        args = [(s, v) for s in sigs for v in variants]
        results = run_jobs(_morse_cell, args, cfg)
        _finish(cfg, what, items, results, lambda r: r["ok"], None, ("signature", "variant", "hallCount", "ok"))
    elif what == "levine-iso":
        items = [_parse_sig(sig)] if sig else _targets(None, None if n is None else n + 2, m)
        results = run_jobs(_levine_cell, items, cfg)
        done = [r for r in results if r is not None]
        extra = {"n": n, "m": m,
                 "tGroup": str(_sum(AbelianGroup.parse(r["T"]) for r in done)),
                 "dPrimeGroup": str(_sum(AbelianGroup.parse(r["Dprime"]) for r in done)),
                 "etaIso": all(r["isomorphism"] for r in done),
                 "kernelOrder": _order(_sum(AbelianGroup.parse(r["kernel"]) for r in done))}
        _finish(cfg, what, items, results, lambda r: r["isomorphism"] and r["kernelKilled"], extra,
                ("signature", "T", "Dprime", "isomorphism", "ok"))
    else:
        items = [s for s in _targets(sig, n, m) if sum(s) >= 3]
        results = run_jobs(_section5_cell, items, cfg)
        _finish(cfg, what, items, results, lambda r: r["ok"])


def _sum(groups: Iterable[AbelianGroup]) -> AbelianGroup:
    rank, factors = 0, []
    for g in groups:
        rank += g.rank
        factors += list(g.torsion)
    return AbelianGroup.from_factors(rank, factors)


def _order(g: AbelianGroup):
    return "infinite" if g.rank else g.order_of_torsion()


@main.command()
@click.option("--sig", required=True, help="Signature such as 2,3.")
@click.option("--variant", type=click.Choice(["standard", "prime"]), default="standard", show_default=True)
@click.option("--list/--no-list", "listing", default=True, show_default=True)
@click.pass_obj
def hall(cfg: JobConfig, sig: str, variant: str, listing: bool) -> None:
    """List the Hall (or Hall') trees of a signature and check the count."""
    cfg.command = "hall"
    s = _parse_sig(sig)
    trees = hall_basis(s) if variant == "standard" else hall_prime_basis(s)
    expected = witt_number(s)
    if variant == "prime" and all(x % 2 == 0 for x in s):
        expected += witt_number(tuple(x // 2 for x in s))
    ok = len(trees) == expected
    rows = [{"tree": to_text(t)} for t in trees]
    payload = {"signature": list(s), "variant": variant, "count": len(trees), "expected": expected,
               "ok": ok, "trees": [r["tree"] for r in rows] if listing else []}
    lines = [r["tree"] for r in rows] if listing else []
    lines.append(f"count {len(trees)} (expected {expected}): {'PASS' if ok else 'FAIL'}")
    _emit(cfg, payload, rows if listing else [], ["tree"], "\n".join(lines))
    sys.exit(EXIT_OK if ok else EXIT_FALSIFIED)


@main.command(name="homology")
@click.option("--family", type=click.Choice(list(FAMILIES)), required=True)
@click.option("--sig", required=True, help="Signature such as 2,3.")
@click.option("--deg", type=int, default=None, help="Single degree (all degrees by default).")
@click.option("--ring", type=click.Choice([r.value for r in Ring]), default="Z", show_default=True)
@click.pass_obj
def homology_cmd(cfg: JobConfig, family: str, sig: str, deg, ring: str) -> None:
    """Homology groups of one complex."""
    cfg.command = "homology"
    s = _parse_sig(sig)
    R = Ring.parse(ring)
    try:
        max_degree = None if deg is None else deg + 1
        C = cached_complex(family, s, R, max_degree=max_degree, cache_dir=cfg.cache_dir)
    except ValueError as exc:
        raise click.BadParameter(str(exc))
    degs = C.degrees() if deg is None else [deg]
    if deg is not None and deg not in C.gens:
        raise click.BadParameter(f"degree {deg} is outside the complex")
    out = {k: str(homology(C, k)) for k in degs}
    rows = [{"degree": k, "group": g} for k, g in out.items()]
    payload = {"family": family, "signature": list(s), "ring": R.value,
               "homology": {str(k): g for k, g in out.items()},
               "sizes": {str(k): C.size(k) for k in C.degrees()}}
    text = "\n".join(f"H_{k}({family}; {R.value}) = {g}" for k, g in out.items())
    _emit(cfg, payload, rows, ["degree", "group"], text)


if __name__ == "__main__":
    main()
