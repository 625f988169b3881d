"""Command-line entry point: ``chl <series|verify|cache|export> [flags]``.

Exit status is 0 when everything requested succeeded, 1 when a verification
check failed and 2 for usage errors (bad flags, unknown names, truncations
that cannot be satisfied).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import shutil
import sys
from fractions import Fraction
from typing import Callable

from . import classical, dt, genera, lattice, lifts
from .scalars import render_scalar
from .series import SeriesError, TriSeries
from .suites import SUITES, reports_json, run_suite


class UsageError(Exception):
    pass


def _frac(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"{text!r} is not a rational number") from exc


def _need(args, name: str):
    value = getattr(args, name)
    if value is None:
        raise UsageError(f"--{name} is required for series {args.name!r}")
    return value


def _jacobi(name: str) -> Callable:
    return lambda a: classical.jacobi_basic(name, _need(a, "qmax"), a.pmax)


def _generator(name: str) -> Callable:
    return lambda a: lattice.siegel_generators(_need(a, "qmax"), _need(a, "tmax"))[name]


def _diag(a) -> TriSeries:
    counts = dt.diagonal_count(a.N, int(_need(a, "qmax")))
    return TriSeries.q_series({d: c for d, c in enumerate(counts, start=1)}, len(counts))


def _thm1(a) -> TriSeries:
    side = a.side or "t"
    order = _need(a, "qmax") if side == "t" else _need(a, "tmax")
    return dt.thm1_rhs(a.N, side, order, a.pmax if a.pmax is not None else 6)


SERIES: dict[str, Callable] = {
    "delta_N": lambda a: classical.delta_N(a.N, _need(a, "qmax")),
    "eisenstein": lambda a: classical.eisenstein(a.k, _need(a, "qmax")),
    "E_N": lambda a: classical.eisenstein_level(a.N, a.variant, _need(a, "qmax")),
    "K": _jacobi("K"),
    "wp": _jacobi("wp"),
    "phi-2-1": _jacobi("phi-2-1"),
    "phi0-1": _jacobi("phi0-1"),
    "F": lambda a: genera.twisted_twined(a.N, a.r, a.s, _need(a, "qmax")).series,
    "Fhat": lambda a: genera.dft_hat(a.N, a.r, a.s, _need(a, "qmax")).series,
    "phi-tilde": lambda a: lifts.borcherds_lift(a.N, _need(a, "qmax"), _need(a, "tmax")),
    "chi10": lambda a: lifts.named_lift("chi10", _need(a, "qmax"), _need(a, "tmax")),
    "E4_2": lambda a: lifts.named_lift("E4_2", _need(a, "qmax"), _need(a, "tmax")),
    "G4": lambda a: lifts.named_lift("G4", _need(a, "qmax"), _need(a, "tmax")),
    "F4": lambda a: lifts.named_lift("F4", _need(a, "qmax"), _need(a, "tmax")),
    "X": _generator("X"),
    "Y": _generator("Y"),
    "Z": _generator("Z"),
    "W": _generator("W"),
    "T": _generator("T"),
    "an_theta": lambda a: lattice.an_theta(a.n, _need(a, "qmax")),
    "theta_e8": lambda a: lattice.theta_e8_jacobi(lattice.default_y_vectors()[0], _need(a, "qmax")),
    "z_chl": lambda a: dt.z_chl(a.N, _need(a, "qmax"), _need(a, "tmax"), a.pmax if a.pmax is not None else 6),
    "z_tw": lambda a: dt.z_tw(_need(a, "qmax"), _need(a, "tmax"), a.pmax if a.pmax is not None else 6),
    "z_untw": lambda a: dt.z_untw(_need(a, "qmax"), _need(a, "tmax"), a.pmax if a.pmax is not None else 6),
    "thm1": _thm1,
    "thm2": lambda a: dt.thm2_rhs(a.N, _need(a, "qmax"), a.pmax if a.pmax is not None else 6),
    "hilb": lambda a: dt.hilb_orbifold_gen(a.N, _need(a, "qmax"), a.which),
    "delta_diag": _diag,
}


def render_series(s: TriSeries, fmt: str) -> str:
    if fmt == "json":
        return s.to_json()
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["q", "t", "p", "coefficient"])
        for q, t, p, v in s.sorted_terms():
            w.writerow([str(q), str(t), str(p), render_scalar(v)])
        return buf.getvalue().rstrip("\n")
    return s.to_text()


def cmd_series(args) -> int:
    if args.name not in SERIES:
        raise UsageError(f"unknown series {args.name!r}; choose from {', '.join(sorted(SERIES))}")
    s = SERIES[args.name](args)
    if args.pmin is not None or args.pmax is not None:
        s = s.truncate(pmin=args.pmin, pmax=args.pmax)
    fmt = "json" if args.json else args.format
    print(render_series(s, fmt))
    return 0


def cmd_verify(args) -> int:
    if args.suite != "all" and args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from all, {', '.join(SUITES)}")
    reports = run_suite(args.suite)
    if args.json:
        print(reports_json(reports))
    else:
        print("\n".join(r.to_text() for r in reports))
    return 0 if all(r.passed for r in reports) else 1


def _cache_entries() -> list[tuple[str, int]]:
    base = lattice.cache_dir()
    if not base.is_dir():
        return []
    out = []
    for path in sorted(base.rglob("*.json")):
        out.append((str(path.relative_to(base)), path.stat().st_size))
    return out


def cmd_cache(args) -> int:
    base = lattice.cache_dir()
    if args.action == "stat":
        entries = _cache_entries()
        if args.json:
            print(json.dumps({"directory": str(base), "entries": [{"key": k, "bytes": b} for k, b in entries]}))
        else:
            print(f"cache directory {base}: {len(entries)} entries")
            for k, b in entries:
                print(f"  {k}  {b} bytes")
        return 0
    if args.action == "clear":
        removed = 0
        targets = [args.target] if args.target else ["e8", "lifts"]
        try:
            if "e8" in targets and base.is_dir():
                for path in base.glob("shells_*.json"):
                    path.unlink()
                    removed += 1
            if "lifts" in targets and (base / "lifts").is_dir():
                removed += sum(1 for _ in (base / "lifts").glob("*.json"))
                shutil.rmtree(base / "lifts")
        except OSError as exc:
            print(f"error: cannot clear cache under {base}: {exc}", file=sys.stderr)
            return 2
        lattice.clear_memory_cache()
        print(json.dumps({"removed": removed}) if args.json else f"removed {removed} entries from {base}")
        return 0
    # warm
    target = args.target or "e8"
    if target == "e8":
        table = lattice.e8_table(args.norm, cache=True)
        counts = table.counts()
        if args.json:
            print(json.dumps({"norm_bound": table.norm_bound, "counts": {str(k): v for k, v in counts.items()}}))
        else:
            print(f"E8 shells up to norm {table.norm_bound}: " + " + ".join(str(v) for v in counts.values()))
        return 0
    levels = [args.N] if args.N else list(range(1, 9))
    for N in levels:
        qmax = args.qmax if args.qmax is not None else 2 * N + 2
        tmax = args.tmax if args.tmax is not None else 2 + Fraction(2, N)
        lifts.cached_borcherds_lift(N, qmax, tmax)
        if not args.json:
            print(f"Phi_{N} cached to q-order {qmax}, t-order {tmax}")
    if args.json:
        print(json.dumps({"levels": levels}))
    return 0


def cmd_export(args) -> int:
    if args.what == "chat":
        dmax = args.dmax if args.dmax is not None else 8 * args.N
        print(genera.chat_table(args.N, dmax).to_json())
        return 0
    kind = args.kind
    qmax = _need(args, "qmax")
    tmax = _need(args, "tmax")
    pmax = args.pmax if args.pmax is not None else 6
    if kind == "untw":
        series = dt.z_untw(qmax, tmax, pmax)
        N = 2
    elif kind == "tw":
        series = dt.z_tw(qmax, tmax, pmax)
        N = 2
    else:
        series = dt.z_chl(args.N, qmax, tmax, pmax)
        N = args.N
    if args.pmin is not None:
        series = series.truncate(pmin=args.pmin)
    rows = dt.dt_rows(series, N, kind)
    fmt = "json" if args.json else args.format
    print(dt.dt_json(rows) if fmt == "json" else dt.dt_csv(rows).rstrip("\n"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chl", description="Exact expansions for elliptic CHL models.")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    def truncation(p):
        p.add_argument("--N", type=int, default=1)
        p.add_argument("--qmax", type=_frac)
        p.add_argument("--tmax", type=_frac)
        p.add_argument("--pmin", type=_frac)
        p.add_argument("--pmax", type=_frac)

    s = sub.add_parser("series", help="print a named expansion")
    s.add_argument("--name", required=True)
    truncation(s)
    s.add_argument("--r", type=int, default=0)
    s.add_argument("--s", type=int, default=0, help="second index (s for F, l for Fhat)")
    s.add_argument("--k", type=int, default=4, help="Eisenstein weight")
    s.add_argument("--n", type=int, default=1, help="rank of A_n")
    s.add_argument("--variant", choices=("E", "Etilde"), default="E")
    s.add_argument("--which", choices=("K3", "U"), default="K3")
    s.add_argument("--side", choices=("t", "q"))
    s.add_argument("--format", choices=("text", "json", "csv"), default="text")
    s.set_defaults(func=cmd_series)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", default="all")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("cache", help="manage the on-disk caches")
    c.add_argument("action", choices=("warm", "clear", "stat"))
    c.add_argument("--target", choices=("e8", "lifts"))
    c.add_argument("--norm", type=int, default=8)
    c.add_argument("--N", type=int)
    c.add_argument("--qmax", type=_frac)
    c.add_argument("--tmax", type=_frac)
    c.set_defaults(func=cmd_cache)

    e = sub.add_parser("export", help="export exponent or DT tables")
    e.add_argument("what", choices=("chat", "dt"))
    truncation(e)
    e.add_argument("--dmax", type=_frac)
    e.add_argument("--kind", choices=("chl", "tw", "untw"), default="chl")
    e.add_argument("--format", choices=("csv", "json"), default="csv")
    e.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SeriesError, classical.ClassicalError, genera.GeneraError, lifts.LiftError,
            lattice.LatticeError, dt.DTError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
