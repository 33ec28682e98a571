"""Command-line front end: law evaluation, sampling, and the solver.

Every numeric output is plain data (CSV rows or a JSON document); there
is no plotting.  Units: geodesic lengths are hyperbolic lengths in
natural units, and Teichmueller distance is reported as d = log m, the
log of the extremal dilatation.  (Some displays define the distance as
an infimum of dilatations K without taking the log; this tool always
reports the logarithm.)

Exit codes: 0 success, 2 usage error, 3 accessory-solver failure (the
solver's diagnostics are printed to stderr as JSON).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import closedform as cf
from . import lame, mc, modmap, verify

_UNITS_EPILOG = (
    "Units: lengths are hyperbolic (natural units); Teichmueller distance "
    "is d = log m, the logarithm of the extremal dilatation."
)

_GRID_LAWS = ("crossratio_full", "quad_cr", "length", "length_dual", "star",
              "modulus", "teich")
_SAMPLE_LAWS = mc.LAWS


def _pdf_value(law: str, x: np.ndarray) -> np.ndarray:
    if law == "crossratio_full":
        return np.array([cf.crossratio_pdf(v) for v in x])
    fn = {"quad_cr": cf.quad_cr_pdf, "length": cf.length_pdf,
          "length_dual": cf.length_pdf_dual, "star": cf.star_pdf,
          "modulus": modmap.modulus_pdf, "teich": modmap.teich_pdf}[law]
    return np.asarray(fn(x))


def _cdf_value(law: str, x: np.ndarray) -> np.ndarray:
    if law in ("crossratio_full", "quad_cr", "length", "star"):
        fn = {"crossratio_full": cf.crossratio_cdf, "quad_cr": cf.quad_cr_cdf,
              "length": cf.length_cdf, "star": cf.star_cdf}[law]
        return np.asarray(fn(x))
    if law == "modulus":
        return np.asarray(cf.quad_cr_cdf(np.maximum(modmap.cr_of_modulus(x), 2.0)))
    if law == "teich":
        q = modmap.cr_of_modulus(np.exp(np.asarray(x, dtype=float)))
        return np.asarray(cf.quad_cr_cdf(np.maximum(q, 2.0)))
    raise ValueError(f"no closed-form CDF for law {law!r}")


def _fmt(v: float, precision: int) -> str:
    return format(v, f".{precision}g")


def _emit_rows(args, header: tuple[str, ...], rows: list[tuple]) -> None:
    precision = args.precision
    if args.format == "json":
        doc = [dict(zip(header, row)) for row in rows]
        text = json.dumps(doc, indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v, precision) if isinstance(v, float) else v
                        for v in row])
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _grid(args) -> np.ndarray:
    if args.start is None or args.stop is None or args.step is None:
        raise ValueError("grid evaluation needs --from, --to and --step")
    if args.step <= 0 or args.stop < args.start:
        raise ValueError("need --step > 0 and --to >= --from")
    n = int(math.floor((args.stop - args.start) / args.step + 1e-9)) + 1
    return args.start + args.step * np.arange(n)


def _cmd_curve(args, evaluate, colname: str) -> int:
    if args.at is not None:
        val = float(np.asarray(evaluate(args.law, np.array([args.at])))[0])
        if args.format == "json":
            _emit_rows(args, ("law", "x", colname), [(args.law, args.at, val)])
        else:
            sys.stdout.write(_fmt(val, args.precision) + "\n")
        return 0
    xs = _grid(args)
    ys = np.asarray(evaluate(args.law, xs))
    _emit_rows(args, ("x", colname),
               [(x.item(), y.item()) for x, y in zip(xs, ys)])
    return 0


def _cmd_pdf(args) -> int:
    return _cmd_curve(args, _pdf_value, "pdf")


def _cmd_cdf(args) -> int:
    return _cmd_curve(args, _cdf_value, "cdf")


def _cmd_sample(args) -> int:
    cfg = mc.McConfig(n_samples=args.n, seed=args.seed, workers=args.workers,
                      law=args.law)
    summary = mc.run_law(cfg)
    if args.format == "json":
        text = json.dumps(summary.to_json_dict(), indent=2) + "\n"
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    else:
        if args.out:
            summary.to_csv(args.out)
        else:
            tmp = io.StringIO()
            widths = np.diff(summary.bin_edges)
            dens = summary.counts / (summary.n * widths)
            w = csv.writer(tmp)
            w.writerow(("bin_left", "bin_right", "count", "density"))
            for left, right, cnt, d in zip(summary.bin_edges[:-1],
                                           summary.bin_edges[1:],
                                           summary.counts, dens):
                w.writerow((_fmt(left.item(), args.precision),
                            _fmt(right.item(), args.precision), int(cnt),
                            _fmt(d.item(), args.precision)))
            sys.stdout.write(tmp.getvalue())
    return 0


_RECORD_COLS = ("tau", "lambda", "a1", "r1", "a2", "r2", "cross_ratio",
                "modulus", "tangency_residual", "wronskian_drift")


def _emit_record(args, rec: dict) -> None:
    _emit_rows(args, _RECORD_COLS, [tuple(rec[c] for c in _RECORD_COLS)])


def _cmd_cr_map(args) -> int:
    if args.table:
        table = modmap.build_cr_table(args.mmin, args.mmax, args.points)
        if args.out:
            table.to_csv(args.out)
        else:
            w = csv.writer(sys.stdout)
            w.writerow(modmap._CSV_COLUMNS)
            for rec in sorted(table.records, key=lambda r: r["m"]):
                w.writerow(format(rec[k], ".17g") for k in modmap._CSV_COLUMNS)
        return 0
    if args.modulus is None:
        raise ValueError("cr-map needs --modulus or --table")
    if args.modulus <= 0:
        raise ValueError("modulus must be positive")
    # the canonical branch (CR >= 2) lives at tau = 1/m for m >= 1
    tau = 1.0 / args.modulus if args.modulus >= 1.0 else args.modulus
    sol = lame.solve_accessory(tau)
    _emit_record(args, sol.as_record())
    return 0


def _cmd_accessory(args) -> int:
    sol = lame.solve_accessory(args.tau)
    _emit_record(args, sol.as_record())
    return 0


def _cmd_teich(args) -> int:
    if args.stats:
        mean, median, sd = modmap.summary_stats()
        _emit_rows(args, ("mean", "median", "sd"), [(mean, median, sd)])
        return 0
    args.law = "teich"
    if args.at is None and args.start is None:
        args.start, args.stop, args.step = 0.0, 4.0, 0.01
    return _cmd_curve(args, _pdf_value, "pdf")


def _cmd_quasimobius(args) -> int:
    k = modmap.quasimobius_K(args.src, args.dst)
    _emit_rows(args, ("src_cr", "dst_cr", "K"), [(args.src, args.dst, k)])
    return 0


def _cmd_verify(args) -> int:
    results = verify.run_checks(quick=args.quick)
    wide = max(len(r.name) for r in results)
    nominal = True
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        note = "" if r.expected_pass else " (expected FAIL)"
        flag = "" if r.nominal else "  ** NOT NOMINAL **"
        sys.stdout.write(f"{r.name:{wide}s}  {status}{note}  {r.detail}{flag}\n")
        nominal = nominal and r.nominal
    sys.stdout.write("result: " + ("nominal\n" if nominal else "NOT nominal\n"))
    return 0 if nominal else 1


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write output to this path instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--seed", type=int,
                   default=int(os.environ.get("PUNCTORUS_SEED", "0")),
                   help="RNG seed (default: PUNCTORUS_SEED or 0)")
    p.add_argument("--precision", type=int, default=17,
                   help="significant digits for emitted floats")


def _add_grid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--at", type=float, help="evaluate at a single point")
    p.add_argument("--from", dest="start", type=float, help="grid start")
    p.add_argument("--to", dest="stop", type=float, help="grid end (inclusive)")
    p.add_argument("--step", type=float, help="grid spacing")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="punctorus",
        description="Closed-form laws, accessory-parameter solves, and Monte "
                    "Carlo checks for random once-punctured tori.",
        epilog=_UNITS_EPILOG)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pdf", help="evaluate a probability density",
                       epilog=_UNITS_EPILOG)
    p.add_argument("--law", choices=_GRID_LAWS, required=True)
    _add_grid(p)
    _add_common(p)
    p.set_defaults(fn=_cmd_pdf)

    p = sub.add_parser("cdf", help="evaluate a cumulative distribution",
                       epilog=_UNITS_EPILOG)
    p.add_argument("--law",
                   choices=("crossratio_full", "quad_cr", "length", "star",
                            "modulus", "teich"), required=True)
    _add_grid(p)
    _add_common(p)
    p.set_defaults(fn=_cmd_cdf)

    p = sub.add_parser("sample", help="Monte Carlo sample a law",
                       epilog=_UNITS_EPILOG)
    p.add_argument("--law", choices=_SAMPLE_LAWS, required=True)
    p.add_argument("--n", type=int, required=True, help="sample count")
    p.add_argument("--workers", type=int, default=1)
    _add_common(p)
    p.set_defaults(fn=_cmd_sample)

    p = sub.add_parser("cr-map",
                       help="cross ratio of a modulus, or the whole table",
                       epilog=_UNITS_EPILOG)
    p.add_argument("--modulus", type=float, help="solve one modulus directly")
    p.add_argument("--table", action="store_true", help="emit a node table")
    p.add_argument("--mmin", type=float, default=1.0)
    p.add_argument("--mmax", type=float, default=50.0)
    p.add_argument("--points", type=int, default=256)
    _add_common(p)
    p.set_defaults(fn=_cmd_cr_map)

    p = sub.add_parser("accessory",
                       help="solve the accessory parameter at one tau",
                       epilog=_UNITS_EPILOG)
    p.add_argument("--tau", type=float, required=True)
    _add_common(p)
    p.set_defaults(fn=_cmd_accessory)

    p = sub.add_parser("teich",
                       help="Teichmueller-distance density or its moments",
                       epilog=_UNITS_EPILOG)
    p.add_argument("--pdf", action="store_true",
                   help="emit the density curve (default)")
    p.add_argument("--stats", action="store_true",
                   help="emit mean/median/sd instead")
    _add_grid(p)
    _add_common(p)
    p.set_defaults(fn=_cmd_teich)

    p = sub.add_parser("quasimobius",
                       help="weak quasi-Moebius constant between two "
                            "quadrilateral cross ratios",
                       epilog=_UNITS_EPILOG)
    p.add_argument("--src", type=float, required=True, help="source cross ratio")
    p.add_argument("--dst", type=float, required=True, help="image cross ratio")
    _add_common(p)
    p.set_defaults(fn=_cmd_quasimobius)

    p = sub.add_parser("verify", help="run the built-in verification suite",
                       epilog=_UNITS_EPILOG)
    p.add_argument("--quick", action="store_true",
                   help="smaller table and sample sizes")
    _add_common(p)
    p.set_defaults(fn=_cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except lame.SolverFailure as exc:
        json.dump({"error": "solver failure", "message": str(exc),
                   "diagnostics": exc.diagnostics}, sys.stderr)
        sys.stderr.write("\n")
        return 3
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
