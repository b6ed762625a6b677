"""Command-line front end: ``tbf-lab <command> [options]``.

Exit codes: 0 success, 1 verification failure, 2 usage or domain error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Iterable, List, Optional, Sequence

import numpy as np

from . import __version__
from ._parallel import ordered_map
from .boundary import BoundaryParseError, parse_boundary
from .errors import BoundaryError, DomainError, TruncationError
from .gfunction import INFINITY, g, parse_distance
from .ghoc import INF_CODE, sample_path
from .specification import kernel
from .spectral import as_p, build_spectrum
from .verification import DEFAULT_GRID, SUITES, run_suite

SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument parsing helpers


def parse_grid(text: str) -> List[float]:
    """``start:stop:step``, start inclusive, stop included up to half a step of rounding."""
    if text.strip() == "default":
        return list(DEFAULT_GRID)
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"grid must be start:stop:step or 'default', got {text!r}")
    try:
        start, stop, step = (float(x) for x in parts)
    except ValueError:
        raise UsageError(f"grid must be numeric, got {text!r}") from None
    if step <= 0:
        raise UsageError("grid step must be positive")
    out = []
    k = 0
    while True:
        v = start + k * step
        if v >= stop + step / 2:
            break
        out.append(round(v, 12))
        k += 1
    if not out:
        raise UsageError(f"grid {text!r} is empty")
    return out


def parse_list(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None


def resolve_ps(args, required: bool = True) -> Optional[List[float]]:
    if args.p is not None and args.p_grid is not None:
        raise UsageError("give either --p or --p-grid, not both")
    if args.p is not None:
        ps = parse_list(args.p)
    elif args.p_grid is not None:
        ps = parse_grid(args.p_grid)
    elif required:
        raise UsageError("one of --p or --p-grid is required")
    else:
        return None
    if not ps:
        raise UsageError("no p values given")
    for p in ps:
        as_p(p)
    return ps


# ---------------------------------------------------------------------------
# output


def fmt_value(x, digits: int):
    if x is INFINITY:
        return "inf"
    if isinstance(x, (float, np.floating)):
        return format(float(x), f".{digits}g")
    return x


def json_value(x, digits: int):
    if x is INFINITY:
        return "inf"
    if isinstance(x, (float, np.floating)):
        return float(format(float(x), f".{digits}g"))
    if isinstance(x, np.integer):
        return int(x)
    return x


def write_table(out, columns: Sequence[str], rows: Iterable[Sequence], fmt: str, digits: int) -> None:
    if fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt_value(v, digits) for v in row])
    else:
        for row in rows:
            rec = {"schema_version": SCHEMA_VERSION}
            rec.update({c: json_value(v, digits) for c, v in zip(columns, row)})
            out.write(json.dumps(rec) + "\n")


# ---------------------------------------------------------------------------
# commands


def cmd_spectrum(args, out) -> int:
    ps = resolve_ps(args)

    def row(p):
        sp = build_spectrum(p)
        return (p, sp.lambda_pf, sp.lambda_r, sp.a, sp.c_ratio, sp.d_const)

    rows = ordered_map(row, ps)
    write_table(out, ("p", "lambda_pf", "lambda_r", "a", "c_ratio", "d_const"), rows, args.format, args.digits)
    return 0


def cmd_gfun(args, out) -> int:
    ps = resolve_ps(args)
    ns = [parse_distance(t) for t in args.n.split(",") if t.strip()]
    if not ns:
        raise UsageError("--n needs at least one value")
    rows = ordered_map(lambda p: [(p, n, g(p, n)) for n in ns], ps)
    write_table(out, ("p", "n", "g"), [r for block in rows for r in block], args.format, args.digits)
    return 0


def cmd_sample(args, out) -> int:
    p = as_p(float(args.p))
    if args.length < 1:
        raise UsageError("--length must be at least 1")
    initial = parse_distance(args.initial) if args.initial is not None else None
    path = sample_path(p, args.length, args.seed, initial)
    spins = path.spins()
    states = path.states
    if not args.no_dump:
        if args.format == "csv":
            labels = np.where(states == INF_CODE, "inf", states.astype(str))
            buf = io.StringIO()
            buf.write("state,spin\n")
            buf.write("\n".join(f"{a},{b}" for a, b in zip(labels.tolist(), spins.tolist())))
            buf.write("\n")
            out.write(buf.getvalue())
        else:
            for s, x in zip(states.tolist(), spins.tolist()):
                out.write(json.dumps({"schema_version": SCHEMA_VERSION, "state": "inf" if s == INF_CODE else s,
                                      "spin": x}) + "\n")
    text = "".join("1" if x else "0" for x in spins.tolist())
    frac = float(spins.mean())
    sys.stderr.write(
        f"summary: p={fmt_value(p, args.digits)} length={args.length} seed={args.seed} "
        f"occupied_fraction={fmt_value(frac, args.digits)} count_010={text.count('010')}\n"
    )
    return 0


def cmd_verify(args, out) -> int:
    if args.suite != "all" and args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(list(SUITES) + ['all'])}")
    ps = resolve_ps(args, required=False)
    results = run_suite(args.suite, ps, args.seed)
    report = {
        "schema_version": SCHEMA_VERSION,
        "suite": args.suite,
        "seed": args.seed,
        "suites": {
            name: {"passed": all(c.passed for c in checks), "checks": [c.as_dict() for c in checks]}
            for name, checks in results.items()
        },
    }
    report["passed"] = all(s["passed"] for s in report["suites"].values())
    out.write(json.dumps(report, indent=2) + "\n")
    return 0 if report["passed"] else 1


def cmd_kernel(args, out) -> int:
    p = as_p(float(args.p))
    bc = parse_boundary(args.boundary)
    try:
        res = kernel(p, bc)
    except BoundaryError as exc:
        raise BoundaryParseError(str(exc), args.boundary, args.boundary.find("window")) from None
    rows = [(w, pr, res.partition_value) for w, pr in sorted(res.probabilities.items(), key=lambda kv: kv[0], reverse=True)]
    write_table(out, ("word", "probability", "partition_value"), rows, args.format, args.digits)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="csv table or JSON lines")
    common.add_argument("--digits", type=int, default=9, help="significant digits for floats (default 9)")
    common.add_argument("--output", "-o", default=None, help="write to this file instead of stdout")

    pgrid = argparse.ArgumentParser(add_help=False)
    pgrid.add_argument("--p", default=None, help="density value(s), comma separated")
    pgrid.add_argument("--p-grid", dest="p_grid", default=None, help="start:stop:step or 'default'")

    ap = argparse.ArgumentParser(prog="tbf-lab", description="Thinned Bernoulli field toolkit")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", parents=[common, pgrid], help="eigen-data of the transfer matrix per p")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("gfun", parents=[common, pgrid], help="g(p, n) table")
    s.add_argument("--n", required=True, help="comma-separated stopping distances; 'inf' allowed")
    s.set_defaults(func=cmd_gfun)

    s = sub.add_parser("sample", parents=[common], help="sample a chain path and its thinned spins")
    s.add_argument("--p", required=True)
    s.add_argument("--length", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--initial", default=None, help="initial state (integer or 'inf'); default stationary")
    s.add_argument("--no-dump", action="store_true", help="only print the summary line")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("verify", parents=[common, pgrid], help="run verification suites, JSON report")
    s.add_argument("--suite", default="all", help=f"one of {', '.join(list(SUITES) + ['all'])}")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("kernel", parents=[common], help="conditional law on a window given a boundary")
    s.add_argument("boundary", help="tailL=... annulus=... window=[l,r] annulusR=... tailR=...")
    s.add_argument("--p", required=True)
    s.set_defaults(func=cmd_kernel)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        return args.func(args, out)
    except BoundaryParseError as exc:
        sys.stderr.write(exc.render() + "\n")
        return 2
    except (UsageError, DomainError, TruncationError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    finally:
        if args.output:
            out.close()
        else:
            out.flush()


if __name__ == "__main__":
    sys.exit(main())
