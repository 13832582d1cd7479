"""Command-line front end: run verification suites and write reports.

Usage: ``cotlar SUBCOMMAND [flags]`` with ``SUBCOMMAND`` one of the suite
names or ``all``. Reports go to ``--out`` (default ``$COTLAR_OUT`` or
``./cotlar-report``): ``manifest.json``, ``timings.json`` and one directory of
CSV/JSON/SVG files per suite. Exit status is 0 iff every gating check
passed, 1 otherwise, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .errors import CotlarError
from .suites import SUITES, RunOptions, run_suite

__all__ = ["main", "build_parser", "run", "SCHEMA"]

SCHEMA = 1
DEFAULT_OUT = "cotlar-report"
DEFAULT_SEED = 2024


def _float_list(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals or not all(v > 0 for v in vals):
        raise argparse.ArgumentTypeError("exponents must be positive numbers")
    return vals


def _int_list(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("dimensions must be positive integers")
    return vals


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cotlar", description="Run Cotlar/Riesz verification suites.")
    parser.add_argument("subcommand", choices=SUITES + ("all",))
    parser.add_argument("--out", type=Path, default=None,
                        help=f"report directory (default: $COTLAR_OUT or ./{DEFAULT_OUT})")
    parser.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help="master seed")
    parser.add_argument("--quick", action="store_true", help="ensembles 10x smaller; gates widen accordingly")
    parser.add_argument("--plot", action="store_true", help="also write SVG plots")
    parser.add_argument("--p", type=_float_list, default=None, help="exponents, comma separated")
    parser.add_argument("--d", type=_int_list, default=None, help="dimensions, comma separated")
    parser.add_argument("--beta", type=float, default=0.5, help="strip offset in (0, 1)")
    parser.add_argument("--paths", type=_positive_int, default=None, help="large ensemble size")
    parser.add_argument("--dt", type=_positive_float, default=None, help="time step for exit walks and tail tests")
    parser.add_argument("--grid", type=_positive_int, default=None, help="grid points for the Cotlar corpus")
    parser.add_argument("--box", type=_positive_float, default=None, help="box length for the Cotlar corpus")
    parser.add_argument("--jobs", type=_positive_int, default=1, help="suites run concurrently")
    parser.add_argument("--workers", type=_positive_int, default=1, help="threads per Monte-Carlo ensemble")
    return parser


def _manifest(subcommand: str, opts: RunOptions, results) -> dict:
    checks = [c.as_dict() for r in results for c in r.checks]
    failed = [c for c in checks if c["gate"] and not c["pass"]]
    return {
        "schema": SCHEMA,
        "version": __version__,
        "subcommand": subcommand,
        "seed": opts.seed,
        "config": opts.as_dict(),
        "checks": checks,
        "summary": {
            "checks": len(checks),
            "gates": sum(c["gate"] for c in checks),
            "failed_gates": len(failed),
            "references": sum(not c["gate"] for c in checks),
            "failed_references": sum(not c["gate"] and not c["pass"] for c in checks),
        },
        "pass": not failed,
        "first_failure": f"{failed[0]['suite']}/{failed[0]['name']}" if failed else None,
    }


def run(subcommand: str, opts: RunOptions, out: Path, jobs: int = 1, stream=None) -> int:
    """Run the suites, write the reports and return the exit status."""
    stream = sys.stdout if stream is None else stream
    names = SUITES if subcommand == "all" else (subcommand,)
    timings: dict[str, float] = {}

    def one(name):
        t0 = time.perf_counter()
        res = run_suite(name, opts)
        timings[name] = time.perf_counter() - t0
        return res

    if jobs > 1 and len(names) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, names))
    else:
        results = [one(n) for n in names]

    out.mkdir(parents=True, exist_ok=True)
    for res in results:
        if res.files:
            sub = out / res.name
            sub.mkdir(exist_ok=True)
            for fname, text in sorted(res.files.items()):
                (sub / fname).write_text(text)
    manifest = _manifest(subcommand, opts, results)
    (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=1) + "\n")
    (out / "timings.json").write_text(json.dumps({k: round(timings[k], 3) for k in names}, indent=1) + "\n")

    for c in manifest["checks"]:
        tag = ("PASS" if c["pass"] else "FAIL") if c["gate"] else ("ref-ok" if c["pass"] else "ref-miss")
        print(f"{tag:8s} {c['suite']}/{c['name']}", file=stream)
    s = manifest["summary"]
    print(f"{s['gates'] - s['failed_gates']}/{s['gates']} gates passed; "
          f"{s['references'] - s['failed_references']}/{s['references']} reference checks met; "
          f"reports in {out}", file=stream)
    if not manifest["pass"]:
        print(f"first failing check: {manifest['first_failure']}", file=stream)
        return 1
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = args.out or Path(os.environ.get("COTLAR_OUT") or DEFAULT_OUT)
    if not 0.0 < args.beta < 1.0:
        parser.error(f"--beta must lie in (0, 1), got {args.beta}")
    if args.grid is not None and (args.grid < 8 or args.grid & (args.grid - 1)):
        parser.error("--grid must be a power of two >= 8")
    opts = RunOptions(seed=args.seed, quick=args.quick, p=args.p, d=args.d, beta=args.beta, paths=args.paths,
                      dt=args.dt, grid=args.grid, box=args.box, plot=args.plot, workers=args.workers)
    try:
        return run(args.subcommand, opts, out, args.jobs)
    except CotlarError as exc:
        print(f"cotlar: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
