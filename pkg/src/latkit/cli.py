"""Benchmark and verification command line.

Example:
    latbench --kernel binary-collision --shape 16x16x16 \\
             --vvl 1,2,4,8 --workers 1,4 --backend threaded --iters 100 --csv

Exit codes: 0 success, 1 verification failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import sys

from .bench import emit_csv, emit_table, report_best, run_sweep
from .errors import LatkitError
from .kernels import KERNEL_IDS
from .lattice import DEFAULT_MAX_VVL, LatticeShape, pad_sites
from .memory import BACKENDS


def _int_list(text: str) -> list[int]:
    try:
        values = [int(p) for p in text.split(",") if p != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated int list, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("list must be non-empty")
    return values


def _str_list(text: str) -> list[str]:
    return [p for p in text.split(",") if p != ""]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="latbench",
        description="Run lattice kernel verification suites and VVL/worker benchmark sweeps.",
    )
    p.add_argument("--kernel", choices=KERNEL_IDS, default="binary-collision")
    p.add_argument("--shape", default="8x8x8", help="lattice extents as NXxNYxNZ")
    p.add_argument("--vvl", type=_int_list, default=[1, 2, 4, 8],
                   help="comma-separated lane counts to sweep")
    p.add_argument("--workers", type=_int_list, default=[1],
                   help="comma-separated worker counts to sweep")
    p.add_argument("--backend", type=_str_list, default=["threaded"],
                   help="comma-separated backends: reference|threaded|emulated")
    p.add_argument("--tpb", type=int, default=128, help="chunks per worker-group (emulated)")
    p.add_argument("--iters", type=int, default=5, help="timed iterations per configuration")
    p.add_argument("--csv", nargs="?", const="-", default=None, metavar="PATH",
                   help="emit CSV to PATH (or stdout when no path is given)")
    p.add_argument("--verify", action="store_true",
                   help="run equivalence/conservation suites before timing")
    p.add_argument("--stats", action="store_true", help="print transfer counters")
    p.add_argument("--seed", type=int, default=1234, help="RNG seed for random states")
    return p


def cli_main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        shape = LatticeShape.parse(args.shape)
        padded = pad_sites(shape.nsites, DEFAULT_MAX_VVL)
        for vvl in args.vvl:
            if vvl < 1 or padded % vvl != 0:
                raise LatkitError(
                    f"VVL must divide padded extent: vvl={vvl}, padded extent={padded}"
                )
        for w in args.workers:
            if w < 1:
                raise LatkitError(f"workers must be >= 1, got {w}")
        for b in args.backend:
            if b not in BACKENDS:
                raise LatkitError(f"unknown backend {b!r}; expected one of {BACKENDS}")
        if args.iters < 1:
            raise LatkitError("iters must be >= 1")
    except LatkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.verify:
        from .verify import run_verify_suite

        vvls = [v for v in (1, 2, 4, 8) if padded % v == 0]
        ok, lines = run_verify_suite(args.kernel, shape, seed=args.seed, vvls=vvls)
        for line in lines:
            print(line)
        if not ok:
            print("verification FAILED", file=sys.stderr)
            return 1

    try:
        results = run_sweep(args.kernel, shape, args.vvl, args.workers, args.backend,
                            args.iters, tpb=args.tpb, seed=args.seed)
    except LatkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.csv is not None:
        text = emit_csv(results)
        if args.csv == "-":
            sys.stdout.write(text)
        else:
            with open(args.csv, "w") as fh:
                fh.write(text)
    else:
        sys.stdout.write(emit_table(results))

    if 1 in args.vvl:
        for line in report_best(results):
            print(line)

    if args.stats:
        packed = sum(r.counters.elements_packed for r in results)
        moved = sum(r.counters.bytes_transferred for r in results)
        launches = sum(r.counters.launches for r in results)
        print(f"stats: launches={launches} elements_packed={packed} bytes_transferred={moved}")

    return 0


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
