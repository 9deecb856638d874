"""``slidesum verify|bench|sweep``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench
from .bench import BenchConfig, ConfigError

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="slidesum", description="Sliding window sum kernels")
    ap.add_argument("command", choices=["verify", "bench", "sweep"])
    ap.add_argument("--algo", action="append", default=[], help="repeatable")
    ap.add_argument("--op", choices=["add", "min", "max", "gamma", "conv"])
    ap.add_argument("--kind", choices=["i64", "f32", "f64"])
    ap.add_argument("--n", type=int)
    ap.add_argument("--w", type=int, action="append", default=[], help="repeatable")
    ap.add_argument("--lanes", type=int, metavar="P", help="lane width (default: native)")
    ap.add_argument("--dilation", type=int, default=1)
    ap.add_argument("--stride", type=int, default=1)
    ap.add_argument("--filters", type=int, default=1, metavar="F")
    ap.add_argument("--reps", type=int, default=3)
    ap.add_argument("--warmup", type=int, default=1)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--input", type=Path, help="raw little-endian scalars of --kind")
    ap.add_argument("--out", type=Path, help="CSV file to append records to")
    ap.add_argument("--no-gemm", action="store_true", help="sweep: skip the im2col+GEMM column")
    ap.add_argument(
        "--suite", choices=["sliding", "conv", "all"], default="all", help="verify: grid to run"
    )
    return ap


def config_from_args(args: argparse.Namespace) -> BenchConfig:
    ws = args.w
    if args.command == "sweep" and not ws:
        ws = list(bench.FIG1_WINDOWS)
    return BenchConfig(
        command=args.command,
        algos=args.algo,
        op=args.op,
        kind=args.kind,
        N=args.n,
        ws=ws,
        P=args.lanes,
        dilation=args.dilation,
        stride=args.stride,
        F=args.filters,
        reps=args.reps,
        warmup=args.warmup,
        seed=args.seed,
        input=args.input,
        out=args.out,
        gemm=not args.no_gemm,
    )


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    cfg = config_from_args(args)
    try:
        cfg.validate()
        if cfg.command == "verify":
            suites = ("sliding", "conv") if args.suite == "all" else (args.suite,)
            return bench.run_verify(cfg, suites=suites)
        if cfg.command == "bench":
            records = bench.run_bench(cfg)
            if cfg.out is None:
                bench.write_csv(records, None)
            return EXIT_OK
        records, points = bench.run_sweep(cfg)
        if cfg.out is None:
            bench.write_csv(records, None)
        if cfg.N is None and cfg.input is None:
            print("# N=2^22 is this harness's default, not a value from the original experiments")
        print(bench.fmt_speedups(points))
        return EXIT_OK
    except ConfigError as exc:
        print(f"slidesum: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"slidesum: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"slidesum: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
