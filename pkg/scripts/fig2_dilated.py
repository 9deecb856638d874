"""Dilated convolution speedup against output size.

A single large dilated filter (default w=51, dilation 8) applied to inputs
sized so the convolution yields 1000 ... 100000 outputs.  Prints the speedup
of the sliding kernel over the naive convolution beside the reference curve.

    python scripts/fig2_dilated.py --out fig2.csv
"""

import argparse
from pathlib import Path

from slidesum import bench
from slidesum.bench import BenchConfig

OUTPUT_SIZES = (1000, 5000, 10000, 50000, 100000)
# reported speedups on other hardware; context only
REFERENCE = {1000: 6.85, 5000: 4.40, 10000: 4.31, 50000: 4.01, 100000: 3.39}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--w", type=int, default=51)
    ap.add_argument("--dilation", type=int, default=8)
    ap.add_argument("--filters", type=int, default=1)
    ap.add_argument("--kind", default="f32", choices=["f32", "f64"])
    ap.add_argument("--algo", default="vector_slide")
    ap.add_argument("--lanes", type=int, default=None)
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--out", type=Path, default=Path("fig2.csv"))
    args = ap.parse_args()

    extent = (args.w - 1) * args.dilation
    print(f"w={args.w} dilation={args.dilation} F={args.filters} kind={args.kind}")
    print(f"{'outputs':>8} {'N':>8} {'vs naive':>9} {'vs gemm':>8} {'reference':>10}")
    for n_out in OUTPUT_SIZES:
        cfg = BenchConfig(
            command="sweep",
            algos=[args.algo],
            op="conv",
            kind=args.kind,
            N=n_out + extent,
            ws=[args.w],
            P=args.lanes,
            dilation=args.dilation,
            F=args.filters,
            reps=args.reps,
            seed=args.seed,
            out=args.out,
        )
        _, (p,) = bench.run_sweep(cfg)
        print(f"{n_out:>8} {cfg.N:>8} {p.speedup:>9.2f} {p.speedup_vs_gemm:>8.2f} {REFERENCE[n_out]:>10.2f}")
    print(f"records appended to {args.out}")


if __name__ == "__main__":
    main()
