"""Convolution speedup against filter size.

Times vector_slide convolution and the naive and im2col+GEMM baselines at
each filter size, writes the raw records to a CSV and prints a
(w, speedup) table next to the reference curve.

    python scripts/fig1_sweep.py --n 4194304 --out fig1.csv
"""

import argparse
from pathlib import Path

from slidesum import bench
from slidesum.bench import BenchConfig

# reported speedups against a tuned convolution on other hardware; context only
REFERENCE = {3: 1.78, 5: 2.18, 11: 3.6, 17: 4.75, 21: 5.71, 29: 7.17, 37: 8.12, 49: 8.52, 51: 8.37}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1 << 22)
    ap.add_argument("--kind", default="f32", choices=["f32", "f64"])
    ap.add_argument("--algo", default="vector_slide")
    ap.add_argument("--lanes", type=int, default=None)
    ap.add_argument("--reps", type=int, default=3)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--no-gemm", action="store_true")
    ap.add_argument("--out", type=Path, default=Path("fig1.csv"))
    args = ap.parse_args()

    cfg = BenchConfig(
        command="sweep",
        algos=[args.algo],
        op="conv",
        kind=args.kind,
        N=args.n,
        ws=list(bench.FIG1_WINDOWS),
        P=args.lanes,
        reps=args.reps,
        seed=args.seed,
        out=args.out,
        gemm=not args.no_gemm,
    )
    _, points = bench.run_sweep(cfg)
    print(f"N={cfg.N} kind={cfg.kind} P={cfg.lanes} algo={args.algo}")
    print(f"{'w':>4} {'vs naive':>9} {'vs gemm':>8} {'reference':>10}")
    for p in points:
        g = "-" if p.speedup_vs_gemm is None else f"{p.speedup_vs_gemm:.2f}"
        print(f"{p.w:>4} {p.speedup:>9.2f} {g:>8} {REFERENCE[p.w]:>10.2f}")
    print(f"slope of speedup vs log2(w): {bench.log2_trend(points):.2f}")
    print(f"records appended to {args.out}")


if __name__ == "__main__":
    main()
