"""Verification grid, benchmark runs and sweeps, with deterministic inputs.

Inputs come from splitmix64 (Steele, Lea & Flood constants) seeded per run:

    state += 0x9E3779B97F4A7C15
    z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    out = z ^ (z >> 31)

mapped to elements as

    i64:  (out >> 32) - 2**31                 in [-2**31, 2**31)
    f64:  (out >> 11) * 2**-52 - 1            in [-1, 1), exact
    f32:  (out >> 40) * 2**-23 - 1            in [-1, 1), exact in f32

Output checksums are 64-bit FNV-1a over the little-endian output bytes.
"""

from __future__ import annotations

import csv
import math
import statistics
import sys
import time
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable, Iterator

import numba
import numpy as np

from . import sliding
from .baseline import conv1d_gemm, conv1d_naive
from .nn import ConvProblem, WindowSpec, conv1d_gamma, conv1d_sliding
from .operators import KINDS, allclose, gamma_dtype, get_operator, outputs_match

GOLDEN = 0x9E3779B97F4A7C15
FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3

CSV_HEADER = [
    "algo",
    "op",
    "kind",
    "N",
    "w",
    "P",
    "dilation",
    "reps",
    "best_ns_per_elem",
    "median_ns_per_elem",
    "speedup_vs_naive",
    "checksum",
]
TIMING_COLUMNS = ("best_ns_per_elem", "median_ns_per_elem", "speedup_vs_naive")

FIG1_WINDOWS = (3, 5, 11, 17, 21, 29, 37, 49, 51)
SLIDING_ALGOS = ("scalar_input", "vector_input", "vector_input_tree", "ping_pong", "vector_slide")
GRID_OPS = ("add:i64", "min:i64", "max:i64", "add:f32", "add:f64", "gamma:f64")


class ConfigError(ValueError):
    pass


# --- deterministic data --------------------------------------------------


def splitmix64(seed: int, n: int) -> np.ndarray:
    """First ``n`` outputs of splitmix64 started at ``seed``, as uint64."""
    seed = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    z = np.arange(1, n + 1, dtype=np.uint64) * np.uint64(GOLDEN) + seed
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def gen_input(seed: int, N: int, kind: str = "f32") -> np.ndarray:
    if N < 1:
        raise ValueError("N must be >= 1")
    z = splitmix64(seed, N)
    if kind == "i64":
        return (z >> np.uint64(32)).astype(np.int64) - (1 << 31)
    if kind == "f64":
        return (z >> np.uint64(11)).astype(np.float64) * 2.0**-52 - 1.0
    if kind == "f32":
        return ((z >> np.uint64(40)).astype(np.float64) * 2.0**-23 - 1.0).astype(np.float32)
    raise ValueError(f"unknown element kind {kind!r}")


def gen_pairs(seed: int, N: int, kind: str = "f64") -> np.ndarray:
    """Pair elements with u in [0.5, 1.5) and v in [0, 1)."""
    x = gen_input(seed, 2 * N, "f64")
    out = np.empty(N, dtype=gamma_dtype(kind))
    out["u"] = 1.0 + 0.5 * x[0::2]
    out["v"] = 0.5 * (x[1::2] + 1.0)
    return out


def gen_filters(seed: int, F: int, w: int, kind: str = "f64") -> np.ndarray:
    """Coefficients in [-2, 2); values within 0.1 of zero become exactly 0."""
    c = 2.0 * gen_input(seed, F * w, "f64").reshape(F, w)
    c[np.abs(c) < 0.1] = 0.0
    return c.astype(KINDS[kind])


def gen_elements(seed: int, N: int, op_key: str) -> np.ndarray:
    op = get_operator(op_key)
    if op.name == "gamma":
        return gen_pairs(seed, N, op.kind)
    return gen_input(seed, N, op.kind)


@numba.njit(cache=True)
def _fnv1a(buf):
    h = np.uint64(FNV_OFFSET)
    prime = np.uint64(FNV_PRIME)
    for b in buf:
        h = (h ^ np.uint64(b)) * prime
    return h


def fnv1a64(arr: np.ndarray) -> int:
    """FNV-1a over the little-endian bytes of ``arr``."""
    a = np.ascontiguousarray(arr)
    if a.dtype.names is None and a.dtype.byteorder == ">":
        a = a.astype(a.dtype.newbyteorder("<"))
    return int(_fnv1a(a.view(np.uint8).reshape(-1)))


def native_lanes(kind: str) -> int:
    """Lanes per hardware vector for ``kind`` on this CPU (16-byte fallback)."""
    width = 16
    try:
        from numpy._core._multiarray_umath import __cpu_features__ as feats
    except ImportError:  # numpy < 2
        from numpy.core._multiarray_umath import __cpu_features__ as feats
    if feats.get("AVX512F"):
        width = 64
    elif feats.get("AVX2") or feats.get("AVX"):
        width = 32
    return max(1, width // KINDS[kind].itemsize)


# --- configuration and records -------------------------------------------


@dataclass
class BenchConfig:
    command: str = "bench"
    algos: list[str] = field(default_factory=list)
    op: str | None = None
    kind: str | None = None
    N: int | None = None
    ws: list[int] = field(default_factory=list)
    P: int | None = None
    dilation: int = 1
    stride: int = 1
    F: int = 1
    reps: int = 3
    warmup: int = 1
    seed: int = 42
    input: Path | None = None
    out: Path | None = None
    gemm: bool = True

    def validate(self) -> None:
        if self.command not in ("verify", "bench", "sweep"):
            raise ConfigError(f"unknown command {self.command!r}")
        if self.reps < 1 or self.warmup < 0:
            raise ConfigError("reps must be >= 1 and warmup >= 0")
        if self.kind is not None and self.kind not in KINDS:
            raise ConfigError(f"unknown element kind {self.kind!r}")
        for name in ("dilation", "stride", "F"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.N is not None and self.N < 1:
            raise ConfigError("N must be positive")
        if any(w < 1 for w in self.ws):
            raise ConfigError("window sizes must be positive")
        if self.P is not None and (self.P < 1 or self.P & (self.P - 1)):
            raise ConfigError(f"lane width must be a power of two, got {self.P}")
        known = set(SLIDING_ALGOS) | {"vector_slide_tree", "ping_pong_tree", "gemm", "gamma", "naive"}
        for a in self.algos:
            if a not in known:
                raise ConfigError(f"unknown algorithm {a!r}")
        if self.op not in (None, "add", "min", "max", "gamma", "conv"):
            raise ConfigError(f"unknown operator {self.op!r}")
        if self.command == "sweep" and not self.ws:
            raise ConfigError("sweep needs at least one window size")
        if self.op_name in ("conv", "gamma") and self.elem_kind == "i64":
            raise ConfigError(f"{self.op_name} needs a floating element kind")

    @property
    def op_name(self) -> str:
        return self.op or "conv"

    @property
    def elem_kind(self) -> str:
        return self.kind or "f32"

    @property
    def lanes(self) -> int:
        return self.P or native_lanes(self.elem_kind)


@dataclass
class BenchRecord:
    algo: str
    op: str
    kind: str
    N: int
    w: int
    P: int
    dilation: int
    reps: int
    best_ns_per_elem: float
    median_ns_per_elem: float
    speedup_vs_naive: float
    checksum: str

    def row(self) -> list[str]:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            out.append(f"{v:.4f}" if isinstance(v, float) else str(v))
        return out


def write_csv(records: list[BenchRecord], path: Path | None, stream=None) -> None:
    """Append records to ``path`` (header written for new files) or to ``stream``."""
    if path is None:
        w = csv.writer(stream or sys.stdout, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(r.row() for r in records)
        return
    path = Path(path)
    new = not path.exists() or path.stat().st_size == 0
    try:
        with path.open("a", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if new:
                w.writerow(CSV_HEADER)
            w.writerows(r.row() for r in records)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def load_input(path: Path, kind: str, N: int | None) -> np.ndarray:
    """Raw little-endian scalars of ``kind``; no header."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    size = KINDS[kind].itemsize
    if len(raw) % size:
        raise ConfigError(f"{path}: {len(raw)} bytes is not a whole number of {kind} elements")
    xs = np.frombuffer(raw, dtype=KINDS[kind].newbyteorder("<")).astype(KINDS[kind])
    if N is not None:
        if N > xs.shape[0]:
            raise ConfigError(f"{path}: holds {xs.shape[0]} elements, {N} requested")
        xs = xs[:N]
    if xs.shape[0] == 0:
        raise ConfigError(f"{path}: empty input")
    return xs


# --- timing --------------------------------------------------------------


def _time(fn: Callable[[], np.ndarray], reps: int, warmup: int) -> tuple[list[int], list[int]]:
    """Per-rep elapsed nanoseconds and output checksums."""
    for _ in range(warmup):
        fn()
    times, sums = [], []
    for _ in range(reps):
        t0 = time.perf_counter_ns()
        out = fn()
        times.append(time.perf_counter_ns() - t0)
        sums.append(fnv1a64(out))
    return times, sums


def _kernel(cfg: BenchConfig, algo: str, xs: np.ndarray, w: int) -> tuple[Callable, int]:
    P = cfg.lanes
    if cfg.op_name == "conv":
        bank = gen_filters(cfg.seed + 1, cfg.F, w, cfg.elem_kind)
        p = ConvProblem(xs, bank, WindowSpec(w, cfg.stride, cfg.dilation))
        if algo == "naive":
            return (lambda: conv1d_naive(p)), p.n_out
        if algo == "gemm":
            return (lambda: conv1d_gemm(p, max_rows=1 << 16)), p.n_out
        if algo == "gamma":
            return (lambda: conv1d_gamma(p)), p.n_out
        return (lambda: conv1d_sliding(p, algo, P)), p.n_out
    op = get_operator(cfg.op_name, cfg.elem_kind)
    sp = sliding.SlidingProblem(xs, w, op)
    if algo == "naive":
        return (lambda: sliding.naive_sliding_sum(sp)), sp.n_out
    if algo in ("gemm", "gamma"):
        raise ConfigError(f"{algo} only applies to --op conv")
    return (lambda: sliding.run(algo, sp, P)), sp.n_out


def _inputs(cfg: BenchConfig) -> np.ndarray:
    if cfg.input is not None:
        return load_input(cfg.input, cfg.elem_kind, cfg.N)
    N = cfg.N or (1 << 22)
    if cfg.op_name == "gamma":
        return gen_pairs(cfg.seed, N, cfg.elem_kind)
    return gen_input(cfg.seed, N, cfg.elem_kind)


def _measure(cfg: BenchConfig, algo: str, xs, w: int) -> tuple[float, float, str, bool]:
    fn, n_out = _kernel(cfg, algo, xs, w)
    times, sums = _time(fn, cfg.reps, cfg.warmup)
    best = min(times) / n_out
    median = statistics.median(times) / n_out
    return best, median, f"{sums[0]:016x}", len(set(sums)) == 1


def run_bench(cfg: BenchConfig) -> list[BenchRecord]:
    """Time every (algo, w) pair against the naive baseline; append to ``cfg.out``."""
    cfg.validate()
    xs = _inputs(cfg)
    ws = cfg.ws or [5]
    records = []
    for w in ws:
        naive_best, *_ = _measure(cfg, "naive", xs, w)
        for algo in cfg.algos or ["vector_slide"]:
            best, median, checksum, stable = _measure(cfg, algo, xs, w)
            if not stable:
                raise RuntimeError(f"{algo} w={w}: output checksum differs between reps")
            records.append(
                BenchRecord(
                    algo, cfg.op_name, cfg.elem_kind, xs.shape[0], w, cfg.lanes, cfg.dilation,
                    cfg.reps, best, median, naive_best / best, checksum,
                )
            )
    if cfg.out is not None:
        write_csv(records, cfg.out)
    return records


@dataclass
class SweepPoint:
    w: int
    speedup: float
    speedup_vs_gemm: float | None


def run_sweep(cfg: BenchConfig) -> tuple[list[BenchRecord], list[SweepPoint]]:
    """One convolution record per window size, plus (w, speedup) summary points."""
    cfg.validate()
    xs = _inputs(cfg)
    algo = (cfg.algos or ["vector_slide"])[0]
    records, points = [], []
    for w in cfg.ws:
        naive_best, *_ = _measure(cfg, "naive", xs, w)
        best, median, checksum, stable = _measure(cfg, algo, xs, w)
        if not stable:
            raise RuntimeError(f"{algo} w={w}: output checksum differs between reps")
        vs_gemm = None
        if cfg.gemm and cfg.op_name == "conv":
            gemm_best, *_ = _measure(cfg, "gemm", xs, w)
            vs_gemm = gemm_best / best
        records.append(
            BenchRecord(
                algo, cfg.op_name, cfg.elem_kind, xs.shape[0], w, cfg.lanes, cfg.dilation,
                cfg.reps, best, median, naive_best / best, checksum,
            )
        )
        points.append(SweepPoint(w, naive_best / best, vs_gemm))
    if cfg.out is not None:
        write_csv(records, cfg.out)
    return records, points


# --- verification grid ---------------------------------------------------


@dataclass(frozen=True)
class Cell:
    suite: str
    algo: str
    op: str
    N: int
    w: int
    P: int
    extra: str = ""

    def label(self) -> str:
        s = f"{self.suite:7s} {self.algo:18s} {self.op:9s} N={self.N:<6d} w={self.w:<3d} P={self.P:<2d}"
        return f"{s} {self.extra}".rstrip()


def grid_windows(P: int) -> list[int]:
    return sorted({1, 2, 3, 5, 7, P - 1, P, P + 1, 2 * P + 3} - {0})


def sliding_cells(
    ops=GRID_OPS, lanes=(4, 8, 16), ws=None, big_n=100003, algos=SLIDING_ALGOS
) -> Iterator[Cell]:
    for op in ops:
        for P in lanes:
            for w in ws or grid_windows(P):
                limit = None
                for N in sorted({w, w + 1, 37, 1024, big_n}):
                    if N < w:
                        continue
                    for algo in algos:
                        limit = sliding.max_window(algo.removesuffix("_tree"), P)
                        if limit is not None and w > limit:
                            continue
                        yield Cell("sliding", algo, op, N, w, P)


def check_sliding(cell: Cell, seed: int = 0) -> bool:
    op = get_operator(cell.op)
    xs = gen_elements(seed ^ (cell.N * 1000003 + cell.w), cell.N, cell.op)
    p = sliding.SlidingProblem(xs, cell.w, op)
    expected = sliding.naive_sliding_sum(p)
    return outputs_match(op, sliding.run(cell.algo, p, cell.P), expected)


CONV_WINDOWS = (1, 3, 5, 11, 17, 29, 49, 51)
CONV_ALGOS = ("scalar_input", "vector_input", "ping_pong", "vector_slide", "gamma", "gemm")


def conv_cells(
    ns=(16, 1024, 65536),
    ws=CONV_WINDOWS,
    dilations=(1, 2, 4, 8),
    strides=(1, 2),
    kinds=("f32", "f64"),
    filters=(1, 4),
    P: int = 16,
    algos=CONV_ALGOS,
) -> Iterator[Cell]:
    for kind in kinds:
        for N in ns:
            for w in ws:
                for d in dilations:
                    for s in strides:
                        for pad in ("valid", "zeros"):
                            spec = _conv_spec(w, s, d, pad)
                            if spec.extent > spec.padded_length(N):
                                continue
                            for algo in algos:
                                limit = sliding.max_window(algo, P)
                                if limit is not None and w > limit:
                                    continue
                                for F in filters:
                                    yield Cell(
                                        "conv", algo, f"conv:{kind}", N, w, P, f"d={d} s={s} {pad} F={F}"
                                    )


def _conv_spec(w: int, s: int, d: int, pad: str) -> WindowSpec:
    if pad == "valid":
        return WindowSpec(w, s, d)
    ext = (w - 1) * d
    return WindowSpec(w, s, d, (ext // 2, ext - ext // 2))


def _conv_problem(cell: Cell, seed: int) -> ConvProblem:
    kw = dict(t.split("=") for t in cell.extra.split() if "=" in t)
    pad = "valid" if "valid" in cell.extra else "zeros"
    kind = cell.op.split(":")[1]
    spec = _conv_spec(cell.w, int(kw["s"]), int(kw["d"]), pad)
    s = seed ^ (cell.N * 7919 + cell.w * 31 + int(kw["d"]))
    xs = gen_input(s, cell.N, kind)
    return ConvProblem(xs, gen_filters(s + 1, int(kw["F"]), cell.w, kind), spec)


_conv_cache: dict = {}


def check_conv(cell: Cell, seed: int = 0) -> bool:
    p = _conv_problem(cell, seed)
    key = (seed, cell.op, cell.N, cell.w, cell.extra)
    if key not in _conv_cache:
        _conv_cache.clear()
        _conv_cache[key] = conv1d_naive(p)
    expected = _conv_cache[key]
    if cell.algo == "gamma":
        got = conv1d_gamma(p)
    elif cell.algo == "gemm":
        got = conv1d_gemm(p)
    else:
        got = conv1d_sliding(p, cell.algo, cell.P)
    return allclose(got, expected, p.kind)


def run_verify(cfg: BenchConfig, out=None, suites=("sliding", "conv")) -> int:
    """Run the equivalence grid; return 0 when every cell passes, else 1."""
    cfg.validate()
    out = out or sys.stdout
    algos = [a for a in cfg.algos if a in SLIDING_ALGOS] if cfg.algos else list(SLIDING_ALGOS)
    ops = tuple(
        o for o in GRID_OPS
        if cfg.op in (None, o.split(":")[0]) and cfg.kind in (None, o.split(":")[1])
    )
    lanes = (cfg.P,) if cfg.P else (4, 8, 16)
    cells = []
    if "sliding" in suites and ops:
        cells += list(sliding_cells(ops, lanes, cfg.ws or None, cfg.N or 100003, algos))
    kinds = tuple(k for k in ("f32", "f64") if cfg.kind in (None, k))
    if "conv" in suites and cfg.op in (None, "conv") and kinds:
        conv_algos = [a for a in cfg.algos if a in CONV_ALGOS] if cfg.algos else list(CONV_ALGOS)
        cells += list(conv_cells(ws=cfg.ws or CONV_WINDOWS, kinds=kinds, algos=conv_algos))
    failed = 0
    t0 = time.perf_counter()
    for cell in cells:
        try:
            ok = check_sliding(cell, cfg.seed) if cell.suite == "sliding" else check_conv(cell, cfg.seed)
        except Exception as exc:  # a crashing kernel is a failed cell
            ok = False
            print(f"ERROR {cell.label()}: {exc}", file=out)
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'} {cell.label()}", file=out)
    dt = time.perf_counter() - t0
    print(f"{len(cells) - failed}/{len(cells)} cells passed in {dt:.1f}s", file=out)
    return 1 if failed else 0


def checksum_columns(path: Path) -> list[list[str]]:
    """CSV rows with the timing columns removed."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    keep = [i for i, h in enumerate(rows[0]) if h not in TIMING_COLUMNS]
    return [[r[i] for i in keep] for r in rows]


def fmt_speedups(points: list[SweepPoint]) -> str:
    lines = ["w,speedup_vs_naive,speedup_vs_gemm"]
    for pt in points:
        g = "" if pt.speedup_vs_gemm is None else f"{pt.speedup_vs_gemm:.3f}"
        lines.append(f"{pt.w},{pt.speedup:.3f},{g}")
    return "\n".join(lines)


def log2_trend(points: list[SweepPoint]) -> float:
    """Least-squares slope of speedup against log2(w)."""
    x = np.array([math.log2(p.w) for p in points])
    y = np.array([p.speedup for p in points])
    if len(points) < 2:
        return float("nan")
    return float(np.polyfit(x, y, 1)[0])
