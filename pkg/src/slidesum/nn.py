"""Pooling, dot products and 1-D convolution built on sliding sums."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.lib.stride_tricks import as_strided

from .operators import gamma_carries, gamma_dtype, gamma_sequence, get_operator, mask_coefficients
from .scan import ScanMode, reduce
from .sliding import SlidingProblem, run


@dataclass(frozen=True)
class WindowSpec:
    """Window size, stride, dilation and padding.

    ``padding`` is ``"valid"`` or a ``(left, right)`` pair of zero-pad widths.
    """

    w: int
    stride: int = 1
    dilation: int = 1
    padding: str | tuple[int, int] = "valid"

    def __post_init__(self):
        if self.w < 1 or self.stride < 1 or self.dilation < 1:
            raise ValueError(f"window, stride and dilation must be >= 1: {self}")
        if self.padding != "valid":
            left, right = self.padding
            if left < 0 or right < 0:
                raise ValueError(f"negative padding {self.padding}")
            object.__setattr__(self, "padding", (int(left), int(right)))

    @property
    def pads(self) -> tuple[int, int]:
        return (0, 0) if self.padding == "valid" else self.padding

    @property
    def extent(self) -> int:
        return (self.w - 1) * self.dilation + 1

    def padded_length(self, n: int) -> int:
        return n + sum(self.pads)

    def dense_length(self, n: int) -> int:
        """Outputs at stride 1."""
        return self.padded_length(n) - self.extent + 1

    def output_length(self, n: int) -> int:
        return (self.padded_length(n) - self.extent) // self.stride + 1

    def check(self, n: int) -> None:
        if self.extent > self.padded_length(n):
            raise ValueError(
                f"window extent {self.extent} exceeds padded input length {self.padded_length(n)}"
            )

    def pad(self, xs: np.ndarray, value) -> np.ndarray:
        left, right = self.pads
        if not (left or right):
            return xs
        out = np.empty(xs.shape[0] + left + right, dtype=xs.dtype)
        out[:left] = value
        out[left : left + xs.shape[0]] = xs
        out[left + xs.shape[0] :] = value
        return out


@dataclass
class FilterBank:
    filters: np.ndarray  # F x w

    def __post_init__(self):
        f = np.asarray(self.filters)
        if f.ndim == 1:
            f = f[None, :]
        if f.ndim != 2 or f.shape[0] < 1 or f.shape[1] < 1:
            raise ValueError("filter bank must be a non-empty F x w array")
        if f.dtype.kind != "f":
            f = f.astype(np.float64)
        if not np.all(np.isfinite(f)):
            raise ValueError("filter coefficients must be finite")
        self.filters = f

    @property
    def F(self) -> int:
        return self.filters.shape[0]

    @property
    def w(self) -> int:
        return self.filters.shape[1]


@dataclass
class ConvProblem:
    """Single-channel 1-D convolution.  Cross-correlation unless ``flip`` is set."""

    input: np.ndarray
    bank: FilterBank
    spec: WindowSpec = field(default=None)
    flip: bool = False

    def __post_init__(self):
        if not isinstance(self.bank, FilterBank):
            self.bank = FilterBank(self.bank)
        x = np.asarray(self.input)
        if x.dtype.kind != "f":
            x = x.astype(np.float64)
        if x.ndim != 1:
            raise ValueError("input must be one-dimensional")
        self.input = x
        if self.spec is None:
            self.spec = WindowSpec(self.bank.w)
        if self.spec.w != self.bank.w:
            raise ValueError(f"spec window {self.spec.w} != filter length {self.bank.w}")
        self.spec.check(x.shape[0])

    @property
    def kind(self) -> str:
        return "f32" if self.input.dtype == np.float32 else "f64"

    @property
    def n_out(self) -> int:
        return self.spec.output_length(self.input.shape[0])

    def taps(self) -> np.ndarray:
        """Filters in the order they meet the input, in the input's precision."""
        f = self.bank.filters[:, ::-1] if self.flip else self.bank.filters
        return np.ascontiguousarray(f, dtype=self.input.dtype)

    def padded_input(self) -> np.ndarray:
        return self.spec.pad(self.input, 0)


def _dense(xp: np.ndarray, spec: WindowSpec, window_fn: Callable[[np.ndarray], np.ndarray], fill):
    """Stride-1 windowed outputs.

    The ``d`` dilation phases become ``d`` columns of one batched call: phase
    ``r`` is ``xp[r::d]``, and its output ``q`` lands at dense index
    ``q*d + r``.  ``fill`` pads the last row; outputs reading it are dropped.
    """
    d = spec.dilation
    n_dense = xp.shape[0] - spec.extent + 1
    if d == 1:
        return window_fn(xp)
    rows = -(-xp.shape[0] // d)
    grid = np.empty(rows * d, dtype=xp.dtype)
    grid[: xp.shape[0]] = xp
    grid[xp.shape[0] :] = fill
    res = window_fn(grid.reshape(rows, d))
    return res.reshape(-1)[:n_dense]


def _pool(xs, spec: WindowSpec, name: str, pad_value, algo: str, P: int) -> np.ndarray:
    xs = np.asarray(xs)
    spec.check(xs.shape[0])
    kind = {np.dtype(np.float32): "f32", np.dtype(np.int64): "i64"}.get(xs.dtype, "f64")
    if xs.dtype.kind in "iu" and name == "add":
        kind = "f64"
    op = get_operator(name, kind)
    xs = xs.astype(op.dtype, copy=False)
    if pad_value is None:
        pad_value = op.identity
    xp = spec.pad(xs, pad_value)
    dense = _dense(xp, spec, lambda sub: run(algo, SlidingProblem(sub, spec.w, op), P), pad_value)
    return dense[:: spec.stride]


def avg_pool(xs, spec: WindowSpec, algo: str = "vector_slide", P: int = 8) -> np.ndarray:
    """Window means; padded zeros count toward the divisor ``w``."""
    return _pool(xs, spec, "add", 0, algo, P) / spec.w


def max_pool(xs, spec: WindowSpec, algo: str = "vector_slide", P: int = 8) -> np.ndarray:
    """Window maxima; padding is -inf (the integer minimum for i64), so it never wins."""
    return _pool(xs, spec, "max", None, algo, P)


def min_pool(xs, spec: WindowSpec, algo: str = "vector_slide", P: int = 8) -> np.ndarray:
    return _pool(xs, spec, "min", None, algo, P)


def dot_scan(a, b, mode=ScanMode.TREE, counter=None) -> float:
    """Dot product of ``a`` and ``b`` as the reduction of ``M + 1`` (u, v) pairs."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    if a.shape[0] < 1:
        raise ValueError("empty vectors")
    total = reduce(get_operator("gamma", "f64"), gamma_sequence(a, b), mode, counter)
    return total.v


def _subsample(dense: np.ndarray, spec: WindowSpec) -> np.ndarray:
    return dense[:: spec.stride]


def conv1d_sliding(
    p: ConvProblem, algo: str = "vector_slide", P: int = 8, *, streams: int | None = None
) -> np.ndarray:
    """F x n_out convolution through a sliding-sum algorithm with per-tap FMA.

    Dilation ``d`` runs the algorithm on the ``d`` interleaved phases of the
    padded input; stride subsamples the dense result.
    """
    op = get_operator("add", p.kind)
    xp = p.padded_input()
    taps = p.taps()
    w = p.spec.w
    out = np.empty((p.bank.F, p.n_out), dtype=p.input.dtype)
    for f in range(p.bank.F):
        dense = _dense(
            xp, p.spec,
            lambda sub: run(algo, SlidingProblem(sub, w, op), P, taps=taps[f], streams=streams),
            0,
        )
        out[f] = _subsample(dense, p.spec)
    return out


def conv1d_gamma(p: ConvProblem, mode=ScanMode.TREE, chunk: int = 1 << 14) -> np.ndarray:
    """F x n_out convolution where every output is a pair-operator reduction.

    Carry factors come from the filter once; each window contributes its
    masked inputs as the accumulator components.  A reference path.
    """
    # pairs are evaluated in f64 whatever the input kind; the carry ratios
    # amplify rounding too much for f32 accumulation
    kind = "f64"
    op = get_operator("gamma", kind)
    xp = p.padded_input().astype(np.float64)
    w, s, d = p.spec.w, p.spec.stride, p.spec.dilation
    n_out = p.n_out
    item = xp.strides[0]
    windows = as_strided(xp, shape=(w, n_out), strides=(d * item, s * item), writeable=False)
    out = np.empty((p.bank.F, n_out), dtype=p.input.dtype)
    for f, a in enumerate(p.taps().astype(np.float64)):
        alpha, _ = mask_coefficients(a, a)
        u = gamma_carries(alpha)
        keep = (a != 0)[:, None]
        for lo in range(0, n_out, chunk):
            hi = min(n_out, lo + chunk)
            g = np.empty((w + 1, hi - lo), dtype=gamma_dtype(kind))
            g["u"] = u[:, None]
            g["v"][:w] = np.where(keep, windows[:, lo:hi], 0)
            g["v"][w] = 0
            out[f, lo:hi] = reduce(op, g, mode)["v"]
    return out
