"""Reference convolutions: a direct loop and im2col + GEMM."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nn import ConvProblem, WindowSpec

# rows per GEMM panel
_BLOCK = 4096


@dataclass
class ColMatrix:
    """Row ``i``, column ``k`` holds input ``i*stride + k*dilation`` of the padded input."""

    data: np.ndarray  # rows x w, row-major

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def allocation(self) -> int:
        """Bytes held by the column matrix."""
        return self.data.nbytes


def conv1d_naive(p: ConvProblem) -> np.ndarray:
    """Filters x outputs x taps, accumulated left to right in f64, rounded to the input kind.

    The output loop is vectorized; each output still sums its taps in order.
    """
    xp = p.padded_input().astype(np.float64)
    s, d = p.spec.stride, p.spec.dilation
    n_out = p.n_out
    span = s * (n_out - 1) + 1
    taps = p.taps().astype(np.float64)
    out = np.empty((p.bank.F, n_out), dtype=p.input.dtype)
    for f in range(p.bank.F):
        acc = np.zeros(n_out)
        for k in range(p.spec.w):
            acc += taps[f, k] * xp[k * d : k * d + span : s]
        out[f] = acc
    return out


def im2col(xs, spec: WindowSpec, rows: slice | None = None) -> ColMatrix:
    """Materialize the column matrix (zero padding included).

    ``rows`` restricts the build to a panel of output rows.
    """
    xs = np.asarray(xs)
    spec.check(xs.shape[0])
    xp = spec.pad(xs, 0)
    n_out = spec.output_length(xs.shape[0])
    start, stop, _ = (rows or slice(0, n_out)).indices(n_out)
    idx = (np.arange(start, stop) * spec.stride)[:, None] + np.arange(spec.w) * spec.dilation
    return ColMatrix(np.ascontiguousarray(xp[idx]))


def gemm(A, B) -> np.ndarray:
    """``A @ B`` with row panels and a tap loop, accumulated in f64."""
    A = A.data if isinstance(A, ColMatrix) else np.asarray(A)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[0]:
        raise ValueError(f"dimension mismatch: {A.shape} x {B.shape}")
    C = np.zeros((A.shape[0], B.shape[1]))
    for r0 in range(0, A.shape[0], _BLOCK):
        panel = A[r0 : r0 + _BLOCK].astype(np.float64)
        acc = C[r0 : r0 + _BLOCK]
        for k in range(A.shape[1]):
            acc += panel[:, k, None] * B[k]
    return C


def conv1d_gemm(p: ConvProblem, max_rows: int | None = None) -> np.ndarray:
    """im2col followed by GEMM; ``max_rows`` caps the column-matrix panel size."""
    n_out = p.n_out
    step = max_rows or n_out
    out = np.empty((p.bank.F, n_out), dtype=p.input.dtype)
    B = p.taps().T
    for lo in range(0, n_out, step):
        cols = im2col(p.input, p.spec, slice(lo, lo + step))
        out[:, lo : lo + cols.rows] = gemm(cols, B).T
    return out
