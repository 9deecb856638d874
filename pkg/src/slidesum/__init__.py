"""Sliding window sums over associative operators, and DNN kernels built on them."""

from .operators import GammaPair, OpCounter, combine, gamma_combine, gamma_from, get_operator
from .scan import ScanMode, exclusive_scan, inclusive_scan, reduce, suffix_scan
from .sliding import (
    SlidingProblem,
    naive_sliding_sum,
    ping_pong,
    scalar_input,
    vector_input,
    vector_slide,
)
from .lanes import slide
from .nn import ConvProblem, FilterBank, WindowSpec, avg_pool, conv1d_gamma, conv1d_sliding, dot_scan, max_pool, min_pool
from .baseline import ColMatrix, conv1d_gemm, conv1d_naive, gemm, im2col

__all__ = [
    "ColMatrix", "ConvProblem", "FilterBank", "GammaPair", "OpCounter", "ScanMode",
    "SlidingProblem", "WindowSpec", "avg_pool", "combine", "conv1d_gamma", "conv1d_gemm",
    "conv1d_naive", "conv1d_sliding", "dot_scan", "exclusive_scan", "gamma_combine",
    "gamma_from", "gemm", "get_operator", "im2col", "inclusive_scan", "max_pool", "min_pool",
    "naive_sliding_sum", "ping_pong", "reduce", "scalar_input", "slide", "suffix_scan",
    "vector_input", "vector_slide",
]
