import numpy as np
import pytest

from slidesum.baseline import ColMatrix, conv1d_gemm, conv1d_naive, gemm, im2col
from slidesum.nn import ConvProblem, WindowSpec
from slidesum.operators import allclose


def test_im2col_example():
    cols = im2col(np.array([1.0, 2.0, 3.0]), WindowSpec(2, padding=(1, 0)))
    assert cols.data.tolist() == [[0, 1], [1, 2], [2, 3]]
    assert (cols.rows, cols.cols) == (3, 2)


def test_im2col_stride_dilation():
    cols = im2col(np.arange(10.0), WindowSpec(3, stride=3, dilation=2))
    assert cols.data.tolist() == [[0, 2, 4], [3, 5, 7]]


def test_im2col_panel():
    spec = WindowSpec(3)
    full = im2col(np.arange(20.0), spec)
    part = im2col(np.arange(20.0), spec, slice(5, 9))
    assert np.array_equal(part.data, full.data[5:9])


@pytest.mark.parametrize("dtype,itemsize", [(np.float32, 4), (np.float64, 8)])
def test_im2col_footprint(dtype, itemsize):
    for n, w in [(100, 3), (1000, 17), (4096, 49)]:
        spec = WindowSpec(w)
        cols = im2col(np.zeros(n, dtype=dtype), spec)
        assert cols.allocation == w * spec.output_length(n) * itemsize


def test_gemm_example():
    A = ColMatrix(np.array([[1.0, 2.0], [3.0, 4.0]]))
    assert gemm(A, np.array([[1.0], [1.0]])).tolist() == [[3.0], [7.0]]
    with pytest.raises(ValueError):
        gemm(A, np.ones((3, 1)))


def test_gemm_matches_matmul(rng):
    A = rng.uniform(-1, 1, (9000, 7))
    B = rng.uniform(-1, 1, (7, 4))
    assert np.allclose(gemm(A, B), A @ B, rtol=1e-12, atol=1e-12)


def test_naive_example():
    p = ConvProblem(np.array([1.0, 2, 3, 4]), [[1.0, 0, -1]])
    assert conv1d_naive(p).tolist() == [[-2.0, -2.0]]


@pytest.mark.parametrize("max_rows", [None, 1, 7, 1000])
def test_gemm_conv_matches_naive(max_rows, rng):
    x = rng.uniform(-1, 1, 500).astype(np.float32)
    p = ConvProblem(x, rng.uniform(-2, 2, (4, 9)), WindowSpec(9, stride=2, dilation=3, padding=(4, 4)))
    assert allclose(conv1d_gemm(p, max_rows), conv1d_naive(p), "f32")


def test_naive_multi_filter_shape(rng):
    p = ConvProblem(rng.uniform(-1, 1, 50), rng.uniform(-1, 1, (3, 4)))
    out = conv1d_naive(p)
    assert out.shape == (3, 47)
    for f in range(3):
        assert np.allclose(out[f], np.correlate(p.input, p.bank.filters[f], mode="valid"))
