"""Reduce and prefix scans, sequential or logarithmic depth.

All functions scan along axis 0, so ``xs`` may carry trailing batch axes.
Tree mode only reassociates; the order of operands is never swapped, which
keeps non-commutative operators (the pair operator) correct.
"""

from __future__ import annotations

import enum

import numpy as np

from .operators import GammaPair, OpCounter, Operator


class ScanMode(str, enum.Enum):
    SEQUENTIAL = "sequential"
    TREE = "tree"


def _mode(mode) -> ScanMode:
    return ScanMode(mode)


def _count(counter: OpCounter | None, n: int) -> None:
    if counter is not None:
        counter.combine_count += n


def _box(op: Operator, value):
    if op.name == "gamma":
        return GammaPair(float(value["u"]), float(value["v"]))
    return value


def _seq_accumulate(op: Operator, xs: np.ndarray, counter) -> np.ndarray:
    n = xs.shape[0]
    _count(counter, (n - 1) * int(np.prod(xs.shape[1:], dtype=np.int64)))
    if counter is not None and n > 1:
        counter.levels(n - 1)
    if op.ufunc is not None:
        # ufunc.accumulate is the strict left-to-right recurrence
        return op.ufunc.accumulate(xs, axis=0)
    out = np.empty_like(xs)
    out[0] = xs[0]
    for i in range(1, n):
        out[i] = op(out[i - 1], xs[i])
    return out


def _tree_reduce(op: Operator, xs: np.ndarray, counter) -> np.ndarray:
    # Pairwise levels with the odd tail carried up: the same tree as splitting
    # at the largest power of two below n, depth ceil(log2 n), n - 1 combines.
    level = xs
    depth = 0
    while level.shape[0] > 1:
        m = level.shape[0] // 2
        paired = op(level[0 : 2 * m : 2], level[1 : 2 * m : 2])
        _count(counter, paired.size)
        if level.shape[0] % 2:
            paired = np.concatenate([paired, level[-1:]], axis=0)
        level = paired
        depth += 1
    if counter is not None:
        counter.levels(depth)
    return level[0]


def reduce(op: Operator, xs, mode=ScanMode.SEQUENTIAL, counter: OpCounter | None = None):
    """Return ``x_0 (+) ... (+) x_{n-1}``.  Raises ``ValueError`` on empty input."""
    xs = op.asarray(xs)
    if xs.shape[0] == 0:
        raise ValueError("empty reduction")
    if _mode(mode) is ScanMode.TREE:
        out = _tree_reduce(op, xs, counter)
    else:
        out = _seq_accumulate(op, xs, counter)[-1]
    return _box(op, out) if out.ndim == 0 else out


def reduce_or_identity(op: Operator, xs, mode=ScanMode.SEQUENTIAL, counter=None):
    """Like :func:`reduce`, but an empty input yields the operator identity."""
    xs = op.asarray(xs)
    if xs.shape[0] == 0:
        return _box(op, op.full(()))
    return reduce(op, xs, mode, counter)


def _blelloch_exclusive(op: Operator, xs: np.ndarray, counter, flip: bool) -> np.ndarray:
    def comb(a, b):
        return op(b, a) if flip else op(a, b)

    n = xs.shape[0]
    size = 1 << max(0, (n - 1).bit_length())
    buf = op.full((size,) + xs.shape[1:])
    buf[:n] = xs
    depth = 0
    step = 1
    while step < size:  # up-sweep
        right = slice(2 * step - 1, size, 2 * step)
        left = slice(step - 1, size, 2 * step)
        buf[right] = comb(buf[left], buf[right])
        _count(counter, buf[right].size)
        step *= 2
        depth += 1
    buf[size - 1] = op.identity
    step = size // 2
    while step >= 1:  # down-sweep
        right = slice(2 * step - 1, size, 2 * step)
        left = slice(step - 1, size, 2 * step)
        t = buf[left].copy()
        buf[left] = buf[right]
        buf[right] = comb(buf[right], t)
        _count(counter, t.size)
        step //= 2
        depth += 1
    if counter is not None:
        counter.levels(depth)
    return buf[:n]


def exclusive_scan(op: Operator, xs, mode=ScanMode.SEQUENTIAL, counter=None) -> np.ndarray:
    """``out[0] = identity``, ``out[i] = x_0 (+) ... (+) x_{i-1}``."""
    xs = op.asarray(xs)
    if _mode(mode) is ScanMode.TREE:
        return _blelloch_exclusive(op, xs, counter, flip=False)
    out = op.full(xs.shape)
    if xs.shape[0] > 1:
        out[1:] = _seq_accumulate(op, xs[:-1], counter)
    return out


def inclusive_scan(op: Operator, xs, mode=ScanMode.SEQUENTIAL, counter=None) -> np.ndarray:
    """``out[i] = x_0 (+) ... (+) x_i``."""
    xs = op.asarray(xs)
    if xs.shape[0] == 0:
        raise ValueError("empty scan")
    if _mode(mode) is ScanMode.TREE:
        excl = _blelloch_exclusive(op, xs, counter, flip=False)
        _count(counter, xs.size)
        return op(excl, xs)
    return _seq_accumulate(op, xs, counter)


def suffix_scan(op: Operator, xs, mode=ScanMode.SEQUENTIAL, counter=None) -> np.ndarray:
    """``out[i] = x_i (+) ... (+) x_{n-1}``."""
    xs = op.asarray(xs)
    n = xs.shape[0]
    if n == 0:
        raise ValueError("empty scan")
    if _mode(mode) is ScanMode.TREE:
        rev = xs[::-1]
        excl = _blelloch_exclusive(op, rev, counter, flip=True)
        _count(counter, xs.size)
        return op(rev, excl)[::-1].copy()
    _count(counter, (n - 1) * int(np.prod(xs.shape[1:], dtype=np.int64)))
    if op.ufunc is not None and op.is_commutative:
        # same association as the loop below; operand swap is exact
        return np.ascontiguousarray(op.ufunc.accumulate(xs[::-1], axis=0)[::-1])
    out = np.empty_like(xs)
    out[n - 1] = xs[n - 1]
    for i in range(n - 2, -1, -1):
        out[i] = op(xs[i], out[i + 1])
    return out
