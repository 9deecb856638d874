"""Lane blocks: fixed-width vectors of P lanes.

A lane block is a numpy array whose first axis holds the P lanes.  Trailing
axes are independent blocks processed in lockstep (one per input stream), so
one call here stands for the same vector instruction issued on every stream.
Keeping lanes first makes every block of a stream-major buffer contiguous.
"""

from __future__ import annotations

import numpy as np

from .operators import OpCounter, Operator
from .scan import ScanMode


def extract(buf: np.ndarray, offset: int, P: int) -> np.ndarray:
    """Lanes ``offset .. offset + P - 1`` of a concatenated lane buffer."""
    return buf[offset : offset + P]


def slide(y1: np.ndarray, y2: np.ndarray, offset: int) -> np.ndarray:
    """Extract P lanes starting at ``offset`` from ``concat(y1, y2)``.

    This is the EXT / vslidedown style primitive; ``offset`` ranges over 0..P.
    """
    P = y1.shape[0]
    if y2.shape[0] != P:
        raise ValueError("slide needs two blocks of equal width")
    if not 0 <= offset <= P:
        raise ValueError(f"slide offset {offset} outside 0..{P}")
    return extract(np.concatenate([y1, y2], axis=0), offset, P)


class Lanes:
    """Block primitives bound to an operator, a lane width and a counter.

    With ``taps`` set, the operator must be ``add`` and every element that
    enters a window is first scaled by the filter coefficient for its position
    in that window (one fused multiply-add per tap).
    """

    def __init__(self, op: Operator, P: int, counter: OpCounter | None = None, taps=None):
        if P < 1 or P & (P - 1):
            raise ValueError(f"lane width must be a power of two, got {P}")
        if taps is not None:
            if op.name != "add" or op.kind == "i64":
                raise ValueError("weighted windows need a floating add operator")
            taps = np.asarray(taps, dtype=op.dtype)
        self.op = op
        self.P = P
        self.counter = counter
        self.taps = taps
        self._tmp: np.ndarray | None = None

    @property
    def weighted(self) -> bool:
        return self.taps is not None

    def _count(self, arr: np.ndarray) -> None:
        if self.counter is not None:
            self.counter.combine_count += arr.size
            self.counter.block_op_count += arr.size // self.P

    def identity(self, shape) -> np.ndarray:
        return self.op.full(shape)

    def combine(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        out = self.op(a, b)
        self._count(out)
        return out

    def shl(self, x: np.ndarray, s: int) -> np.ndarray:
        """Move lane ``i + s`` into lane ``i``; vacated high lanes get the identity."""
        out = self.op.full(x.shape)
        n = x.shape[0]
        if s < n:
            out[: n - s] = x[s:]
        return out

    def shr(self, x: np.ndarray, s: int) -> np.ndarray:
        """Move lane ``i`` into lane ``i + s``; vacated low lanes get the identity."""
        out = self.op.full(x.shape)
        n = x.shape[0]
        if s < n:
            out[s:] = x[: n - s]
        return out

    def broadcast(self, values: np.ndarray, width: int) -> np.ndarray:
        """Lanes ``[0, width)`` hold ``values`` (one per stream), the rest the identity."""
        out = self.op.full((self.P,) + values.shape)
        out[:width] = values
        return out

    # weighted terms -------------------------------------------------------

    def term(self, x: np.ndarray, tap) -> np.ndarray:
        if self.taps is None:
            return x
        return x * self.taps[tap]

    def fold(self, acc: np.ndarray, x: np.ndarray, tap, left: bool) -> np.ndarray:
        """``x (+) acc`` when ``left`` else ``acc (+) x``; ``acc`` must be owned."""
        self._count(acc)
        if self.taps is not None:
            if self._tmp is None or self._tmp.shape != x.shape:
                self._tmp = np.empty(x.shape, dtype=self.op.dtype)
            np.multiply(x, self.taps[tap], out=self._tmp)
            acc += self._tmp
            return acc
        if self.op.ufunc is not None:
            return self.op.ufunc(x, acc, out=acc) if left else self.op.ufunc(acc, x, out=acc)
        return self.op(x, acc) if left else self.op(acc, x)

    # window builders ------------------------------------------------------

    def ending_windows(self, x: np.ndarray, w: int, mode=ScanMode.SEQUENTIAL) -> np.ndarray:
        """Lane ``j`` gets ``x[j-w+1] (+) ... (+) x[j]``, truncated at lane 0.

        The element ``k`` lanes behind the window end sits at tap ``w - 1 - k``.
        """
        if ScanMode(mode) is ScanMode.TREE:
            return self._doubling(x, w, ending=True)
        acc = np.array(self.term(x, w - 1), copy=True)
        for k in range(1, w):
            acc = self.fold(acc, self.shr(x, k), w - 1 - k, left=True)
        return acc

    def starting_windows(self, x: np.ndarray, w: int, mode=ScanMode.SEQUENTIAL) -> np.ndarray:
        """Lane ``j`` gets ``x[j] (+) ... (+) x[j+w-1]``, truncated at the last lane.

        The element ``k`` lanes after the window start sits at tap ``k``.
        """
        if ScanMode(mode) is ScanMode.TREE:
            return self._doubling(x, w, ending=False)
        acc = np.array(self.term(x, 0), copy=True)
        for k in range(1, w):
            acc = self.fold(acc, self.shl(x, k), k, left=False)
        return acc

    def _doubling(self, x: np.ndarray, w: int, ending: bool) -> np.ndarray:
        # Window sums by recursive doubling.  Each level doubles the span of
        # `span` and folds the set bits of w into `acc`, lowest bit first.
        # Depth is floor(log2 w) + 1 at most.
        if self.taps is not None:
            raise ValueError("weighted windows only support sequential mode")
        span, acc = x, None
        covered = 0
        t = 1
        depth = 0
        while t <= w:
            used = False
            new_acc = acc
            if w & t:
                if acc is None:
                    new_acc = span
                elif ending:
                    new_acc = self.combine(self.shr(span, covered), acc)
                    used = True
                else:
                    new_acc = self.combine(acc, self.shl(span, covered))
                    used = True
                covered += t
            if 2 * t <= w:
                if ending:
                    span = self.combine(self.shr(span, t), span)
                else:
                    span = self.combine(span, self.shl(span, t))
                used = True
            acc = new_acc
            depth += used
            t *= 2
        if self.counter is not None:
            self.counter.levels(depth)
        return np.array(acc, copy=True)
