"""Sliding window sums: the brute-force oracle and four lane-block algorithms.

Output ``i`` always covers ``x[i] (+) ... (+) x[i+w-1]``; there are
``N - w + 1`` outputs.  Operands are combined in input order, so the pair
operator works everywhere.

Each algorithm splits its output range into streams.  A stream owns a
contiguous run of outputs and reads its inputs plus the ``w - 1`` elements of
overlap that follow; the input tail is padded with the identity.  All streams
advance through the algorithm's loop together, each loop step being one
lane-block operation per stream.  ``streams=1`` runs the textbook single loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import lanes as _lanes
from .lanes import Lanes
from .operators import OpCounter, Operator
from .scan import ScanMode, suffix_scan

# automatic layout: enough streams that each block op is a wide array op,
# with 1 to 64 blocks per stream
_AUTO_STREAMS = 4096
_AUTO_BLOCKS = (1, 64)


@dataclass
class SlidingProblem:
    """Window sums of ``xs`` along axis 0; trailing axes are independent sequences."""

    xs: np.ndarray
    w: int
    op: Operator

    def __post_init__(self):
        self.xs = self.op.asarray(self.xs)
        if self.xs.ndim < 1:
            raise ValueError("input must have a sequence axis")
        if self.w < 1:
            raise ValueError(f"window size must be >= 1, got {self.w}")
        if self.xs.shape[0] < self.w:
            raise ValueError("window exceeds input")

    @property
    def N(self) -> int:
        return self.xs.shape[0]

    @property
    def n_out(self) -> int:
        return self.N - self.w + 1

    @property
    def batch_size(self) -> int:
        return int(np.prod(self.xs.shape[1:], dtype=np.int64))


def naive_sliding_sum(p: SlidingProblem) -> np.ndarray:
    """Every window summed left to right, O(wN).  The ground truth."""
    n = p.n_out
    acc = p.xs[:n].copy()
    for k in range(1, p.w):
        acc = p.op(acc, p.xs[k : k + n])
    return acc


def _check_lanes(w: int, P: int, allow_equal: bool = False) -> None:
    if w > P or (w == P and not allow_equal):
        raise ValueError(
            f"lane width too small: window {w} needs P > {w}"
            + (" (or P == w)" if allow_equal else "")
            + "; use vector_slide for wide windows"
        )


def _stream_layout(
    n_out: int, granule: int, P: int, streams: int | None, batch: int = 1
) -> tuple[int, int]:
    """(stream count, outputs per stream); outputs per stream is a multiple of ``granule``.

    ``batch`` independent sequences share every block op, so they count
    toward the automatic stream target.
    """
    if streams is None:
        lo, hi = _AUTO_BLOCKS
        blocks = min(hi, max(lo, math.ceil(n_out * batch / (P * _AUTO_STREAMS))))
        per = max(granule, (blocks * P) // granule * granule)
        streams = math.ceil(n_out / per)
    streams = max(1, min(streams, n_out))
    per = math.ceil(math.ceil(n_out / streams) / granule) * granule
    return math.ceil(n_out / per), per


def _chunks(op: Operator, xs: np.ndarray, S: int, L: int, span: int, lead: int = 0) -> np.ndarray:
    """Overlapping stream inputs, shape ``(lead + span, S * B)``.

    Column ``s * B + b`` holds ``xs[s*L - lead : s*L + span, b]`` for each of
    the ``B`` sequences on the trailing axis; out-of-range positions hold the
    identity.  Streams are the contiguous axis, so each lane block (a run of
    rows) is one contiguous slab.
    """
    total = (S - 1) * L + lead + span
    padded = op.full((total,) + xs.shape[1:])
    n = min(xs.shape[0], total - lead)
    padded[lead : lead + n] = xs[:n]
    view = sliding_window_view(padded, lead + span, axis=0)[::L]  # (S, *batch, span)
    return np.ascontiguousarray(np.moveaxis(view, -1, 0)).reshape(lead + span, -1)


def _gather(out: np.ndarray, n_out: int, batch: tuple = ()) -> np.ndarray:
    """Stream-major ``(L, S * B)`` results back to output sequences."""
    L = out.shape[0]
    out = out.reshape((L, -1) + batch)
    return np.ascontiguousarray(np.moveaxis(out, 0, 1)).reshape((-1,) + batch)[:n_out]


def _initial_suffixes(lanes: Lanes, prefix: np.ndarray, w: int) -> np.ndarray:
    """Lane block whose lane ``j < w-1`` holds the partial window ``prefix[j:]``."""
    P = lanes.P
    Y = lanes.identity((P,) + prefix.shape[1:])
    if w == 1:
        return Y
    if lanes.weighted:
        block = lanes.identity((P,) + prefix.shape[1:])
        block[: w - 1] = prefix
        setup = Lanes(lanes.op, P, None, lanes.taps)
        Y[: w - 1] = setup.starting_windows(block, w - 1)[: w - 1]
    else:
        Y[: w - 1] = suffix_scan(lanes.op, prefix)
    return Y


def scalar_input(
    p: SlidingProblem,
    P: int,
    *,
    streams: int | None = None,
    counter: OpCounter | None = None,
    taps=None,
) -> np.ndarray:
    """One input element per step: broadcast, combine, emit lane 0, shift.

    Requires ``w < P``.  Exactly one lane-block combine per output per stream.
    """
    w, op = p.w, p.op
    _check_lanes(w, P)
    lanes = Lanes(op, P, counter, taps)
    S, L = _stream_layout(p.n_out, 1, P, streams, p.batch_size)
    C = _chunks(op, p.xs, S, L, L + w - 1)
    Y = _initial_suffixes(lanes, C[: w - 1], w)
    if lanes.weighted:
        coef = np.zeros((P, 1), dtype=op.dtype)
        coef[:w, 0] = lanes.taps[::-1]
    out = np.empty((L, C.shape[1]), dtype=op.dtype)
    for i in range(w - 1, L + w - 1):
        X = lanes.broadcast(C[i], w)
        if lanes.weighted:
            X *= coef
        Y = lanes.combine(Y, X)
        out[i - w + 1] = Y[0]
        Y = lanes.shl(Y, 1)
    return _gather(out, p.n_out, p.xs.shape[1:])


def vector_input(
    p: SlidingProblem,
    P: int,
    mode=ScanMode.SEQUENTIAL,
    *,
    streams: int | None = None,
    counter: OpCounter | None = None,
    taps=None,
) -> np.ndarray:
    """P elements per step: in-block windows plus the suffixes carried from the last block.

    Requires ``w < P``.  In sequential mode each block costs ``2w - 2``
    lane-block combines (1 when ``w == 1``); tree mode builds the in-block
    windows by recursive doubling.
    """
    w, op = p.w, p.op
    _check_lanes(w, P)
    lanes = Lanes(op, P, counter, taps)
    S, L = _stream_layout(p.n_out, P, P, streams, p.batch_size)
    C = _chunks(op, p.xs, S, L, L + w - 1)
    Y = _initial_suffixes(lanes, C[: w - 1], w)
    out = np.empty((L, C.shape[1]), dtype=op.dtype)
    for b in range(L // P):
        X = C[w - 1 + b * P : w - 1 + (b + 1) * P]
        X1 = lanes.ending_windows(X, w, mode)
        out[b * P : (b + 1) * P] = lanes.combine(Y, X1)
        if w > 1:
            Y = lanes.shl(lanes.starting_windows(X, w - 1, mode), P - w + 1)
    return _gather(out, p.n_out, p.xs.shape[1:])


def ping_pong(
    p: SlidingProblem,
    P: int,
    mode=ScanMode.SEQUENTIAL,
    *,
    streams: int | None = None,
    counter: OpCounter | None = None,
    taps=None,
) -> np.ndarray:
    """Two blocks per step, ``2P - w + 1`` outputs: windows starting in the first
    block are finished from its own lanes, the rest by the second block's prefixes.

    Requires ``w <= P``.
    """
    w, op = p.w, p.op
    _check_lanes(w, P, allow_equal=True)
    lanes = Lanes(op, P, counter, taps)
    G = 2 * P - w + 1
    S, L = _stream_layout(p.n_out, G, P, streams, p.batch_size)
    C = _chunks(op, p.xs, S, L, L + w - 1)
    head = P - w + 1
    out = np.empty((L, C.shape[1]), dtype=op.dtype)
    for i in range(0, L, G):
        Yb = C[i : i + P]
        Xb = C[i + P : i + 2 * P]
        Y1 = lanes.starting_windows(Yb, w, mode)
        out[i : i + head] = Y1[:head]
        Y1 = lanes.shl(Y1, head)
        X1 = lanes.ending_windows(Xb, w, mode)
        out[i + head : i + G] = lanes.combine(Y1, X1)
    return _gather(out, p.n_out, p.xs.shape[1:])


def vector_slide(
    p: SlidingProblem,
    P: int,
    mode=ScanMode.SEQUENTIAL,
    *,
    streams: int | None = None,
    counter: OpCounter | None = None,
    taps=None,
) -> np.ndarray:
    """Each output block is its input block folded with ``w - 1`` slides of the
    preceding lanes.

    Any ``w`` works: a ring of ``ceil((w-1)/P)`` earlier blocks stays loaded
    and the slide for lag ``k`` reads across the block pair it straddles.
    """
    w, op = p.w, p.op
    lanes = Lanes(op, P, counter, taps)
    R = math.ceil((w - 1) / P)
    S, L = _stream_layout(p.n_out, P, P, streams, p.batch_size)
    # left pad so the first output block starts right after the ring
    C = _chunks(op, p.xs, S, L, L + w - 1, lead=R * P - (w - 1))
    out = np.empty((L, C.shape[1]), dtype=op.dtype)
    for b in range(L // P):
        # ring blocks and the current block are adjacent in memory, so the
        # chained concatenation is a view
        ring = C[b * P : (b + R + 1) * P]
        if ScanMode(mode) is ScanMode.TREE:
            X = lanes.ending_windows(ring, w, mode)[R * P :]
        else:
            X = np.array(lanes.term(_lanes.extract(ring, R * P, P), w - 1), copy=True)
            for k in range(1, w):
                X = lanes.fold(X, _lanes.extract(ring, R * P - k, P), w - 1 - k, left=True)
        out[b * P : (b + 1) * P] = X
    return _gather(out, p.n_out, p.xs.shape[1:])


ALGORITHMS = {
    "scalar_input": scalar_input,
    "vector_input": vector_input,
    "ping_pong": ping_pong,
    "vector_slide": vector_slide,
}


def max_window(algo: str, P: int) -> int | None:
    """Largest window an algorithm accepts at lane width ``P`` (None: unbounded)."""
    return {"scalar_input": P - 1, "vector_input": P - 1, "ping_pong": P}.get(algo)


def run(algo: str, p: SlidingProblem, P: int, mode=ScanMode.SEQUENTIAL, **kw) -> np.ndarray:
    """Dispatch by name; ``vector_input_tree`` selects tree mode."""
    if algo.endswith("_tree"):
        algo, mode = algo[: -len("_tree")], ScanMode.TREE
    if algo not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algo!r}")
    fn = ALGORITHMS[algo]
    if fn is scalar_input:
        return fn(p, P, **kw)
    return fn(p, P, mode, **kw)
