"""Associative operators with identity, and the (u, v) pair operator.

Every operator works elementwise on numpy arrays (with broadcasting), so the
same object serves scalar calls, lane blocks and whole sequences.  Pair
elements live in a structured dtype with fields ``u`` and ``v``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

KINDS = {"i64": np.dtype(np.int64), "f32": np.dtype(np.float32), "f64": np.dtype(np.float64)}


def gamma_dtype(kind: str = "f64") -> np.dtype:
    base = KINDS[kind]
    return np.dtype([("u", base), ("v", base)])


@dataclass
class OpCounter:
    """Instrumentation for combine work.

    ``combine_count`` counts element-level applications of the operator,
    ``block_op_count`` counts lane-block combines (one per block in a batch)
    and ``level_count`` is the deepest tree seen since the last reset.
    """

    combine_count: int = 0
    level_count: int = 0
    block_op_count: int = 0

    def reset(self) -> None:
        self.combine_count = 0
        self.level_count = 0
        self.block_op_count = 0

    def levels(self, depth: int) -> None:
        self.level_count = max(self.level_count, depth)


@dataclass(frozen=True)
class Operator:
    name: str
    kind: str
    identity: object
    is_commutative: bool
    is_exact: bool
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray] = field(repr=False, compare=False)
    ufunc: np.ufunc | None = field(default=None, repr=False, compare=False)

    @property
    def key(self) -> str:
        return f"{self.name}:{self.kind}"

    @property
    def dtype(self) -> np.dtype:
        if self.name == "gamma":
            return gamma_dtype(self.kind)
        return KINDS[self.kind]

    def __call__(self, a, b):
        return self.fn(a, b)

    def full(self, shape, fill=None) -> np.ndarray:
        """Array of ``shape`` filled with the identity (or ``fill``)."""
        out = np.empty(shape, dtype=self.dtype)
        out[...] = self.identity if fill is None else fill
        return out

    def asarray(self, xs) -> np.ndarray:
        if self.name == "gamma" and not isinstance(xs, np.ndarray):
            items = [(g.u, g.v) if isinstance(g, GammaPair) else tuple(g) for g in xs]
            return np.array(items, dtype=self.dtype)
        arr = np.asarray(xs)
        if arr.size == 0 and self.name != "gamma":
            return arr.astype(self.dtype)
        if arr.dtype != self.dtype:
            if self.name == "gamma" or arr.dtype.kind not in "iuf" or (
                arr.dtype.kind == "f" and self.kind == "i64"
            ):
                raise TypeError(f"cannot use {arr.dtype} elements with operator {self.key}")
            arr = arr.astype(self.dtype)
        return arr


def _gamma(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    au, av, bu, bv = a["u"], a["v"], b["u"], b["v"]
    out = np.empty(np.broadcast_shapes(a.shape, b.shape), dtype=a.dtype)
    out["u"] = au * bu
    out["v"] = bu * av + bv
    return out


def _make(name: str, kind: str) -> Operator:
    dt = KINDS[kind]
    floating = kind != "i64"
    if name == "add":
        return Operator(name, kind, dt.type(0), True, not floating, np.add, np.add)
    if name == "min":
        ident = dt.type(np.inf) if floating else np.iinfo(dt).max
        return Operator(name, kind, ident, True, True, np.minimum, np.minimum)
    if name == "max":
        ident = dt.type(-np.inf) if floating else np.iinfo(dt).min
        return Operator(name, kind, ident, True, True, np.maximum, np.maximum)
    if name == "gamma":
        if not floating:
            raise ValueError("gamma pairs need a floating element kind")
        ident = np.array((1, 0), dtype=gamma_dtype(kind))[()]
        return Operator(name, kind, ident, False, False, _gamma)
    raise ValueError(f"unknown operator {name!r}")


OPERATORS: dict[str, Operator] = {
    f"{n}:{k}": _make(n, k)
    for n in ("add", "min", "max")
    for k in ("i64", "f32", "f64")
}
OPERATORS["gamma:f64"] = _make("gamma", "f64")
OPERATORS["gamma:f32"] = _make("gamma", "f32")


def get_operator(name: str, kind: str = "f64") -> Operator:
    """Look up an operator by ``name`` and element ``kind`` (``"add:i64"`` also works)."""
    if ":" in name:
        name, kind = name.split(":")
    try:
        return OPERATORS[f"{name}:{kind}"]
    except KeyError:
        raise ValueError(f"no operator {name}:{kind}") from None


def _element_kind(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        raise TypeError("booleans are not elements")
    if isinstance(x, np.generic):
        pass
    elif isinstance(x, int):
        return "int"
    elif isinstance(x, float):
        return "float"
    arr = np.asarray(x)
    if arr.dtype.kind in "iu":
        return f"i{arr.dtype.itemsize * 8}"
    if arr.dtype.kind == "f":
        return f"f{arr.dtype.itemsize * 8}"
    raise TypeError(f"unsupported element {x!r}")


def _compatible(elem: str, kind: str) -> bool:
    if elem == "int":
        return True
    if elem == "float":
        return kind != "i64"
    return elem == kind


def combine(op: Operator, a, b):
    """Return ``a (+) b`` for scalar elements of ``op``'s kind.

    Mixing element kinds (e.g. a float with an integer operator, or an f32
    with an f64) raises ``TypeError`` before anything is computed.
    """
    if op.name == "gamma":
        g1, g2 = _as_pair(a), _as_pair(b)
        return gamma_combine(g1, g2)
    ka, kb = _element_kind(a), _element_kind(b)
    if not (_compatible(ka, op.kind) and _compatible(kb, op.kind)):
        raise TypeError(f"element kinds {ka}/{kb} do not match operator {op.key}")
    if ka != kb and "int" not in (ka, kb) and "float" not in (ka, kb):
        raise TypeError(f"element kinds {ka} and {kb} differ")
    dt = op.dtype
    return op.fn(dt.type(a), dt.type(b))


@dataclass(frozen=True)
class GammaPair:
    """Element of the linear-recurrence operator: carry factor ``u``, accumulator ``v``."""

    u: float
    v: float


GAMMA_IDENTITY = GammaPair(1.0, 0.0)


def _as_pair(g) -> GammaPair:
    if isinstance(g, GammaPair):
        return g
    if isinstance(g, np.void):
        return GammaPair(float(g["u"]), float(g["v"]))
    u, v = g
    return GammaPair(float(u), float(v))


def gamma_combine(g1: GammaPair, g2: GammaPair) -> GammaPair:
    """``(u1, v1) (+) (u2, v2) = (u1*u2, u2*v1 + v2)``.  Not commutative."""
    return GammaPair(g1.u * g2.u, g2.u * g1.v + g2.v)


def gamma_from(a: float, b: float, index: int, M: int, a_prev: float = 1.0) -> GammaPair:
    """Build the pair at position ``index`` (0..M) of a length-``M`` dot product.

    ``a`` and ``b`` are the raw coefficients at ``index``; ``a_prev`` is the
    already-masked coefficient at ``index - 1``.  A coefficient equal to 0.0
    is masked to 1 and its partner ``b`` to 0, so no ratio divides by zero.
    """
    if not 0 <= index <= M:
        raise ValueError(f"index {index} outside 0..{M}")
    if index == M:
        return GammaPair(float(a_prev), 0.0)
    alpha, beta = (1.0, 0.0) if a == 0.0 else (float(a), float(b))
    if index == 0:
        return GammaPair(1.0, beta)
    return GammaPair(float(a_prev) / alpha, beta)


def mask_coefficients(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized coefficient masking: alpha = 1, beta = 0 wherever a == 0."""
    a = np.asarray(a)
    zero = a == 0
    alpha = np.where(zero, np.ones_like(a), a)
    beta = np.where(zero, np.zeros_like(b), b)
    return alpha, beta


def gamma_carries(alpha: np.ndarray) -> np.ndarray:
    """The ``M + 1`` carry factors for masked coefficients ``alpha``."""
    alpha = np.asarray(alpha)
    u = np.empty(alpha.shape[0] + 1, dtype=alpha.dtype)
    u[0] = 1
    u[1:-1] = alpha[:-1] / alpha[1:]
    u[-1] = alpha[-1]
    return u


def gamma_sequence(a, b, kind: str = "f64") -> np.ndarray:
    """Structured array of the ``M + 1`` pairs whose reduction yields ``a . b``."""
    dt = KINDS[kind]
    alpha, beta = mask_coefficients(np.asarray(a, dtype=dt), np.asarray(b, dtype=dt))
    out = np.empty(alpha.shape[0] + 1, dtype=gamma_dtype(kind))
    out["u"] = gamma_carries(alpha)
    out["v"][:-1] = beta
    out["v"][-1] = 0
    return out


# --- tolerances -----------------------------------------------------------

RTOL = {"f32": 1e-5, "f64": 1e-12}
ATOL = {"f32": 1e-6, "f64": 1e-14}


def _close(actual: np.ndarray, expected: np.ndarray, rtol: float, atol: float) -> bool:
    actual = np.asarray(actual, dtype=np.float64)
    expected = np.asarray(expected, dtype=np.float64)
    if actual.shape != expected.shape:
        return False
    if actual.size == 0:
        return True
    # Reassociated sums err in proportion to the magnitude of the partial sums,
    # so the absolute floor scales with the largest expected value.
    floor = max(atol, rtol * float(np.max(np.abs(expected))))
    return bool(np.all(np.abs(actual - expected) <= np.maximum(rtol * np.abs(expected), floor)))


def outputs_match(op: Operator, actual: np.ndarray, expected: np.ndarray) -> bool:
    """Exact equality for exact operators, tolerance comparison otherwise."""
    actual = np.asarray(actual)
    expected = np.asarray(expected)
    if op.is_exact:
        return actual.shape == expected.shape and bool(np.array_equal(actual, expected))
    rtol, atol = RTOL[op.kind], ATOL[op.kind]
    if op.name == "gamma":
        return _close(actual["u"], expected["u"], rtol, atol) and _close(
            actual["v"], expected["v"], rtol, atol
        )
    return _close(actual, expected, rtol, atol)


def allclose(actual, expected, kind: str = "f64") -> bool:
    return _close(actual, expected, RTOL[kind], ATOL[kind])
