"""Arithmetic on the extended half-line [0, INF] and on vectors over it.

INF is a symbolic tag, not ``float('inf')``. IEEE arithmetic would turn a
zero coefficient times infinity into NaN; the helpers here apply the rule
"a zero coefficient contributes nothing" on purpose instead.

Vectors keep two arrays: the finite values (0.0 placeholder where the entry is
INF) and a boolean mask marking the INF entries.
"""

from __future__ import annotations

import enum
import math
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DimensionError, DomainError

__all__ = [
    "INF",
    "ExtScalar",
    "ExtendedVector",
    "Ordering",
    "reciprocal",
    "ext_compare",
    "ext_mul",
    "ext_add",
    "ext_matvec",
    "ext_maxtimes",
    "ext_mintimes",
]


class _Infinity:
    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("conelab.INF")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True


INF = _Infinity()
ExtScalar = Union[float, _Infinity]


def _coerce_scalar(value) -> ExtScalar:
    if value is INF:
        return INF
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "infinity"):
            return INF
        raise DomainError(f"cannot parse extended scalar {value!r}")
    v = float(value)
    if math.isnan(v):
        raise DomainError("NaN is not an extended nonnegative real")
    if v == math.inf:
        return INF
    if v < 0:
        raise DomainError(f"negative value {v} is not in [0, INF]")
    return v


def ext_mul(a: float, s: ExtScalar) -> ExtScalar:
    """Coefficient times extended scalar, with ``0 * INF = 0``."""
    if a < 0:
        raise DomainError("coefficients must be nonnegative")
    if s is INF:
        return INF if a > 0 else 0.0
    return a * s


def ext_add(s: ExtScalar, t: ExtScalar) -> ExtScalar:
    if s is INF or t is INF:
        return INF
    return s + t


class Ordering(enum.Enum):
    LE = "LE"
    GE = "GE"
    EQ = "EQ"
    INCOMPARABLE = "INCOMPARABLE"


class ExtendedVector:
    """Immutable point of [0, INF]^n."""

    __slots__ = ("_values", "_inf", "_partner")

    def __init__(self, entries: Iterable):
        parsed = [_coerce_scalar(e) for e in entries]
        if not parsed:
            raise DimensionError("extended vectors need at least one entry")
        mask = np.array([e is INF for e in parsed], dtype=bool)
        vals = np.array([0.0 if e is INF else e for e in parsed], dtype=float)
        self._init(vals, mask)

    def _init(self, values: np.ndarray, inf_mask: np.ndarray):
        values = np.where(inf_mask, 0.0, values)
        values.setflags(write=False)
        inf_mask.setflags(write=False)
        self._values = values
        self._inf = inf_mask
        self._partner = None

    @classmethod
    def from_parts(cls, values, inf_mask) -> "ExtendedVector":
        values = np.array(values, dtype=float)
        inf_mask = np.array(inf_mask, dtype=bool)
        if values.ndim != 1 or values.shape != inf_mask.shape or values.size == 0:
            raise DimensionError("values and inf_mask must be equal-length 1-d arrays")
        fin = values[~inf_mask]
        if np.any(np.isnan(fin)) or np.any(fin < 0) or np.any(np.isinf(fin)):
            raise DomainError("finite entries must be nonnegative real numbers")
        out = cls.__new__(cls)
        out._init(values, inf_mask)
        return out

    @classmethod
    def from_array(cls, x) -> "ExtendedVector":
        x = np.asarray(x, dtype=float)
        return cls.from_parts(x, np.zeros(x.shape, dtype=bool))

    # -- views -------------------------------------------------------------

    @property
    def values(self) -> np.ndarray:
        """Finite values; INF positions hold 0.0."""
        return self._values

    @property
    def inf_mask(self) -> np.ndarray:
        return self._inf

    @property
    def entries(self) -> list:
        return [INF if m else float(v) for v, m in zip(self._values, self._inf)]

    def __len__(self):
        return self._values.size

    def __getitem__(self, i) -> ExtScalar:
        return INF if self._inf[i] else float(self._values[i])

    def __iter__(self):
        return iter(self.entries)

    def __eq__(self, other):
        if not isinstance(other, ExtendedVector):
            return NotImplemented
        return (
            len(self) == len(other)
            and bool(np.array_equal(self._inf, other._inf))
            and bool(np.array_equal(self._values, other._values))
        )

    def __hash__(self):
        return hash((self._inf.tobytes(), self._values.tobytes()))

    def __repr__(self):
        inner = ", ".join("INF" if e is INF else repr(e) for e in self.entries)
        return f"ExtendedVector([{inner}])"

    # -- predicates ----------------------------------------------------------

    def is_interior(self) -> bool:
        return not self._inf.any() and bool(np.all(self._values > 0))

    def is_formal_candidate(self) -> bool:
        """At least one finite entry."""
        return not bool(self._inf.all())

    def has_zero(self) -> bool:
        return bool(np.any((self._values == 0) & ~self._inf))

    def is_finite(self) -> bool:
        return not self._inf.any()

    # -- arithmetic ------------------------------------------------------------

    def scale(self, lam: float) -> "ExtendedVector":
        """Multiply by a finite positive scalar; INF entries stay INF."""
        lam = float(lam)
        if not (lam > 0 and math.isfinite(lam)):
            raise DomainError("scale factor must be finite and positive")
        return ExtendedVector.from_parts(self._values * lam, self._inf.copy())

    def to_array(self) -> np.ndarray:
        if self._inf.any():
            raise DomainError("vector has INF entries")
        return np.array(self._values)

    def to_json(self) -> list:
        return ["inf" if e is INF else e for e in self.entries]

    @classmethod
    def from_json(cls, data: Sequence) -> "ExtendedVector":
        return cls(data)


def reciprocal(x: ExtendedVector) -> ExtendedVector:
    """Entrywise reciprocal with 0 <-> INF; an order-reversing involution."""
    if x._partner is not None:
        return x._partner
    zero = (x.values == 0) & ~x.inf_mask
    vals = np.zeros(len(x))
    pos = ~zero & ~x.inf_mask
    with np.errstate(over="ignore"):
        vals[pos] = 1.0 / x.values[pos]
    # subnormal entries overflow; their reciprocal is INF like that of 0
    over = np.isinf(vals)
    vals[over] = 0.0
    out = ExtendedVector.from_parts(vals, zero | over)
    # keep the exact preimage so that L(L(x)) is x bit-for-bit
    out._partner = x
    return out


def _check_len(x: ExtendedVector, y: ExtendedVector):
    if len(x) != len(y):
        raise DimensionError(f"length mismatch: {len(x)} vs {len(y)}")


def ext_compare(x: ExtendedVector, y: ExtendedVector) -> Ordering:
    _check_len(x, y)
    xi, yi = x.inf_mask, y.inf_mask
    both_fin = ~xi & ~yi
    le = np.where(both_fin, x.values <= y.values, yi)
    ge = np.where(both_fin, x.values >= y.values, xi)
    if le.all() and ge.all():
        return Ordering.EQ
    if le.all():
        return Ordering.LE
    if ge.all():
        return Ordering.GE
    return Ordering.INCOMPARABLE


def _hits_inf(A: np.ndarray, x: ExtendedVector) -> np.ndarray:
    """Rows with a positive coefficient on some INF entry of x."""
    return ((A > 0) & x.inf_mask[None, :]).any(axis=1)


def ext_matvec(A: np.ndarray, x: ExtendedVector) -> ExtendedVector:
    """``A x`` over [0, INF] for a nonnegative matrix A."""
    A = np.asarray(A, dtype=float)
    if A.shape[1] != len(x):
        raise DimensionError(f"matrix has {A.shape[1]} columns, vector has {len(x)} entries")
    return ExtendedVector.from_parts(A @ x.values, _hits_inf(A, x))


def ext_maxtimes(A: np.ndarray, x: ExtendedVector) -> ExtendedVector:
    """``max_j a_ij x_j`` over [0, INF]; zero coefficients contribute 0."""
    A = np.asarray(A, dtype=float)
    if A.shape[1] != len(x):
        raise DimensionError(f"matrix has {A.shape[1]} columns, vector has {len(x)} entries")
    return ExtendedVector.from_parts((A * x.values[None, :]).max(axis=1), _hits_inf(A, x))


def ext_mintimes(A: np.ndarray, x: ExtendedVector) -> ExtendedVector:
    """``min_j a_ij x_j`` over [0, INF] for strictly positive A."""
    A = np.asarray(A, dtype=float)
    if A.shape[1] != len(x):
        raise DimensionError(f"matrix has {A.shape[1]} columns, vector has {len(x)} entries")
    prod = np.where(x.inf_mask[None, :], np.inf, A * x.values[None, :])
    vals = prod.min(axis=1)
    mask = np.isinf(vals)
    return ExtendedVector.from_parts(np.where(mask, 0.0, vals), mask)
