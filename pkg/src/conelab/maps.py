"""Order-preserving, homogeneous-of-degree-one maps on cone interiors.

Every variant implements three evaluation paths:

* ``apply(x)`` on interior points, plain numpy, no validation (used in loops);
* ``apply_extended(z)`` on [0, INF]^n using the conventions of
  :mod:`conelab.extended` (only where ``supports_extended`` is true);
* ``jacobian(x)`` at interior points, used by Newton corrections. For the
  piecewise-linear variants this is the Jacobian of the active piece.

The public entry points :func:`evaluate` and :func:`evaluate_extended` add
domain checks on top.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import cone as _cone
from .cone import ConeSpec
from .errors import DimensionError, DomainError, UnsupportedMapError
from .extended import (ExtendedVector, ext_matvec, ext_maxtimes, ext_mintimes,
                       reciprocal)

__all__ = [
    "MapSpec", "Matrix", "MaxTimes", "MinTimes", "DAD", "Perturbed", "Conjugated",
    "Composed", "identity", "evaluate", "evaluate_extended", "conjugate", "perturb",
    "compose", "validate_self_map", "map_from_json", "iterate",
]


def _matrix(A, name="A", square=True) -> np.ndarray:
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.size == 0:
        raise DimensionError(f"{name} must be a nonempty 2-d array")
    if square and A.shape[0] != A.shape[1]:
        raise DimensionError(f"{name} must be square, got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DomainError(f"{name} has non-finite entries")
    A.setflags(write=False)
    return A


def _nonneg(A, name="A"):
    if np.any(A < 0):
        raise DomainError(f"{name} must be entrywise nonnegative")


def _rows_nonzero(A, name="A"):
    if np.any(~(A != 0).any(axis=1)):
        raise DomainError(f"every row of {name} must have a nonzero entry")


def _cols_nonzero(A, name="A"):
    if np.any(~(A != 0).any(axis=0)):
        raise DomainError(f"every column of {name} must have a nonzero entry")


class MapSpec:
    """Base class; concrete variants are frozen dataclasses below."""

    standard_only = True

    @property
    def dim(self) -> int:
        raise NotImplementedError

    @property
    def supports_extended(self) -> bool:
        return False

    def apply(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def apply_extended(self, z: ExtendedVector) -> ExtendedVector:
        raise UnsupportedMapError(f"{type(self).__name__} has no extension to [0, INF]^n")

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    def __call__(self, x):
        return evaluate(self, x)


@dataclass(frozen=True, eq=False)
class Matrix(MapSpec):
    """Linear map ``x -> A x``."""

    A: np.ndarray
    standard_only = False

    def __post_init__(self):
        A = _matrix(self.A)
        _rows_nonzero(A)
        _cols_nonzero(A)
        object.__setattr__(self, "A", A)

    @property
    def dim(self):
        return self.A.shape[0]

    @property
    def supports_extended(self):
        return bool(np.all(self.A >= 0))

    def apply(self, x):
        return self.A @ x

    def apply_extended(self, z):
        if not self.supports_extended:
            super().apply_extended(z)
        return ext_matvec(self.A, z)

    def jacobian(self, x):
        return np.array(self.A)

    def to_json(self):
        return {"variant": "matrix", "A": self.A.tolist()}


@dataclass(frozen=True, eq=False)
class MaxTimes(MapSpec):
    """``x -> (max_j a_ij x_j)_i``."""

    A: np.ndarray

    def __post_init__(self):
        A = _matrix(self.A)
        _nonneg(A)
        _rows_nonzero(A)
        object.__setattr__(self, "A", A)

    @property
    def dim(self):
        return self.A.shape[0]

    @property
    def supports_extended(self):
        return True

    def apply(self, x):
        return (self.A * x[None, :]).max(axis=1)

    def apply_extended(self, z):
        return ext_maxtimes(self.A, z)

    def jacobian(self, x):
        idx = np.argmax(self.A * x[None, :], axis=1)
        J = np.zeros_like(self.A)
        J[np.arange(self.dim), idx] = self.A[np.arange(self.dim), idx]
        return J

    def to_json(self):
        return {"variant": "max_times", "A": self.A.tolist()}


@dataclass(frozen=True, eq=False)
class MinTimes(MapSpec):
    """``x -> (min_j a_ij x_j)_i`` with strictly positive A."""

    A: np.ndarray

    def __post_init__(self):
        A = _matrix(self.A)
        if np.any(A <= 0):
            raise DomainError("min-times maps need a strictly positive matrix")
        object.__setattr__(self, "A", A)

    @property
    def dim(self):
        return self.A.shape[0]

    @property
    def supports_extended(self):
        return True

    def apply(self, x):
        return (self.A * x[None, :]).min(axis=1)

    def apply_extended(self, z):
        return ext_mintimes(self.A, z)

    def jacobian(self, x):
        idx = np.argmin(self.A * x[None, :], axis=1)
        J = np.zeros_like(self.A)
        J[np.arange(self.dim), idx] = self.A[np.arange(self.dim), idx]
        return J

    def to_json(self):
        return {"variant": "min_times", "A": self.A.tolist()}


@dataclass(frozen=True, eq=False)
class DAD(MapSpec):
    """The DAD map ``x -> L A^T L A x`` of an m-by-n nonnegative matrix, on R^n_+."""

    A: np.ndarray

    def __post_init__(self):
        A = _matrix(self.A, square=False)
        _nonneg(A)
        _rows_nonzero(A)
        _cols_nonzero(A)
        object.__setattr__(self, "A", A)

    @property
    def dim(self):
        return self.A.shape[1]

    @property
    def supports_extended(self):
        return True

    def apply(self, x):
        return 1.0 / (self.A.T @ (1.0 / (self.A @ x)))

    def apply_extended(self, z):
        u = reciprocal(ext_matvec(self.A, z))
        return reciprocal(ext_matvec(self.A.T, u))

    def jacobian(self, x):
        s = self.A @ x
        t = self.A.T @ (1.0 / s)
        # d(1/t) = -dt/t^2 and dt = -A^T diag(1/s^2) A dx
        return (self.A.T / t[:, None] ** 2) @ (self.A / s[:, None] ** 2)

    def to_json(self):
        return {"variant": "dad", "A": self.A.tolist()}


@dataclass(frozen=True, eq=False)
class Perturbed(MapSpec):
    """``x -> f(x) + eps <x, v> x0``."""

    base: MapSpec
    eps: float
    v: np.ndarray
    x0: np.ndarray
    standard_only = False

    def __post_init__(self):
        eps = float(self.eps)
        if not (eps > 0 and np.isfinite(eps)):
            raise DomainError("eps must be a finite positive number")
        v = np.array(self.v, dtype=float)
        x0 = np.array(self.x0, dtype=float)
        n = self.base.dim
        if v.shape != (n,) or x0.shape != (n,):
            raise DimensionError(f"v and x0 must have length {n}")
        v.setflags(write=False)
        x0.setflags(write=False)
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "standard_only", self.base.standard_only)

    @property
    def dim(self):
        return self.base.dim

    @property
    def supports_extended(self):
        return self.base.supports_extended

    def apply(self, x):
        return self.base.apply(x) + self.eps * float(self.v @ x) * self.x0

    def apply_extended(self, z):
        if not z.is_finite():
            raise DomainError("<x, v> is INF for inputs with INF entries")
        fz = self.base.apply_extended(z)
        if not fz.is_finite():
            raise DomainError("base map produced INF entries")
        return ExtendedVector.from_array(fz.values + self.eps * float(self.v @ z.values) * self.x0)

    def jacobian(self, x):
        return self.base.jacobian(x) + self.eps * np.outer(self.x0, self.v)

    def to_json(self):
        return {"variant": "perturbed", "base": self.base.to_json(), "eps": self.eps,
                "v": self.v.tolist(), "x0": self.x0.tolist()}


@dataclass(frozen=True, eq=False)
class Conjugated(MapSpec):
    """``L o f o L`` for a map f with an extension to [0, INF]^n."""

    base: MapSpec

    def __post_init__(self):
        if not self.base.supports_extended:
            raise UnsupportedMapError("conjugation needs a base map with an extension")

    @property
    def dim(self):
        return self.base.dim

    @property
    def supports_extended(self):
        return True

    def apply(self, x):
        return 1.0 / self.base.apply(1.0 / x)

    def apply_extended(self, z):
        if z.is_interior():
            # same rounding as apply(); the reciprocal cache would skip a step
            return ExtendedVector.from_array(self.apply(z.values))
        return reciprocal(self.base.apply_extended(reciprocal(z)))

    def jacobian(self, x):
        u = 1.0 / x
        fu = self.base.apply(u)
        return (self.base.jacobian(u) / fu[:, None] ** 2) * (u ** 2)[None, :]

    def to_json(self):
        return {"variant": "conjugated", "base": self.base.to_json()}


@dataclass(frozen=True, eq=False)
class Composed(MapSpec):
    """``second o first``."""

    first: MapSpec
    second: MapSpec

    def __post_init__(self):
        if self.first.dim != self.second.dim:
            raise DimensionError("composed maps must share a dimension")
        object.__setattr__(self, "standard_only",
                           self.first.standard_only or self.second.standard_only)

    @property
    def dim(self):
        return self.first.dim

    @property
    def supports_extended(self):
        return self.first.supports_extended and self.second.supports_extended

    def apply(self, x):
        return self.second.apply(self.first.apply(x))

    def apply_extended(self, z):
        return self.second.apply_extended(self.first.apply_extended(z))

    def jacobian(self, x):
        return self.second.jacobian(self.first.apply(x)) @ self.first.jacobian(x)

    def to_json(self):
        return {"variant": "composed", "first": self.first.to_json(),
                "second": self.second.to_json()}


def identity(n: int) -> Matrix:
    return Matrix(np.eye(n))


# -- public operations ---------------------------------------------------------


def _default_cone(f: MapSpec, c: Optional[ConeSpec]) -> ConeSpec:
    if c is None:
        return _cone.standard(f.dim)
    if c.dim != f.dim:
        raise DimensionError(f"map acts on R^{f.dim}, cone lives in R^{c.dim}")
    return c


def evaluate(f: MapSpec, x, c: Optional[ConeSpec] = None) -> np.ndarray:
    """Evaluate f at an interior point and check the image is interior too."""
    c = _default_cone(f, c)
    x = np.asarray(x, dtype=float)
    if x.shape != (f.dim,):
        raise DimensionError(f"expected a vector of length {f.dim}, got shape {x.shape}")
    if not _cone.in_interior(c, x):
        raise DomainError("x is not in the interior of the cone")
    y = f.apply(x)
    if not _cone.in_interior(c, y):
        raise DomainError("f(x) left the interior: the map is not a self-map of int C")
    return y


def evaluate_extended(f: MapSpec, z) -> ExtendedVector:
    """Evaluate the continuous extension of f on (0, INF]^n."""
    if not isinstance(z, ExtendedVector):
        z = ExtendedVector(z)
    if len(z) != f.dim:
        raise DimensionError(f"expected {f.dim} entries, got {len(z)}")
    if not f.supports_extended:
        raise UnsupportedMapError(f"{type(f).__name__} has no extension to (0, INF]^n")
    if z.has_zero():
        raise DomainError("evaluate_extended needs entries in (0, INF]")
    return f.apply_extended(z)


def conjugate(f: MapSpec) -> Conjugated:
    return Conjugated(f)


def compose(first: MapSpec, second: MapSpec) -> Composed:
    return Composed(first, second)


def perturb(f: MapSpec, eps: float, v, x0, c: Optional[ConeSpec] = None) -> Perturbed:
    """Return ``f_eps(x) = f(x) + eps <x, v> x0`` after checking v and x0."""
    c = _default_cone(f, c)
    if not float(eps) > 0:
        raise DomainError("eps must be positive")
    if not _cone.in_interior(_cone.dual(c), v):
        raise DomainError("v must lie in the interior of the dual cone")
    if not _cone.in_interior(c, x0):
        raise DomainError("x0 must lie in the interior of the cone")
    return Perturbed(f, eps, v, x0)


def validate_self_map(f: MapSpec, c: ConeSpec) -> None:
    """Raise unless f is a supported self-map of int C.

    For the standard cone the entrywise conditions of each variant suffice.
    On a polyhedral cone only linear maps (and perturbations/compositions of
    them) are supported; ``A`` must send every generator into C and no facet
    may vanish on the whole image.
    """
    if f.dim != c.dim:
        raise DimensionError(f"map acts on R^{f.dim}, cone lives in R^{c.dim}")
    if c.is_standard:
        if isinstance(f, Matrix):
            _nonneg(f.A)
        elif isinstance(f, (Perturbed, Conjugated)):
            validate_self_map(f.base, c)
        elif isinstance(f, Composed):
            validate_self_map(f.first, c)
            validate_self_map(f.second, c)
        if isinstance(f, Perturbed):
            if not (_cone.in_interior(c, f.v) and _cone.in_interior(c, f.x0)):
                raise DomainError("perturbation vectors must be interior")
        return
    if f.standard_only:
        raise UnsupportedMapError(f"{type(f).__name__} is only defined on the standard cone")
    if isinstance(f, Matrix):
        img = c.facet_normals @ f.A @ c.generators.T
        scale = np.abs(img).max()
        if np.any(img < -c.tol * max(scale, 1.0)):
            raise DomainError("the matrix does not map the cone into itself")
        if np.any(img.max(axis=1) <= c.tol * max(scale, 1.0)):
            raise DomainError("the matrix maps the cone into a face")
    elif isinstance(f, Perturbed):
        validate_self_map(f.base, c)
        if not _cone.in_interior(_cone.dual(c), f.v) or not _cone.in_interior(c, f.x0):
            raise DomainError("perturbation vectors must be interior")
    elif isinstance(f, Composed):
        validate_self_map(f.first, c)
        validate_self_map(f.second, c)


def iterate(f: MapSpec, x: np.ndarray, k: int) -> np.ndarray:
    for _ in range(k):
        x = f.apply(x)
    return x


def map_from_json(data: dict) -> MapSpec:
    variant = data.get("variant")
    if variant == "matrix":
        return Matrix(data["A"])
    if variant == "max_times":
        return MaxTimes(data["A"])
    if variant == "min_times":
        return MinTimes(data["A"])
    if variant == "dad":
        return DAD(data["A"])
    if variant == "perturbed":
        return Perturbed(map_from_json(data["base"]), data["eps"], data["v"], data["x0"])
    if variant == "conjugated":
        return Conjugated(map_from_json(data["base"]))
    if variant == "composed":
        return Composed(map_from_json(data["first"]), map_from_json(data["second"]))
    if variant == "identity":
        return identity(int(data["dim"]))
    raise UnsupportedMapError(f"unknown map variant {variant!r}")
