"""Proper closed polyhedral cones, their duals and the induced partial order.

A :class:`ConeSpec` carries both descriptions of a polyhedral cone: generators
(the cone is their nonnegative hull) and facet normals (the cone is the
intersection of the half-spaces ``<x, w> >= 0``). The facet normals are the
extreme rays of the dual cone, which is what the weak-upper-bound construction
needs. Converting one description into the other is not attempted; callers
supply both and the constructor checks that they agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import ConeError, DimensionError

__all__ = ["ConeSpec", "Ray", "standard", "polyhedral", "contains", "in_interior",
           "leq", "dual", "extreme_rays_dual"]

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class Ray:
    direction: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        nrm = np.linalg.norm(d)
        if nrm == 0 or not np.isfinite(nrm):
            raise ConeError("a ray needs a finite nonzero direction")
        d = d / nrm
        d.setflags(write=False)
        object.__setattr__(self, "direction", d)

    def __eq__(self, other):
        return isinstance(other, Ray) and np.array_equal(self.direction, other.direction)

    def __hash__(self):
        return hash(self.direction.tobytes())


@dataclass(frozen=True, eq=False)
class ConeSpec:
    kind: str
    dim: int
    generators: np.ndarray = field(repr=False)
    facet_normals: np.ndarray = field(repr=False)
    tol: float = DEFAULT_TOL

    @property
    def is_standard(self) -> bool:
        return self.kind == "standard"

    def __eq__(self, other):
        if not isinstance(other, ConeSpec):
            return NotImplemented
        if self.kind != other.kind or self.dim != other.dim or self.tol != other.tol:
            return False
        return (np.array_equal(self.generators, other.generators)
                and np.array_equal(self.facet_normals, other.facet_normals))

    def __hash__(self):
        return hash((self.kind, self.dim, self.generators.tobytes(),
                     self.facet_normals.tobytes(), self.tol))

    def interior_point(self) -> np.ndarray:
        """Sum of generators; lies in the interior of a proper cone."""
        return self.generators.sum(axis=0)

    def dual_interior_point(self) -> np.ndarray:
        """Sum of unit facet normals; lies in the interior of the dual cone."""
        W = self.facet_normals
        return (W / np.linalg.norm(W, axis=1, keepdims=True)).sum(axis=0)

    def to_json(self) -> dict:
        if self.is_standard:
            return {"kind": "standard", "dim": self.dim}
        return {
            "kind": "polyhedral",
            "generators": self.generators.tolist(),
            "facet_normals": self.facet_normals.tolist(),
            "tol": self.tol,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ConeSpec":
        kind = data.get("kind")
        if kind == "standard":
            return standard(int(data["dim"]), tol=float(data.get("tol", DEFAULT_TOL)))
        if kind == "polyhedral":
            return polyhedral(data["generators"], data["facet_normals"],
                              tol=float(data.get("tol", DEFAULT_TOL)))
        raise ConeError(f"unknown cone kind {kind!r}")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def standard(n: int, tol: float = DEFAULT_TOL) -> ConeSpec:
    """The nonnegative orthant R^n_+."""
    if n < 1:
        raise ConeError("dimension must be at least 1")
    eye = _frozen(np.eye(n))
    return ConeSpec("standard", n, eye, eye, tol)


def _as_matrix(rows, name: str) -> np.ndarray:
    a = np.array(rows, dtype=float)
    if a.ndim != 2 or a.shape[0] == 0 or a.shape[1] == 0:
        raise ConeError(f"{name} must be a nonempty list of vectors")
    if not np.all(np.isfinite(a)):
        raise ConeError(f"{name} must be finite")
    return a


def polyhedral(generators: Sequence, facet_normals: Sequence, tol: float = DEFAULT_TOL) -> ConeSpec:
    """Build a polyhedral cone from matching V- and H-descriptions.

    Raises :class:`ConeError` unless every generator satisfies every facet
    inequality, the facet normals admit a strictly feasible point (nonempty
    interior) and they span R^n (pointedness).
    """
    G = _as_matrix(generators, "generators")
    W = _as_matrix(facet_normals, "facet_normals")
    n = G.shape[1]
    if W.shape[1] != n:
        raise DimensionError("generators and facet normals live in different dimensions")
    if np.any(np.linalg.norm(G, axis=1) == 0) or np.any(np.linalg.norm(W, axis=1) == 0):
        raise ConeError("zero generator or zero facet normal")
    pairing = W @ G.T
    scale = np.linalg.norm(W, axis=1)[:, None] * np.linalg.norm(G, axis=1)[None, :]
    if np.any(pairing < -tol * scale):
        raise ConeError("some generator violates a facet inequality")
    if np.linalg.matrix_rank(W) < n:
        raise ConeError("facet normals do not span R^n: the cone contains a line")
    if np.linalg.matrix_rank(G) < n:
        raise ConeError("generators do not span R^n: the cone has empty interior")
    if not _strictly_feasible(W):
        raise ConeError("facet normals admit no interior point")
    return ConeSpec("polyhedral", n, _frozen(G), _frozen(W), tol)


def _strictly_feasible(W: np.ndarray) -> bool:
    # maximise t subject to W x >= t, -1 <= x <= 1, t <= 1
    k, n = W.shape
    Wn = W / np.linalg.norm(W, axis=1, keepdims=True)
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-Wn, np.ones((k, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(k),
                  bounds=[(-1, 1)] * n + [(None, 1)], method="highs")
    return bool(res.status == 0 and -res.fun > 1e-9)


def _check_dim(c: ConeSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (c.dim,):
        raise DimensionError(f"expected a vector of length {c.dim}, got shape {x.shape}")
    return x


def facet_values(c: ConeSpec, x) -> np.ndarray:
    """Inner products of x with every facet normal."""
    x = _check_dim(c, x)
    if c.is_standard:
        return x
    return c.facet_normals @ x


def contains(c: ConeSpec, x) -> bool:
    return bool(np.all(facet_values(c, x) >= -c.tol))


def in_interior(c: ConeSpec, x) -> bool:
    return bool(np.all(facet_values(c, x) > c.tol))


def leq(c: ConeSpec, x, y) -> bool:
    """Cone order: ``x <= y`` iff ``y - x`` lies in the cone."""
    x = _check_dim(c, x)
    y = _check_dim(c, y)
    return contains(c, y - x)


def dual(c: ConeSpec) -> ConeSpec:
    if c.is_standard:
        return c
    return ConeSpec("polyhedral", c.dim, c.facet_normals, c.generators, c.tol)


def extreme_rays_dual(c: ConeSpec) -> list[Ray]:
    """Unit extreme rays of the dual cone, duplicates removed, input order kept."""
    rays: list[Ray] = []
    for w in c.facet_normals:
        r = Ray(w)
        if not any(np.allclose(r.direction, q.direction, atol=1e-12, rtol=0) for q in rays):
            rays.append(r)
    return rays
