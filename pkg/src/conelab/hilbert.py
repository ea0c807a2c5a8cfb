"""Hilbert's projective metric on the interior of a polyhedral cone."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import cone as _cone
from .cone import ConeSpec
from .errors import DomainError

__all__ = ["ProjectiveDistance", "hilbert_mM", "hilbert_distance", "max_scale_inside",
           "PROJECTIVE_EQUALITY"]

PROJECTIVE_EQUALITY = 1e-10


@dataclass(frozen=True)
class ProjectiveDistance:
    """``m = sup{a : a x <= y}``, ``M = inf{b : y <= b x}``, ``d = log(M / m)``."""

    m: float
    M: float
    d: float

    @property
    def projectively_equal(self) -> bool:
        return self.d < PROJECTIVE_EQUALITY


def _ratios(c: ConeSpec, x, y) -> np.ndarray:
    fx = _cone.facet_values(c, x)
    fy = _cone.facet_values(c, y)
    if np.any(fx <= c.tol) or np.any(fy <= c.tol):
        raise DomainError("both points must lie in the interior of the cone")
    return fy / fx


def hilbert_mM(c: ConeSpec, x, y) -> ProjectiveDistance:
    r = _ratios(c, x, y)
    m, M = float(r.min()), float(r.max())
    return ProjectiveDistance(m, M, max(math.log(M / m), 0.0))


def hilbert_distance(c: ConeSpec, x, y) -> float:
    return hilbert_mM(c, x, y).d


def max_scale_inside(c: ConeSpec, x, y) -> float:
    """Largest lam with ``x - lam * y`` in C, for interior x and nonzero y in C."""
    fx = _cone.facet_values(c, x)
    fy = _cone.facet_values(c, y)
    if np.any(fx <= c.tol):
        raise DomainError("x must lie in the interior of the cone")
    if np.any(fy < -c.tol) or not np.any(np.asarray(y) != 0):
        raise DomainError("y must be a nonzero element of the cone")
    active = fy > 0
    if not active.any():
        raise DomainError("y is annihilated by every facet normal")
    return float(np.min(fx[active] / fy[active]))
