"""Cone spectral radius estimates and interior eigenvectors.

Brackets are Collatz-Wielandt style: if ``lo * x <= f(x) <= hi * x`` for an
interior x then ``lo <= rho(f) <= hi``. The same holds for ``f^p`` with
``rho(f^p) = rho(f)^p``, and the normalised power iteration gives ``f^p`` of
earlier iterates for free, so every step also tests p-step brackets for
``p <= window``. Max-times maps settle into periodic orbits on which only the
p-step bracket becomes tight.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import cone as _cone
from . import maps as _maps
from .cone import ConeSpec
from .errors import DomainError, IterationLimitError
from .hilbert import hilbert_mM
from .maps import MapSpec

__all__ = ["SpectralEstimate", "EigenResult", "collatz_bracket", "spectral_radius",
           "perturbed_eigenvector", "interior_eigenvector", "default_start",
           "default_dual_start"]

log = logging.getLogger(__name__)

WINDOW = 32
STALL_WINDOW = 100
# relative outward widening of every bracket, absorbs rounding in f and the logs
ROUNDING_SLACK = 1e-12


@dataclass(frozen=True)
class SpectralEstimate:
    rho_hat: float
    bracket_lo: float
    bracket_hi: float
    iterations: int
    witness: np.ndarray = field(repr=False)
    status: str = "converged"

    @property
    def width(self) -> float:
        return self.bracket_hi - self.bracket_lo

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.bracket_lo - slack <= value <= self.bracket_hi + slack


@dataclass(frozen=True)
class EigenResult:
    vector: np.ndarray
    value: float
    residual: float
    iterations: int = 0


def default_start(c: ConeSpec) -> np.ndarray:
    if c.is_standard:
        return np.ones(c.dim)
    return c.interior_point()


def default_dual_start(c: ConeSpec) -> np.ndarray:
    if c.is_standard:
        return np.ones(c.dim)
    return c.dual_interior_point()


def _resolve(f: MapSpec, c: Optional[ConeSpec]) -> ConeSpec:
    if c is None:
        c = _cone.standard(f.dim)
    _maps.validate_self_map(f, c)
    return c


def _facets(c: ConeSpec, x: np.ndarray) -> np.ndarray:
    return x if c.is_standard else c.facet_normals @ x


def collatz_bracket(f: MapSpec, c: Optional[ConeSpec], x) -> tuple[float, float]:
    """``(m(f(x)/x), M(f(x)/x))``; always brackets the cone spectral radius."""
    c = _resolve(f, c)
    fx = _maps.evaluate(f, x, c)
    d = hilbert_mM(c, x, fx)
    return d.m, d.M


def spectral_radius(
    f: MapSpec,
    c: Optional[ConeSpec] = None,
    x0=None,
    max_iter: int = 10_000,
    tol: float = 1e-9,
    window: int = WINDOW,
    stall_window: int = STALL_WINDOW,
) -> SpectralEstimate:
    """Normalised power iteration with a sound bracket on rho(f).

    ``rho_hat`` is the growth rate over the trailing ``window`` steps, unless
    the bracket is already tighter than ``tol`` (then its geometric centre).
    The status is ``"converged"``, ``"stalled"`` (no bracket progress for
    ``stall_window`` steps or the orbit hit the boundary numerically) or
    ``"max_iter"``.
    """
    c = _resolve(f, c)
    x = default_start(c) if x0 is None else np.array(x0, dtype=float)
    if x.shape != (c.dim,) or not _cone.in_interior(c, x):
        raise DomainError("x0 must lie in the interior of the cone")
    x = x / np.linalg.norm(x)

    standard, W = c.is_standard, c.facet_normals
    ring = window + 1
    fv = _facets(c, x)
    hist_fv = np.empty((ring, fv.size))
    hist_log = np.zeros(ring)  # log of the step norm that produced each slot
    hist_fv[0] = fv
    best_lo, best_hi = 0.0, math.inf
    best_width = math.inf
    since_progress = 0
    status = "max_iter"
    k = 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        while k < max_iter:
            y = f.apply(x)
            fy = y if standard else W @ y
            one_step = fy / fv
            lo1, hi1 = float(one_step.min()), float(one_step.max())
            # a NaN, INF or nonpositive ratio means the image left int C
            if not (lo1 > 0 and hi1 < math.inf):
                if not np.isfinite(y).all():
                    if k == 0:
                        raise DomainError("non-finite first iterate")
                    # entries underflowed on the way to the boundary
                    log.debug("non-finite iterate at step %d", k + 1)
                else:
                    log.debug("orbit reached the boundary at step %d", k + 1)
                status = "stalled"
                break
            nrm = math.sqrt(float(y @ y))
            k += 1
            x = y / nrm
            fv = fy / nrm
            slot = k % ring
            hist_fv[slot] = fv
            hist_log[slot] = math.log(nrm)

            depth = min(k, window)
            # p-step brackets are sound at any step; after a warm-up they are
            # only refreshed every few steps to keep long runs cheap
            if depth > 1 and (k <= 4 * window or k % 8 == 0):
                p = np.arange(2, depth + 1)
                prev = (k - p) % ring
                # growth over the last p steps, summed locally to keep precision
                recent = hist_log[(k - np.arange(depth)) % ring]
                growth = np.cumsum(recent)[1:]
                ratios = fv[None, :] / hist_fv[prev]
                lo1 = max(lo1, float(np.exp((np.log(ratios.min(axis=1)) + growth) / p).max()))
                hi1 = min(hi1, float(np.exp((np.log(ratios.max(axis=1)) + growth) / p).min()))
            best_lo = max(best_lo, lo1 * (1.0 - ROUNDING_SLACK))
            best_hi = min(best_hi, hi1 * (1.0 + ROUNDING_SLACK))

            width = best_hi - best_lo
            if width < best_width:
                best_width = width
                since_progress = 0
            else:
                since_progress += 1
            if width <= tol * math.sqrt(best_lo * best_hi):
                status = "converged"
                break
            if since_progress >= stall_window:
                status = "stalled"
                break

    if k == 0:
        raise DomainError("the first iterate already left the interior")
    centre = math.sqrt(best_lo * best_hi)
    if best_hi - best_lo <= tol * centre:
        rho_hat = centre
    else:
        w = min(k, window)
        rho_hat = math.exp(float(hist_log[(k - np.arange(w)) % ring].sum()) / w)
        rho_hat = min(max(rho_hat, best_lo), best_hi)
    return SpectralEstimate(rho_hat, best_lo, best_hi, k, x, status)


# -- eigenvectors ----------------------------------------------------------------


def _residual(c: ConeSpec, y: np.ndarray, Fy: np.ndarray) -> tuple[float, float, float]:
    r = _facets(c, Fy) / _facets(c, y)
    lo, hi = float(r.min()), float(r.max())
    return math.log(hi / lo), lo, hi


def _newton_direction(F: MapSpec, y: np.ndarray, Fy: np.ndarray, r: float):
    n = y.size
    try:
        J = F.jacobian(y)
    except (NotImplementedError, FloatingPointError, ZeroDivisionError):
        return None
    K = np.zeros((n + 1, n + 1))
    K[:n, :n] = J - r * np.eye(n)
    K[:n, n] = -y
    K[n, :n] = y
    rhs = np.concatenate([-(Fy - r * y), [0.0]])
    try:
        step = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError:
        return None
    d = step[:n]
    return d if np.all(np.isfinite(d)) else None


def _try_point(F: MapSpec, c: ConeSpec, cand: np.ndarray):
    if not np.all(np.isfinite(cand)) or np.any(_facets(c, cand) <= 0):
        return None
    cand = cand / np.linalg.norm(cand)
    F_cand = F.apply(cand)
    if not np.all(np.isfinite(F_cand)) or np.any(_facets(c, F_cand) <= 0):
        return None
    return _residual(c, cand, F_cand), cand, F_cand


def _solve_eigen(F: MapSpec, c: ConeSpec, start: np.ndarray, tol: float, max_iter: int,
                 newton: bool = True) -> EigenResult:
    """Power iteration on int C accelerated by damped Newton steps.

    Each step first tries the Newton correction for ``F(y) = r y`` with
    backtracking until the Hilbert residual ``d(F(y), y)`` drops; if no
    step length helps, a plain power step is taken.
    """
    y = start / np.linalg.norm(start)
    Fy = F.apply(y)
    res, lo, hi = _residual(c, y, Fy)
    it = 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        while res >= tol and it < max_iter:
            it += 1
            best = None
            if newton:
                d = _newton_direction(F, y, Fy, math.sqrt(lo * hi))
                t = 1.0
                while d is not None and t > 1e-3:
                    trial = _try_point(F, c, y + t * d)
                    if trial is not None and trial[0][0] < res:
                        best = trial
                        break
                    t *= 0.5
            if best is None:
                best = _try_point(F, c, Fy)
                if best is None:
                    raise DomainError("eigenvector iteration left the interior")
            (res, lo, hi), y, Fy = best
    if res >= tol:
        raise IterationLimitError(
            f"eigenvector iteration did not reach residual {tol:g} in {max_iter} steps",
            residual=res, iterations=it)
    return EigenResult(y, math.sqrt(lo * hi), res, it)


def perturbed_eigenvector(
    f: MapSpec,
    c: Optional[ConeSpec] = None,
    eps: float = 0.1,
    v=None,
    x0=None,
    start=None,
    tol: float = 1e-12,
    max_iter: int = 10_000,
) -> EigenResult:
    """Interior eigenvector of ``f_eps(x) = f(x) + eps <x, v> x0``.

    ``f_eps`` is a strict contraction in Hilbert's metric, so the normalised
    iteration converges; Newton corrections only speed it up. ``start``
    allows warm starts along an eps schedule (defaults to ``x0``).
    """
    c = _resolve(f, c)
    v = default_dual_start(c) if v is None else np.asarray(v, dtype=float)
    x0 = default_start(c) if x0 is None else np.asarray(x0, dtype=float)
    F = _maps.perturb(f, eps, v, x0, c)
    s = x0 if start is None else np.asarray(start, dtype=float)
    if not _cone.in_interior(c, s):
        raise DomainError("start must lie in the interior of the cone")
    return _solve_eigen(F, c, s, tol, max_iter)


def interior_eigenvector(
    f: MapSpec,
    c: Optional[ConeSpec] = None,
    start=None,
    tol: float = 1e-12,
    max_iter: int = 10_000,
) -> EigenResult:
    """Interior eigenvector of f itself, when one exists and the iteration finds it."""
    c = _resolve(f, c)
    s = default_start(c) if start is None else np.asarray(start, dtype=float)
    if not _cone.in_interior(c, s):
        raise DomainError("start must lie in the interior of the cone")
    res = _solve_eigen(f, c, s, tol, max_iter)
    if not _cone.in_interior(c, res.vector):
        raise DomainError("the iteration converged to the boundary of the cone")
    return res
