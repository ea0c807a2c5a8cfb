"""Lower bounds, weak bounds and formal eigenvectors, with verifiers.

Constructions follow the eps-perturbation argument: eigenvectors of
``f_eps(x) = f(x) + eps <x, v> x0`` are computed along a decreasing eps
schedule, warm-started from one another, and the eps -> 0 limit is read off
the tail of that sequence. Limits are estimated with Aitken's delta-squared
process, entries that decay like a power of eps are set to zero, and on the
standard cone the result is polished into an exact eigenvector of the
extension restricted to its support.

Every certificate stores the numbers a verifier needs. Spectral radii in
certificates are sound bracket endpoints (``bracket_lo`` for lower-type
claims, ``bracket_hi`` for upper-type claims) except for adjoint
certificates, which carry the exact eigenvalue of their dual eigenvector
after checking it lies inside the bracket.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import cone as _cone
from . import maps as _maps
from .cone import ConeSpec
from .errors import (CertificateRejected, DomainError, InconclusiveError,
                     IterationLimitError, UnsupportedMapError)
from .extended import ExtendedVector, reciprocal
from .hilbert import hilbert_mM, max_scale_inside
from .maps import MapSpec, Matrix
from .spectral import (EigenResult, SpectralEstimate, _solve_eigen, default_dual_start,
                       default_start, perturbed_eigenvector, spectral_radius)

__all__ = [
    "EpsStep", "LowerBoundCert", "WeakBoundCert", "FormalEigenCert", "VerificationReport",
    "LOWER", "UPPER", "default_eps_schedule", "lower_bound", "verify_lower_bound",
    "weak_lower_from_lower", "weak_upper_bound_polyhedral", "adjoint_weak_upper",
    "verify_weak_bound", "verify_adjoint_equality", "formal_eigenvector",
    "verify_formal_eigenvector", "polish_on_support",
]

log = logging.getLogger(__name__)

LOWER = "LOWER"
UPPER = "UPPER"

SNAP_THRESHOLD = 1e-7
# d log y_i / d log eps above this on every tail step marks y_i -> 0
DECAY_SLOPE = 0.1
TIE_RTOL = 1e-9


def default_eps_schedule() -> list[float]:
    return [10.0 ** -i for i in range(1, 9)]


@dataclass(frozen=True)
class EpsStep:
    eps: float
    vector: np.ndarray
    rho_eps: float
    ray_index: Optional[int] = None

    def to_json(self) -> dict:
        out = {"eps": self.eps, "vector": self.vector.tolist(), "rho_eps": self.rho_eps}
        if self.ray_index is not None:
            out["ray_index"] = self.ray_index
        return out

    @classmethod
    def from_json(cls, d: dict) -> "EpsStep":
        return cls(float(d["eps"]), np.asarray(d["vector"], dtype=float),
                   float(d["rho_eps"]), d.get("ray_index"))


@dataclass(frozen=True)
class LowerBoundCert:
    y: np.ndarray
    rho_used: float
    eps_trace: tuple = ()
    status: str = "converged"
    f: Optional[MapSpec] = field(default=None, repr=False)
    cone: Optional[ConeSpec] = field(default=None, repr=False)

    @property
    def rho_limit(self) -> float:
        """Last perturbed eigenvalue; tends to r >= rho as eps -> 0."""
        return self.eps_trace[-1].rho_eps if self.eps_trace else float("nan")


@dataclass(frozen=True)
class WeakBoundCert:
    w: np.ndarray
    x: np.ndarray
    direction: str
    rho_used: float
    construction: str = "polyhedral"
    status: str = "converged"
    eps_trace: tuple = ()
    f: Optional[MapSpec] = field(default=None, repr=False)
    cone: Optional[ConeSpec] = field(default=None, repr=False)


@dataclass(frozen=True)
class FormalEigenCert:
    z: ExtendedVector
    rho_tilde: float
    rho_bound: float = math.inf
    residual: float = 0.0
    f: Optional[MapSpec] = field(default=None, repr=False)


@dataclass(frozen=True)
class VerificationReport:
    passed: bool
    worst_margin: float
    k_max: int
    tol: float
    reason: str = ""
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.passed


# -- helpers -----------------------------------------------------------------------


def _resolve(f: MapSpec, c: Optional[ConeSpec]) -> ConeSpec:
    if c is None:
        c = _cone.standard(f.dim)
    _maps.validate_self_map(f, c)
    return c


def _unit_facets(c: ConeSpec) -> np.ndarray:
    W = c.facet_normals
    return W / np.linalg.norm(W, axis=1, keepdims=True)


def _aitken(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Entrywise delta-squared extrapolation; falls back to ``c`` where the
    second difference is negligible."""
    d1, d2 = b - a, c - b
    den = d2 - d1
    with np.errstate(divide="ignore", invalid="ignore"):
        acc = c - d2 * d2 / den
    bad = ~np.isfinite(acc) | (np.abs(den) <= 1e-14 * np.maximum(np.abs(c), 1e-300))
    return np.where(bad, c, acc)


def _decaying(ys: np.ndarray, eps: np.ndarray, steps: int = 3) -> np.ndarray:
    """Entries whose log-log slope against eps exceeds DECAY_SLOPE on each of
    the last ``steps`` schedule steps."""
    if len(ys) < steps + 1:
        return np.zeros(ys.shape[1], dtype=bool)
    tail = ys[-(steps + 1):]
    with np.errstate(divide="ignore", invalid="ignore"):
        ly = np.log(np.maximum(tail, 1e-300))
        le = np.log(eps[-(steps + 1):])
        slopes = np.diff(ly, axis=0) / np.diff(le)[:, None]
    return np.all(slopes > DECAY_SLOPE, axis=0)


def _extract_limit(trace: Sequence[EpsStep], c: ConeSpec, tol: float, snap: float):
    """Estimate lim y_eps from a schedule of unit eigenvectors.

    Returns ``(limit, converged)``. On the standard cone, entries below
    ``snap`` in the last two estimates, or decaying like a power of eps,
    are set to zero.
    """
    ys = np.array([s.vector for s in trace])
    eps = np.array([s.eps for s in trace])
    last = ys[-1]
    if len(ys) < 2:
        return last, False
    if np.linalg.norm(ys[-1] - ys[-2]) < tol:
        est_now, est_prev = ys[-1], ys[-2]
    elif len(ys) >= 4:
        est_now = _aitken(ys[-3], ys[-2], ys[-1])
        est_prev = _aitken(ys[-4], ys[-3], ys[-2])
    else:
        return last, False
    if not c.is_standard:
        converged = np.linalg.norm(est_now - est_prev) < tol
        limit = est_now if _cone.contains(c, est_now) and np.any(est_now != 0) else last
        return limit / np.linalg.norm(limit), bool(converged)

    scale = max(np.linalg.norm(est_now), 1e-300)
    small = (np.abs(est_now) < snap * scale) & (np.abs(est_prev) < snap * scale)
    small |= (ys[-1] < snap) & (ys[-2] < snap)
    zero = small | _decaying(ys, eps)
    if zero.all():
        return last, False
    keep = ~zero
    limit = np.where(keep, np.maximum(est_now, 0.0), 0.0)
    prev = np.where(keep, np.maximum(est_prev, 0.0), 0.0)
    if np.any(limit[keep] <= 0):
        limit = np.where(keep, last, 0.0)
        prev = np.where(keep, ys[-2], 0.0)
    limit = limit / np.linalg.norm(limit)
    prev = prev / np.linalg.norm(prev)
    return limit, bool(np.linalg.norm(limit - prev) < tol)


class _Restricted(MapSpec):
    """Extension of f restricted to the face ``{x : x_i = 0, i not in S}``."""

    def __init__(self, base: MapSpec, support: np.ndarray):
        self.base = base
        self.support = np.asarray(support, dtype=bool)
        self.n = int(self.support.sum())

    @property
    def dim(self):
        return self.n

    def _embed(self, u):
        z = np.zeros(self.support.size)
        z[self.support] = u
        return ExtendedVector.from_array(z)

    def apply(self, u):
        out = self.base.apply_extended(self._embed(u))
        if out.inf_mask[self.support].any():
            raise DomainError("the face is not mapped to finite values")
        if np.any(out.values[~self.support] != 0) or out.inf_mask[~self.support].any():
            raise DomainError("the face is not invariant")
        return np.array(out.values[self.support])

    def jacobian(self, u):
        # central differences; only used to accelerate, never to certify
        J = np.empty((self.n, self.n))
        for j in range(self.n):
            h = 1e-6 * u[j]
            up, dn = u.copy(), u.copy()
            up[j] += h
            dn[j] -= h
            J[:, j] = (self.apply(up) - self.apply(dn)) / (2 * h)
        return J


def polish_on_support(f: MapSpec, y: np.ndarray, tol: float = 1e-13,
                      max_iter: int = 2000) -> Optional[EigenResult]:
    """Exact eigenvector of f's extension on the face spanned by ``y > 0``.

    Returns ``None`` when f has no extension, the face is not invariant, or
    the restricted iteration fails.
    """
    if not f.supports_extended:
        return None
    support = y > 0
    if support.all():
        target, start, c = f, y, _cone.standard(f.dim)
    else:
        target = _Restricted(f, support)
        start, c = y[support], _cone.standard(int(support.sum()))
    try:
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            res = _solve_eigen(target, c, start, tol, max_iter)
    except (IterationLimitError, DomainError, UnsupportedMapError, FloatingPointError,
            np.linalg.LinAlgError) as exc:
        log.debug("polishing failed: %s", exc)
        return None
    full = np.zeros(f.dim)
    full[support] = res.vector
    return EigenResult(full / np.linalg.norm(full), res.value, res.residual, res.iterations)


def _eps_sweep(f, c, schedule, v, x0, tol, rays=None, x=None) -> list[EpsStep]:
    trace = []
    start = x0
    for eps in schedule:
        r = perturbed_eigenvector(f, c, eps, v, x0, start=start, tol=tol)
        idx = None
        if rays is not None:
            score = (rays @ x) / (rays @ r.vector)
            top = score.max()
            idx = int(np.flatnonzero(score >= top * (1 - TIE_RTOL))[0])
        trace.append(EpsStep(float(eps), r.vector, r.value, idx))
        start = r.vector
    return trace


def _check_rho(f, c, rho, tol, spectral_opts) -> tuple[bool, SpectralEstimate]:
    est = spectral_radius(f, c, **(spectral_opts or {}))
    ok = est.bracket_lo * (1 - tol) <= rho <= est.bracket_hi * (1 + tol)
    return ok, est


def _random_interior(c: ConeSpec, rng: np.random.Generator) -> np.ndarray:
    if c.is_standard:
        return np.exp(rng.normal(size=c.dim))
    return np.exp(rng.normal(size=c.generators.shape[0])) @ c.generators


# -- lower bounds ------------------------------------------------------------------


def lower_bound(
    f: MapSpec,
    c: Optional[ConeSpec] = None,
    eps_schedule: Optional[Sequence[float]] = None,
    tol: float = 1e-6,
    v=None,
    x0=None,
    snap: float = SNAP_THRESHOLD,
    polish: bool = True,
    spectral_opts: Optional[dict] = None,
) -> LowerBoundCert:
    """Lower bound y in C \\ {0}: ``x >= y`` implies ``f^k(x) >= rho^k y``.

    y is the eps -> 0 limit of the unit eigenvectors of ``f_eps``. The
    certificate records the whole eps trace; its status is ``"inconclusive"``
    when the tail of the trace does not settle to within ``tol``.
    """
    c = _resolve(f, c)
    schedule = list(eps_schedule) if eps_schedule is not None else default_eps_schedule()
    v = default_dual_start(c) if v is None else np.asarray(v, dtype=float)
    x0 = default_start(c) if x0 is None else np.asarray(x0, dtype=float)
    trace = _eps_sweep(f, c, schedule, v, x0, 1e-12)
    y, converged = _extract_limit(trace, c, tol, snap)

    est = spectral_radius(f, c, **(spectral_opts or {}))
    rho_used = est.bracket_lo
    if polish and c.is_standard:
        pol = polish_on_support(f, y)
        # the polished vector must keep the zero pattern and grow at least at rho_used
        if pol is not None and pol.value >= rho_used * (1 - 1e-9):
            if not converged:
                log.info("eps trace not Cauchy, accepted exact eigenvector on its support")
            y, converged = pol.vector, True
    status = "converged" if converged else "inconclusive"
    return LowerBoundCert(y, rho_used, tuple(trace), status, f, c)


def verify_lower_bound(
    f: MapSpec,
    c: Optional[ConeSpec],
    cert: LowerBoundCert,
    k_max: int = 50,
    n_samples: int = 20,
    tol: float = 1e-8,
    seed: int = 0,
    spectral_opts: Optional[dict] = None,
) -> VerificationReport:
    """Sample x >= y and check ``f^k(x) >= rho^k y`` in cone order for k <= k_max."""
    c = _resolve(f, c)
    y = np.asarray(cert.y, dtype=float)
    rho = float(cert.rho_used)
    if y.shape != (c.dim,) or not _cone.contains(c, y) or not np.any(y != 0):
        return VerificationReport(False, -math.inf, k_max, tol, "y is not a nonzero element of C")
    if not rho > 0:
        return VerificationReport(False, -math.inf, k_max, tol, "rho_used must be positive")
    ok, est = _check_rho(f, c, rho, tol, spectral_opts)
    if not ok:
        return VerificationReport(
            False, -math.inf, k_max, tol, "rho_used lies outside the spectral bracket",
            {"bracket": [est.bracket_lo, est.bracket_hi]})
    W = _unit_facets(c)
    ynorm = np.linalg.norm(y)
    rng = np.random.default_rng(seed)
    worst = math.inf
    where = None
    with np.errstate(over="ignore", invalid="ignore"):
        for s in range(n_samples):
            u = _random_interior(c, rng)
            t = 10 ** rng.uniform(-3, 0) * ynorm / np.linalg.norm(u)
            x = y + t * u
            for k in range(1, k_max + 1):
                x = f.apply(x) / rho
                margin = float((W @ (x - y)).min()) / ynorm
                if not math.isfinite(margin):
                    margin = math.inf if np.all(np.isfinite(x) | (x > 0)) else -math.inf
                if margin < worst:
                    worst, where = margin, (s, k)
    passed = worst >= -tol
    return VerificationReport(passed, worst, k_max, tol,
                              "" if passed else "f^k(x) fell below rho^k y",
                              {"worst_at": where, "n_samples": n_samples})


def weak_lower_from_lower(
    f: MapSpec,
    c: Optional[ConeSpec],
    y,
    x,
    rho_used: Optional[float] = None,
    tol: Optional[float] = None,
) -> WeakBoundCert:
    """Weak lower bound from a lower bound y and an interior witness x.

    With lam maximal such that ``x - lam y`` is in C, any extreme ray w of
    C* vanishing on ``x - lam y`` gives ``<f^k(x), w> >= rho^k <x, w>``.
    """
    c = _resolve(f, c)
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if not _cone.in_interior(c, x):
        raise DomainError("x must lie in the interior of the cone")
    lam = max_scale_inside(c, x, y)
    gap = x - lam * y
    rays = np.array([r.direction for r in _cone.extreme_rays_dual(c)])
    vals = rays @ gap
    tol = c.tol * max(1.0, float(np.linalg.norm(x))) if tol is None else tol
    hits = np.flatnonzero(vals <= tol)
    if hits.size == 0:
        raise DomainError("no extreme ray of C* annihilates x - lam*y within tolerance")
    if rho_used is None:
        rho_used = spectral_radius(f, c).bracket_lo
    return WeakBoundCert(rays[hits[0]], x, LOWER, float(rho_used), "from_lower",
                         f=f, cone=c)


# -- weak upper bounds ---------------------------------------------------------------


def weak_upper_bound_polyhedral(
    f: MapSpec,
    c: Optional[ConeSpec] = None,
    x=None,
    eps_schedule: Optional[Sequence[float]] = None,
    k_check: int = 50,
    tol: float = 1e-6,
    stable_tail: int = 3,
    v=None,
    x0=None,
    spectral_opts: Optional[dict] = None,
) -> WeakBoundCert:
    """Weak upper bound on a polyhedral cone via recurring extreme rays.

    For each eps the eigenvector of ``f_eps`` is scaled to the smallest
    multiple dominating x; the extreme ray of C* where that scaling is tight
    is recorded. The ray must repeat over the last ``stable_tail`` eps values,
    otherwise :class:`InconclusiveError` is raised with the trace. The result
    is self-checked against ``bracket_hi`` for ``k <= k_check`` and rejected
    with :class:`CertificateRejected` if the check fails.
    """
    c = _resolve(f, c)
    x = default_start(c) if x is None else np.asarray(x, dtype=float)
    if not _cone.in_interior(c, x):
        raise DomainError("x must lie in the interior of the cone")
    schedule = list(eps_schedule) if eps_schedule is not None else default_eps_schedule()
    v = default_dual_start(c) if v is None else np.asarray(v, dtype=float)
    x0 = default_start(c) if x0 is None else np.asarray(x0, dtype=float)
    rays = np.array([r.direction for r in _cone.extreme_rays_dual(c)])
    trace = _eps_sweep(f, c, schedule, v, x0, 1e-12, rays=rays, x=x)
    tail = [s.ray_index for s in trace[-stable_tail:]]
    if len(trace) < stable_tail or len(set(tail)) != 1:
        raise InconclusiveError("extreme ray did not stabilise over the eps tail", trace)
    w = rays[tail[0]]
    est = spectral_radius(f, c, **(spectral_opts or {}))
    cert = WeakBoundCert(w, x, UPPER, est.bracket_hi, "polyhedral", "converged",
                         tuple(trace), f, c)
    margin, k_bad = _weak_margin(f, x, w, est.bracket_hi, UPPER, k_check)
    if margin < -tol:
        raise CertificateRejected("weak upper bound failed its self-check",
                                  {"margin": margin, "k": k_bad, "ray": tail[0]})
    return cert


def adjoint_weak_upper(
    T: Matrix,
    c: Optional[ConeSpec] = None,
    tol: float = 1e-10,
    spectral_opts: Optional[dict] = None,
) -> WeakBoundCert:
    """Weak upper bound for a linear map from an eigenvector of its adjoint.

    w solves ``T^T w = rho w`` in C*, so ``<T x, w> = rho <x, w>`` for every x.
    The transpose power iteration supplies a start that is Newton-polished;
    boundary eigenvectors (where power iteration crawls) come from the eps
    limit of the transpose map instead. Status is ``"stalled"`` when no
    eigenvector meets ``tol``.
    """
    if not isinstance(T, Matrix):
        raise UnsupportedMapError("the adjoint construction needs a linear map")
    c = _resolve(T, c)
    cd = _cone.dual(c)
    Tt = Matrix(T.A.T)
    _maps.validate_self_map(Tt, cd)
    est = spectral_radius(Tt, cd, **(spectral_opts or {}))
    fwd = spectral_radius(T, c, **(spectral_opts or {}))
    lo = max(est.bracket_lo, fwd.bracket_lo)
    hi = min(est.bracket_hi, fwd.bracket_hi)

    candidates = []
    for solve_tol in (1e-14, tol):
        try:
            candidates.append(_solve_eigen(Tt, cd, est.witness, solve_tol, 200).vector)
            break
        except (IterationLimitError, DomainError) as exc:
            log.debug("interior polish of the adjoint eigenvector failed: %s", exc)
    near_boundary = not candidates or candidates[0].min() < 1e-6 * candidates[0].max()
    if c.is_standard and near_boundary:
        candidates.append(lower_bound(Tt, cd, spectral_opts=spectral_opts).y)
    candidates.append(est.witness)
    if c.is_standard:
        # boundary eigenvectors: drop entries that are numerically zero
        for w in list(candidates):
            snapped = np.where(w < SNAP_THRESHOLD * w.max(), 0.0, w)
            if not np.array_equal(snapped, w):
                candidates.append(snapped)

    best = None
    for w in candidates:
        w = w / np.linalg.norm(w)
        Tw = Tt.A @ w
        mu = float(Tw @ w)
        resid = float(np.linalg.norm(Tw - mu * w)) / mu
        if lo * (1 - 1e-9) <= mu <= hi * (1 + 1e-9) and (best is None or resid < best[0]):
            best = (resid, w, mu)
    if best is not None and best[0] <= tol:
        return WeakBoundCert(best[1], default_start(c), UPPER, best[2], "adjoint", "converged",
                             f=T, cone=c)
    return WeakBoundCert(est.witness, default_start(c), UPPER, est.bracket_hi, "adjoint",
                         "stalled", f=T, cone=c)


def _weak_margin(f: MapSpec, x: np.ndarray, w: np.ndarray, rho: float, direction: str,
                 k_max: int, scale: float = 1.0) -> tuple[float, Optional[int]]:
    """Worst relative margin of the weak-bound inequality over k = 0..k_max.

    ``scale`` multiplies the right-hand side ``rho^k <x, w>`` (the uniformity
    constant for other starting points). Positive margins mean the inequality
    holds with room to spare.
    """
    base = float(x @ w) * scale
    u = np.array(x, dtype=float)
    worst, at = math.inf, None
    log_scale = 0.0
    for k in range(k_max + 1):
        if k:
            u = f.apply(u) / rho
            nrm = float(np.linalg.norm(u))
            u = u / nrm
            log_scale += math.log(nrm)
        lhs_log = log_scale + math.log(max(float(u @ w), 1e-300))
        ratio = math.exp(min(lhs_log - math.log(base), 700.0))
        margin = ratio - 1.0 if direction == LOWER else 1.0 - ratio
        if margin < worst:
            worst, at = margin, k
    return worst, at


def verify_weak_bound(
    f: MapSpec,
    c: Optional[ConeSpec],
    cert: WeakBoundCert,
    k_max: int = 50,
    tol: float = 1e-6,
    seed: int = 0,
    n_uniform: int = 5,
    spectral_opts: Optional[dict] = None,
) -> VerificationReport:
    """Check the weak-bound inequality from the witness and, with the
    uniformity constant, from ``n_uniform`` other random interior points."""
    c = _resolve(f, c)
    w = np.asarray(cert.w, dtype=float)
    x = np.asarray(cert.x, dtype=float)
    rho = float(cert.rho_used)
    fail = lambda why, **d: VerificationReport(False, -math.inf, k_max, tol, why, d)  # noqa: E731
    if cert.direction not in (LOWER, UPPER):
        return fail(f"unknown direction {cert.direction!r}")
    if w.shape != (c.dim,) or not np.any(w != 0) or not _cone.contains(_cone.dual(c), w):
        return fail("w is not a nonzero element of the dual cone")
    if x.shape != (c.dim,) or not _cone.in_interior(c, x):
        return fail("witness x is not interior")
    if not rho > 0:
        return fail("rho_used must be positive")
    ok, est = _check_rho(f, c, rho, tol, spectral_opts)
    if not ok:
        return fail("rho_used lies outside the spectral bracket",
                    bracket=[est.bracket_lo, est.bracket_hi])
    margin, k_at = _weak_margin(f, x, w, rho, cert.direction, k_max)
    details = {"witness_margin": margin, "witness_k": k_at, "uniform": []}
    worst = margin
    rng = np.random.default_rng(seed)
    for _ in range(n_uniform):
        y = _random_interior(c, rng)
        d = hilbert_mM(c, x, y)
        # y >= m x and y <= M x propagate through f^k
        const = d.m if cert.direction == LOWER else d.M
        m_u, _ = _weak_margin(f, y, w, rho, cert.direction, k_max,
                              scale=const * float(x @ w) / float(y @ w))
        details["uniform"].append(m_u)
        worst = min(worst, m_u)
    passed = worst >= -tol
    return VerificationReport(passed, worst, k_max, tol,
                              "" if passed else "weak-bound inequality violated", details)


def verify_adjoint_equality(
    T: Matrix,
    c: Optional[ConeSpec],
    cert: WeakBoundCert,
    n_points: int = 100,
    tol: float = 1e-8,
    seed: int = 0,
) -> VerificationReport:
    """``|<T x, w> - rho <x, w>| <= tol * rho <x, w>`` on random points of C."""
    c = _resolve(T, c)
    w = np.asarray(cert.w, dtype=float)
    rho = float(cert.rho_used)
    if not np.any(w != 0) or not _cone.contains(_cone.dual(c), w):
        return VerificationReport(False, -math.inf, 1, tol, "w is not in the dual cone")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_points):
        if c.is_standard:
            x = rng.exponential(size=c.dim) * (rng.random(c.dim) < 0.8)
            if not x.any():
                x[rng.integers(c.dim)] = 1.0
        else:
            x = rng.exponential(size=c.generators.shape[0]) @ c.generators
        lhs = float((T.A @ x) @ w)
        rhs = rho * float(x @ w)
        if rhs == 0:
            dev = abs(lhs)
        else:
            dev = abs(lhs - rhs) / rhs
        worst = max(worst, dev)
    passed = worst <= tol
    return VerificationReport(passed, -worst, 1, tol,
                              "" if passed else "adjoint equality violated", {"max_rel_dev": worst})


# -- formal eigenvectors -----------------------------------------------------------


def _formal_residual(f: MapSpec, z: ExtendedVector) -> tuple[float, float, ExtendedVector]:
    fz = _maps.evaluate_extended(f, z)
    fin = ~z.inf_mask
    if not np.array_equal(fz.inf_mask, z.inf_mask):
        return math.nan, math.inf, fz
    ratios = fz.values[fin] / z.values[fin]
    lo, hi = float(ratios.min()), float(ratios.max())
    rho = lo if lo == hi else math.sqrt(lo * hi)
    return rho, (hi - lo) / rho, fz


def formal_eigenvector(
    f: MapSpec,
    eps_schedule: Optional[Sequence[float]] = None,
    tol: float = 1e-8,
    lower_tol: float = 1e-6,
    spectral_opts: Optional[dict] = None,
) -> FormalEigenCert:
    """Formal eigenvector ``z`` in (0, INF]^n with ``f(z) = rho_tilde z``.

    z is the reciprocal of a lower bound of the conjugated map ``L f L``.
    The result is normalised so its largest finite entry is 1 and validated:
    the INF pattern of f(z) must equal that of z exactly, finite entries must
    agree to ``tol`` relative, and ``rho_tilde <= bracket_hi(rho(f)) + tol``.
    """
    if not f.supports_extended:
        raise UnsupportedMapError(f"{type(f).__name__} has no extension to (0, INF]^n")
    c = _cone.standard(f.dim)
    g = _maps.conjugate(f)
    # rho(g) only screens the polished vector here; a short run keeps that
    # screen sound (bracket_lo only grows with more steps)
    g_opts = dict(spectral_opts or {})
    g_opts["max_iter"] = min(g_opts.get("max_iter", 1000), 1000)
    lb = lower_bound(g, c, eps_schedule=eps_schedule, tol=lower_tol, spectral_opts=g_opts)
    if lb.status != "converged":
        raise InconclusiveError("lower bound of the conjugated map did not converge",
                                list(lb.eps_trace))
    z = reciprocal(ExtendedVector.from_array(lb.y))
    z = z.scale(1.0 / float(z.values[~z.inf_mask].max()))
    rho_tilde, resid, fz = _formal_residual(f, z)
    est = spectral_radius(f, c, **(spectral_opts or {}))
    details = {"residual": resid, "rho_tilde": rho_tilde, "bracket_hi": est.bracket_hi,
               "z": z.to_json(), "f(z)": fz.to_json()}
    if not math.isfinite(rho_tilde):
        raise CertificateRejected("INF pattern of f(z) differs from that of z", details)
    if resid > tol:
        raise CertificateRejected("f(z) is not a multiple of z on the finite entries", details)
    if rho_tilde > est.bracket_hi + tol:
        raise CertificateRejected("rho_tilde exceeds the spectral bracket", details)
    return FormalEigenCert(z, rho_tilde, est.bracket_hi, resid, f)


def verify_formal_eigenvector(
    f: MapSpec,
    cert: FormalEigenCert,
    tol: float = 1e-8,
    n_samples: int = 20,
    seed: int = 0,
    spectral_opts: Optional[dict] = None,
) -> VerificationReport:
    """Re-check ``f(z) = rho_tilde z``, ``rho_tilde <= rho`` and the upper-bound
    consequence ``x <= z  =>  f(x) <= rho z`` on random finite x."""
    z = cert.z if isinstance(cert.z, ExtendedVector) else ExtendedVector(cert.z)
    k = 1
    if len(z) != f.dim or not z.is_formal_candidate() or z.has_zero():
        return VerificationReport(False, -math.inf, k, tol,
                                  "z must lie in (0, INF]^n with a finite entry")
    rho_tilde = float(cert.rho_tilde)
    fz = _maps.evaluate_extended(f, z)
    if not np.array_equal(fz.inf_mask, z.inf_mask):
        return VerificationReport(False, -math.inf, k, tol, "INF pattern of f(z) differs")
    fin = ~z.inf_mask
    dev = np.abs(fz.values[fin] - rho_tilde * z.values[fin]) / (rho_tilde * z.values[fin])
    worst = -float(dev.max())
    if -worst > tol:
        return VerificationReport(False, worst, k, tol, "f(z) != rho_tilde z",
                                  {"max_rel_dev": -worst})
    est = spectral_radius(f, _cone.standard(f.dim), **(spectral_opts or {}))
    if rho_tilde > est.bracket_hi + tol:
        return VerificationReport(False, worst, k, tol, "rho_tilde exceeds bracket_hi",
                                  {"bracket_hi": est.bracket_hi})
    rng = np.random.default_rng(seed)
    hi = est.bracket_hi
    zf = z.values
    for _ in range(n_samples):
        x = np.where(fin, zf * rng.uniform(0.05, 1.0, size=len(z)),
                     np.exp(rng.normal(scale=3.0, size=len(z))))
        fx = f.apply(x)
        bad = fin & (fx > hi * zf * (1 + tol))
        if bad.any():
            return VerificationReport(False, worst, k, tol, "x <= z but f(x) > rho z",
                                      {"x": x.tolist()})
    return VerificationReport(True, worst, k, tol, "", {"bracket_hi": hi})
