"""JSON form of certificates and a single entry point to re-verify them.

Layout::

    {"type": "lower_bound" | "weak_lower" | "weak_upper" | "formal_eigenvector",
     "map": {...}, "cone": {...}, "data": {...}, "rho_used": float,
     "verified": {"k_max": int, "tol": float, "passed": bool, "seed": int}}

``verified`` records the options the certificate was checked with, so
re-verifying a file with no overrides repeats exactly the same checks.
"""

from __future__ import annotations

from typing import Optional, Union

import numpy as np

from . import cone as _cone
from .bounds import (LOWER, UPPER, EpsStep, FormalEigenCert, LowerBoundCert, VerificationReport,
                     WeakBoundCert, verify_adjoint_equality, verify_formal_eigenvector,
                     verify_lower_bound, verify_weak_bound)
from .errors import ConelabError
from .extended import ExtendedVector
from .maps import Matrix, map_from_json

__all__ = ["Certificate", "certificate_to_json", "certificate_from_json", "verify_certificate",
           "DEFAULT_VERIFY"]

Certificate = Union[LowerBoundCert, WeakBoundCert, FormalEigenCert]

DEFAULT_VERIFY = {
    "lower_bound": {"k_max": 50, "tol": 1e-8, "seed": 0, "n_samples": 20},
    "weak_lower": {"k_max": 50, "tol": 1e-6, "seed": 0},
    "weak_upper": {"k_max": 50, "tol": 1e-6, "seed": 0},
    "formal_eigenvector": {"k_max": 1, "tol": 1e-8, "seed": 0},
}


class CertificateFormatError(ConelabError, ValueError):
    """A certificate document is missing fields or has the wrong shape."""


def _type_of(cert: Certificate) -> str:
    if isinstance(cert, LowerBoundCert):
        return "lower_bound"
    if isinstance(cert, WeakBoundCert):
        return "weak_lower" if cert.direction == LOWER else "weak_upper"
    if isinstance(cert, FormalEigenCert):
        return "formal_eigenvector"
    raise TypeError(f"not a certificate: {type(cert).__name__}")


def certificate_to_json(cert: Certificate, report: Optional[VerificationReport] = None,
                        seed: int = 0) -> dict:
    kind = _type_of(cert)
    if cert.f is None:
        raise CertificateFormatError("certificate does not carry its map")
    if isinstance(cert, LowerBoundCert):
        data = {"y": np.asarray(cert.y).tolist(), "status": cert.status,
                "eps_trace": [s.to_json() for s in cert.eps_trace]}
        rho, c = cert.rho_used, cert.cone
    elif isinstance(cert, WeakBoundCert):
        data = {"w": np.asarray(cert.w).tolist(), "x": np.asarray(cert.x).tolist(),
                "direction": cert.direction, "construction": cert.construction,
                "status": cert.status}
        if cert.eps_trace:
            data["eps_trace"] = [s.to_json() for s in cert.eps_trace]
        rho, c = cert.rho_used, cert.cone
    else:
        data = {"z": cert.z.to_json(), "rho_tilde": cert.rho_tilde,
                "rho_bound": cert.rho_bound, "residual": cert.residual}
        rho, c = cert.rho_tilde, _cone.standard(cert.f.dim)
    if c is None:
        c = _cone.standard(cert.f.dim)
    opts = dict(DEFAULT_VERIFY[kind])
    opts.pop("n_samples", None)
    verified = {"k_max": opts["k_max"], "tol": opts["tol"], "seed": seed, "passed": None}
    if report is not None:
        verified.update(k_max=report.k_max, tol=report.tol, passed=bool(report.passed))
    return {"type": kind, "map": cert.f.to_json(), "cone": c.to_json(), "data": data,
            "rho_used": float(rho), "verified": verified}


def _field(d: dict, key: str):
    try:
        return d[key]
    except (KeyError, TypeError):
        raise CertificateFormatError(f"certificate is missing {key!r}") from None


def certificate_from_json(doc: dict) -> Certificate:
    kind = _field(doc, "type")
    f = map_from_json(_field(doc, "map"))
    c = _cone.ConeSpec.from_json(doc.get("cone") or {"kind": "standard", "dim": f.dim})
    data = _field(doc, "data")
    rho = float(_field(doc, "rho_used"))
    if kind == "lower_bound":
        trace = tuple(EpsStep.from_json(s) for s in data.get("eps_trace", []))
        return LowerBoundCert(np.asarray(_field(data, "y"), dtype=float), rho, trace,
                              data.get("status", "converged"), f, c)
    if kind in ("weak_lower", "weak_upper"):
        direction = data.get("direction", LOWER if kind == "weak_lower" else UPPER)
        if direction != (LOWER if kind == "weak_lower" else UPPER):
            raise CertificateFormatError("direction disagrees with the certificate type")
        trace = tuple(EpsStep.from_json(s) for s in data.get("eps_trace", []))
        return WeakBoundCert(np.asarray(_field(data, "w"), dtype=float),
                             np.asarray(_field(data, "x"), dtype=float), direction, rho,
                             data.get("construction", "polyhedral"),
                             data.get("status", "converged"), trace, f, c)
    if kind == "formal_eigenvector":
        z = ExtendedVector.from_json(_field(data, "z"))
        return FormalEigenCert(z, rho, float(data.get("rho_bound", float("inf"))),
                               float(data.get("residual", 0.0)), f)
    raise CertificateFormatError(f"unknown certificate type {kind!r}")


def verify_certificate(doc_or_cert, k_max: Optional[int] = None, tol: Optional[float] = None,
                       seed: Optional[int] = None,
                       spectral_opts: Optional[dict] = None) -> VerificationReport:
    """Re-run the verifier matching the certificate type.

    Options default to the ones recorded under ``verified`` in the document,
    then to :data:`DEFAULT_VERIFY`.
    """
    if isinstance(doc_or_cert, dict):
        doc = doc_or_cert
        cert = certificate_from_json(doc)
    else:
        cert = doc_or_cert
        doc = {}
    kind = _type_of(cert)
    opts = dict(DEFAULT_VERIFY[kind])
    recorded = doc.get("verified") or {}
    for key in ("k_max", "tol", "seed"):
        if recorded.get(key) is not None:
            opts[key] = recorded[key]
    if k_max is not None:
        opts["k_max"] = k_max
    if tol is not None:
        opts["tol"] = tol
    if seed is not None:
        opts["seed"] = seed
    if isinstance(cert, LowerBoundCert):
        return verify_lower_bound(cert.f, cert.cone, cert, k_max=int(opts["k_max"]),
                                  n_samples=opts["n_samples"], tol=float(opts["tol"]),
                                  seed=int(opts["seed"]), spectral_opts=spectral_opts)
    if isinstance(cert, WeakBoundCert):
        rep = verify_weak_bound(cert.f, cert.cone, cert, k_max=int(opts["k_max"]),
                                tol=float(opts["tol"]), seed=int(opts["seed"]),
                                spectral_opts=spectral_opts)
        if rep.passed and cert.construction == "adjoint" and isinstance(cert.f, Matrix):
            eq = verify_adjoint_equality(cert.f, cert.cone, cert, seed=int(opts["seed"]))
            if not eq.passed:
                return eq
            rep.details["adjoint_max_rel_dev"] = eq.details["max_rel_dev"]
        return rep
    return verify_formal_eigenvector(cert.f, cert, tol=float(opts["tol"]),
                                     seed=int(opts["seed"]), spectral_opts=spectral_opts)
