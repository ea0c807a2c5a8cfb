"""``conelab`` command line interface.

Every subcommand prints one JSON document on standard output. Exit codes:
0 success or verified, 1 usage or I/O error, 2 inconclusive or stalled,
3 certificate rejected.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import bounds, cone as _cone, dad, spectral
from .certificates import certificate_to_json, verify_certificate
from .errors import (CertificateRejected, ConelabError, InconclusiveError,
                     IterationLimitError)
from .maps import Matrix, map_from_json

EXIT_OK, EXIT_USAGE, EXIT_INCONCLUSIVE, EXIT_REJECTED = 0, 1, 2, 3

log = logging.getLogger("conelab")


class UsageError(Exception):
    pass


# -- input helpers -----------------------------------------------------------------


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


def read_matrix(path: str) -> np.ndarray:
    """A JSON 2-D array, or whitespace-separated rows of numbers."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        rows = json.loads(text)
    except json.JSONDecodeError:
        rows = [line.split() for line in text.splitlines() if line.strip()]
    try:
        A = np.array(rows, dtype=float)
    except ValueError:
        raise UsageError(f"{path} does not hold a rectangular numeric matrix") from None
    if A.ndim != 2:
        raise UsageError(f"{path} does not hold a 2-D matrix")
    return A


def parse_eps_schedule(text: str) -> list[float]:
    """``"1e-1:1e-8"`` gives the decades from 1e-1 down to 1e-8; a comma list is taken as is."""
    try:
        if ":" in text:
            a, b = (float(t) for t in text.split(":"))
            if not (a > 0 and b > 0 and b <= a):
                raise ValueError
            steps = int(round(math.log10(a / b)))
            out = [a / 10 ** i for i in range(steps + 1)]
        else:
            out = [float(t) for t in text.split(",")]
    except ValueError:
        raise UsageError(f"bad eps schedule {text!r}") from None
    if not out or any(not e > 0 for e in out):
        raise UsageError("eps values must be positive")
    return out


def _load_map(args):
    if not args.map:
        raise UsageError("--map is required")
    f = map_from_json(_read_json(args.map))
    c = _cone.ConeSpec.from_json(_read_json(args.cone)) if args.cone else _cone.standard(f.dim)
    return f, c


def _vector(text: Optional[str]):
    if text is None:
        return None
    try:
        return np.array(json.loads(text), dtype=float)
    except (json.JSONDecodeError, ValueError, TypeError):
        raise UsageError(f"expected a JSON vector, got {text!r}") from None


def _spectral_opts(args) -> dict:
    return {"max_iter": args.max_iter} if args.max_iter is not None else {}


def _dump(obj, args) -> None:
    sys.stdout.write(json.dumps(obj, indent=args.json_indent, sort_keys=True,
                                allow_nan=True, default=_json_default))
    sys.stdout.write("\n")


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(f"cannot serialise {type(o).__name__}")


# -- commands ----------------------------------------------------------------------


def cmd_spectral(args) -> int:
    f, c = _load_map(args)
    kw = {"tol": args.tol if args.tol is not None else 1e-9}
    kw.update(_spectral_opts(args))
    est = spectral.spectral_radius(f, c, x0=_vector(args.x), **kw)
    _dump({"rho_hat": est.rho_hat, "bracket": [est.bracket_lo, est.bracket_hi],
           "iterations": est.iterations, "status": est.status,
           "witness": est.witness.tolist()}, args)
    return EXIT_OK if est.status == "converged" else EXIT_INCONCLUSIVE


def cmd_eigen(args) -> int:
    f, c = _load_map(args)
    tol = args.tol if args.tol is not None else 1e-12
    max_iter = args.max_iter or 10_000
    if args.eps is not None:
        r = spectral.perturbed_eigenvector(f, c, args.eps, tol=tol, max_iter=max_iter)
    else:
        r = spectral.interior_eigenvector(f, c, tol=tol, max_iter=max_iter)
    _dump({"vector": r.vector.tolist(), "value": r.value, "residual": r.residual,
           "iterations": r.iterations, "eps": args.eps}, args)
    return EXIT_OK


def cmd_lower_bound(args) -> int:
    f, c = _load_map(args)
    cert = bounds.lower_bound(f, c, eps_schedule=args.eps_schedule,
                              tol=args.tol if args.tol is not None else 1e-6,
                              spectral_opts=_spectral_opts(args))
    k_max = args.k_max or 50
    rep = bounds.verify_lower_bound(f, c, cert, k_max=k_max, seed=args.seed,
                                    spectral_opts=_spectral_opts(args))
    _dump(certificate_to_json(cert, rep, args.seed), args)
    if not rep.passed:
        return EXIT_REJECTED
    return EXIT_OK if cert.status == "converged" else EXIT_INCONCLUSIVE


def cmd_weak_upper(args) -> int:
    f, c = _load_map(args)
    cert = bounds.weak_upper_bound_polyhedral(
        f, c, x=_vector(args.x), eps_schedule=args.eps_schedule, k_check=args.k_max or 50,
        tol=args.tol if args.tol is not None else 1e-6, spectral_opts=_spectral_opts(args))
    rep = bounds.verify_weak_bound(f, c, cert, k_max=args.k_max or 50, seed=args.seed,
                                   spectral_opts=_spectral_opts(args))
    _dump(certificate_to_json(cert, rep, args.seed), args)
    return EXIT_OK if rep.passed else EXIT_REJECTED


def cmd_adjoint_upper(args) -> int:
    f, c = _load_map(args)
    if not isinstance(f, Matrix):
        raise UsageError("adjoint-upper needs a map of variant 'matrix'")
    cert = bounds.adjoint_weak_upper(f, c, spectral_opts=_spectral_opts(args))
    if cert.status != "converged":
        _dump(certificate_to_json(cert, None, args.seed), args)
        return EXIT_INCONCLUSIVE
    rep = verify_certificate(cert, k_max=args.k_max, seed=args.seed,
                             spectral_opts=_spectral_opts(args))
    _dump(certificate_to_json(cert, rep, args.seed), args)
    return EXIT_OK if rep.passed else EXIT_REJECTED


def cmd_formal_eig(args) -> int:
    if args.matrix and not args.map:
        cert = dad.dad_formal_eigenvector(read_matrix(args.matrix))
    else:
        f, _ = _load_map(args)
        cert = bounds.formal_eigenvector(f, eps_schedule=args.eps_schedule,
                                         spectral_opts=_spectral_opts(args))
    rep = bounds.verify_formal_eigenvector(cert.f, cert, seed=args.seed,
                                           spectral_opts=_spectral_opts(args))
    _dump(certificate_to_json(cert, rep, args.seed), args)
    return EXIT_OK if rep.passed else EXIT_REJECTED


def cmd_dad_decompose(args) -> int:
    if not args.matrix:
        raise UsageError("--matrix is required")
    _dump(dad.dad_decompose(read_matrix(args.matrix)).to_json(), args)
    return EXIT_OK


def cmd_sinkhorn(args) -> int:
    if not args.matrix:
        raise UsageError("--matrix is required")
    res = dad.sinkhorn(read_matrix(args.matrix), max_iter=args.max_iter or 100_000,
                       tol=args.tol if args.tol is not None else 1e-8)
    _dump(res.to_json(), args)
    return EXIT_OK if res.converged else EXIT_INCONCLUSIVE


def cmd_verify(args) -> int:
    if not args.cert:
        raise UsageError("--cert is required")
    doc = _read_json(args.cert)
    seed = args.seed if args.seed_given else None
    rep = verify_certificate(doc, k_max=args.k_max, tol=args.tol, seed=seed,
                             spectral_opts=_spectral_opts(args))
    _dump({"type": doc.get("type"), "passed": bool(rep.passed),
           "worst_margin": rep.worst_margin, "k_max": rep.k_max, "tol": rep.tol,
           "reason": rep.reason}, args)
    return EXIT_OK if rep.passed else EXIT_REJECTED


COMMANDS = {
    "spectral": (cmd_spectral, "bracket the cone spectral radius"),
    "eigen": (cmd_eigen, "interior eigenvector of f, or of f_eps with --eps"),
    "lower-bound": (cmd_lower_bound, "construct and verify a lower bound"),
    "weak-upper": (cmd_weak_upper, "weak upper bound on a polyhedral cone"),
    "adjoint-upper": (cmd_adjoint_upper, "weak upper bound for a linear map via its adjoint"),
    "formal-eig": (cmd_formal_eig, "formal eigenvector in (0, inf]^n"),
    "dad-decompose": (cmd_dad_decompose, "block form of a DAD matrix"),
    "sinkhorn": (cmd_sinkhorn, "doubly stochastic scaling of a square matrix"),
    "verify": (cmd_verify, "re-verify a certificate file"),
}


# -- worked examples -------------------------------------------------------------


def _jordan(n: int, lam: float) -> Matrix:
    return Matrix(lam * np.eye(n) + np.eye(n, k=1))


def worked_examples() -> list[tuple[str, bool, str]]:
    """Jordan-block and DAD worked examples as (name, passed, detail) rows."""
    rows = []
    for n, lam in [(2, 1.0), (3, 2.0), (4, 0.5)]:
        t0 = time.perf_counter()
        try:
            cert = bounds.formal_eigenvector(_jordan(n, lam))
            want = ["inf"] * (n - 1) + [1.0]
            ok = cert.z.to_json() == want and cert.rho_tilde == lam
            detail = f"z={cert.z.to_json()} rho_tilde={cert.rho_tilde!r}"
        except ConelabError as exc:
            ok, detail = False, str(exc)
        rows.append((f"formal eigenvector J_{n}({lam:g})", ok,
                     f"{detail} ({time.perf_counter() - t0:.2f}s)"))

    A = _jordan(2, 1.0)
    est = spectral.spectral_radius(A)
    rows.append(("J_2(1) bracket contains 1", est.contains(1.0) and est.bracket_hi - 1 < 1e-2,
                 f"[{est.bracket_lo!r}, {est.bracket_hi!r}]"))
    lb = bounds.lower_bound(A)
    rep = bounds.verify_lower_bound(A, None, lb)
    rows.append(("J_2(1) lower bound ~ e_1", bool(lb.y[1] == 0 and rep.passed),
                 f"y={lb.y.tolist()} worst margin {rep.worst_margin:.3g}"))

    M = [[1, 1, 1], [0, 0, 1]]
    t0 = time.perf_counter()
    dec = dad.dad_decompose(M)
    rows.append(("DAD decomposition lambdas = [2, 1]",
                 [str(x) for x in dec.lambdas] == ["2", "1"],
                 f"lambdas={[str(x) for x in dec.lambdas]}"))
    fe = dad.dad_formal_eigenvector(M)
    est = spectral.spectral_radius(fe.f)
    rows.append(("DAD formal eigenvalue 1 < spectral radius 2",
                 fe.rho_tilde == 1.0 and est.contains(2.0) and est.bracket_hi - 2 < 1e-6,
                 f"z={fe.z.to_json()} rho_tilde={fe.rho_tilde!r} "
                 f"bracket=[{est.bracket_lo:.6g}, {est.bracket_hi!r}] "
                 f"({time.perf_counter() - t0:.2f}s)"))
    return rows


def run_worked_examples(out=None) -> int:
    out = sys.stdout if out is None else out
    rows = worked_examples()
    width = max(len(name) for name, _, _ in rows)
    for name, ok, detail in rows:
        out.write(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {detail}\n")
    return EXIT_OK if all(ok for _, ok, _ in rows) else EXIT_REJECTED


# -- entry point -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--map", help="map JSON file")
    common.add_argument("--cone", help="cone JSON file (default: standard cone)")
    common.add_argument("--cert", help="certificate JSON file")
    common.add_argument("--matrix", help="matrix as a JSON array or whitespace text")
    common.add_argument("--tol", type=float)
    common.add_argument("--max-iter", type=int)
    common.add_argument("--k-max", type=int)
    common.add_argument("--eps-schedule", type=parse_eps_schedule, metavar="A:B")
    common.add_argument("--eps", type=float, help="perturbation size for eigen")
    common.add_argument("--x", help="interior witness as a JSON vector")
    common.add_argument("--seed", type=int)
    common.add_argument("--json-indent", type=int)

    p = argparse.ArgumentParser(prog="conelab", description=__doc__.splitlines()[0])
    p.add_argument("--paper-examples", action="store_true",
                   help="run the built-in Jordan and DAD examples and print a table")
    sub = p.add_subparsers(dest="command")
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return p


def _configure_logging() -> None:
    level = os.environ.get("CONELAB_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.paper_examples:
        return run_worked_examples()
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    args.seed_given = args.seed is not None
    if args.seed is None:
        args.seed = 0
    handler = COMMANDS[args.command][0]
    try:
        return handler(args)
    except UsageError as exc:
        print(f"conelab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InconclusiveError, IterationLimitError) as exc:
        print(f"conelab: inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except CertificateRejected as exc:
        print(f"conelab: rejected: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    except (ConelabError, KeyError, TypeError, ValueError) as exc:
        print(f"conelab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
