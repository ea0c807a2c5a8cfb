"""DAD maps ``x -> L A^T L A x``: scaling, decomposition, formal eigenvectors.

A positive eigenvector of the DAD map exists exactly when A can be scaled to
a doubly stochastic matrix, which for square A happens exactly when A is a
direct sum of fully indecomposable matrices. For general A the rows and
columns can be permuted into block upper-triangular form whose diagonal
blocks ``A_i`` (``m_i x n_i``) each carry a DAD eigenvector with eigenvalue
``n_i / m_i``; the largest ratio is the cone spectral radius and the last
block gives a formal eigenvector.

The decomposition repeatedly peels off the densest column set, the set J
maximising ``|J| / |N(J)|`` where ``N(J)`` is the set of rows meeting J.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import cone as _cone
from .bounds import FormalEigenCert
from .errors import CertificateRejected, DimensionError, DomainError, SizeLimitError
from .extended import ExtendedVector
from .maps import DAD, evaluate_extended
from .spectral import interior_eigenvector, spectral_radius

__all__ = ["ScalingResult", "DADDecomposition", "sinkhorn", "sinkhorn_batch",
           "fully_indecomposable", "is_direct_sum_of_fully_indecomposable",
           "dad_decompose", "dad_formal_eigenvector", "MAX_BRUTE_FORCE"]

log = logging.getLogger(__name__)

MAX_BRUTE_FORCE = 12


@dataclass(frozen=True)
class ScalingResult:
    d1: np.ndarray
    d2: np.ndarray
    residual: float
    converged: bool
    iterations: int = 0
    matrix: np.ndarray = field(default=None, repr=False)

    @property
    def scaled(self) -> np.ndarray:
        return self.d1[:, None] * self.matrix * self.d2[None, :]

    def to_json(self) -> dict:
        return {"d1": self.d1.tolist(), "d2": self.d2.tolist(), "residual": self.residual,
                "converged": self.converged, "iterations": self.iterations}


@dataclass(frozen=True)
class DADDecomposition:
    row_perm: tuple
    col_perm: tuple
    blocks: tuple  # (m_i, n_i, A_i)
    lambdas: tuple  # Fractions, nonincreasing
    offdiag: dict = field(default_factory=dict, repr=False)
    row_groups: tuple = field(default=(), repr=False)
    col_groups: tuple = field(default=(), repr=False)

    def permuted(self, A) -> np.ndarray:
        A = np.asarray(A, dtype=float)
        return A[np.ix_(self.row_perm, self.col_perm)]

    def to_json(self) -> dict:
        return {
            "row_perm": list(self.row_perm),
            "col_perm": list(self.col_perm),
            "blocks": [{"m": m, "n": n, "A": B.tolist()} for m, n, B in self.blocks],
            "lambdas": [float(x) for x in self.lambdas],
            "lambdas_exact": [str(x) for x in self.lambdas],
        }


def _check_matrix(A, square=False) -> np.ndarray:
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.size == 0:
        raise DimensionError("expected a nonempty 2-D matrix")
    if square and A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)) or np.any(A < 0):
        raise DomainError("entries must be finite and nonnegative")
    if np.any(A.sum(axis=1) == 0) or np.any(A.sum(axis=0) == 0):
        raise DomainError("every row and column needs a positive entry")
    return A


# -- scaling -------------------------------------------------------------------


def _residuals(A, d1, d2):
    S = d1[..., :, None] * A * d2[..., None, :]
    return np.maximum(np.abs(S.sum(axis=-1) - 1).max(axis=-1),
                      np.abs(S.sum(axis=-2) - 1).max(axis=-1))


def sinkhorn_batch(As, max_iter: int = 100_000, tol: float = 1e-8, check_every: int = 16):
    """Sinkhorn on a stack of same-shape square matrices.

    Returns ``(d1, d2, residual, converged, iterations)`` arrays, with d1
    gauged so its first entry is 1. Matrices drop out of the update once
    converged.
    """
    As = np.asarray(As, dtype=float)
    K, n, _ = As.shape
    d1 = np.ones((K, n))
    d2 = np.ones((K, n))
    iters = np.zeros(K, dtype=int)
    active = np.ones(K, dtype=bool)
    res = _residuals(As, d1, d2)
    active &= res >= tol
    it = 0
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        while it < max_iter and active.any():
            idx = np.flatnonzero(active)
            A, a1, a2 = As[idx], d1[idx], d2[idx]
            for _ in range(min(check_every, max_iter - it)):
                a1 = 1.0 / np.einsum("kij,kj->ki", A, a2)
                a2 = 1.0 / np.einsum("kij,ki->kj", A, a1)
                # keep the gauge bounded, d1[0] stays 1 at the end
                g = a1[:, :1]
                a1 = a1 / g
                a2 = a2 * g
            it += min(check_every, max_iter - it)
            d1[idx], d2[idx] = a1, a2
            r = _residuals(A, a1, a2)
            # factors that overflowed belong to a matrix with no scaling
            r[~(np.isfinite(a1).all(axis=1) & np.isfinite(a2).all(axis=1))] = np.inf
            res[idx] = r
            iters[idx] = it
            active[idx] = r >= tol
    return d1, d2, res, res < tol, iters


def sinkhorn(A, max_iter: int = 100_000, tol: float = 1e-8) -> ScalingResult:
    """Alternate row and column normalisation of a square nonnegative matrix.

    ``converged`` is true iff the row and column sums of ``diag(d1) A
    diag(d2)`` are within ``tol`` of 1 after at most ``max_iter`` sweeps.
    """
    A = _check_matrix(A, square=True)
    d1, d2, res, ok, it = sinkhorn_batch(A[None], max_iter, tol)
    return ScalingResult(d1[0], d2[0], float(res[0]), bool(ok[0]), int(it[0]), A)


# -- structure -----------------------------------------------------------------


def fully_indecomposable(A) -> bool:
    """No k x (n-k) zero submatrix: every k rows (0 < k < n) meet more than k columns."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.size == 0:
        raise DimensionError("expected a square matrix")
    n = A.shape[0]
    if n > MAX_BRUTE_FORCE:
        raise SizeLimitError(f"brute force is capped at n = {MAX_BRUTE_FORCE}")
    S = A > 0
    if n == 1:
        return bool(S[0, 0])
    for k in range(1, n):
        for rows in combinations(range(n), k):
            if S[list(rows)].any(axis=0).sum() < k + 1:
                return False
    return True


def _components(S: np.ndarray) -> list[tuple[list[int], list[int]]]:
    """Connected components of the bipartite support graph, as (rows, cols)."""
    m, n = S.shape
    seen_r, seen_c = [False] * m, [False] * n
    comps = []
    for r0 in range(m):
        if seen_r[r0]:
            continue
        rows, cols, stack = [], [], [("r", r0)]
        seen_r[r0] = True
        while stack:
            kind, i = stack.pop()
            if kind == "r":
                rows.append(i)
                for j in np.flatnonzero(S[i]):
                    if not seen_c[j]:
                        seen_c[j] = True
                        stack.append(("c", int(j)))
            else:
                cols.append(i)
                for r in np.flatnonzero(S[:, i]):
                    if not seen_r[r]:
                        seen_r[r] = True
                        stack.append(("r", int(r)))
        comps.append((sorted(rows), sorted(cols)))
    return comps


def is_direct_sum_of_fully_indecomposable(A) -> bool:
    A = _check_matrix(A, square=True)
    for rows, cols in _components(A > 0):
        if len(rows) != len(cols) or not fully_indecomposable(A[np.ix_(rows, cols)]):
            return False
    return True


def _densest_column_set(S: np.ndarray, rows: list[int], cols: list[int]):
    """Inclusion-minimal column set with maximal |J| / |N(J)|; ties go to the
    lexicographically smallest row set, then column set."""
    m, n = len(rows), len(cols)
    sub = S[np.ix_(rows, cols)]
    col_rows = [frozenset(np.flatnonzero(sub[:, j]).tolist()) for j in range(n)]
    cands: dict[frozenset, frozenset] = {}
    if m <= n:
        # every maximiser is the set of columns living inside its own row set
        for k in range(1, m + 1):
            for R in combinations(range(m), k):
                Rs = frozenset(R)
                J = frozenset(j for j in range(n) if col_rows[j] <= Rs)
                if J:
                    cands[J] = frozenset().union(*(col_rows[j] for j in J))
    else:
        for k in range(1, n + 1):
            for J in combinations(range(n), k):
                cands[frozenset(J)] = frozenset().union(*(col_rows[j] for j in J))
    best = max(Fraction(len(J), len(R)) for J, R in cands.items())
    tops = [J for J, R in cands.items() if Fraction(len(J), len(R)) == best]
    minimal = [J for J in tops if not any(K < J for K in tops)]
    J = min(minimal, key=lambda J: (sorted(cands[J]), sorted(J)))
    return best, sorted(cols[j] for j in J), sorted(rows[i] for i in cands[J])


def dad_decompose(A) -> DADDecomposition:
    """Block upper-triangular form of A with nonincreasing exact ``n_i / m_i``."""
    A = _check_matrix(A)
    m, n = A.shape
    if min(m, n) > MAX_BRUTE_FORCE:
        raise SizeLimitError(f"brute force is capped at min(m, n) = {MAX_BRUTE_FORCE}")
    S = A > 0
    rows, cols = list(range(m)), list(range(n))
    row_groups, col_groups, lambdas = [], [], []
    while cols:
        lam, J, R = _densest_column_set(S, rows, cols)
        lambdas.append(lam)
        col_groups.append(tuple(J))
        row_groups.append(tuple(R))
        rows = [r for r in rows if r not in R]
        cols = [c for c in cols if c not in J]
    if rows:  # cannot happen with nonzero columns and rows
        raise DomainError("rows left over after the decomposition")
    blocks = tuple((len(R), len(J), A[np.ix_(R, J)]) for R, J in zip(row_groups, col_groups))
    offdiag = {}
    for i, R in enumerate(row_groups):
        for j in range(i + 1, len(col_groups)):
            B = A[np.ix_(R, col_groups[j])]
            if B.any():
                offdiag[(i, j)] = B
    return DADDecomposition(
        tuple(r for R in row_groups for r in R), tuple(c for J in col_groups for c in J),
        blocks, tuple(lambdas), offdiag, tuple(row_groups), tuple(col_groups))


def dad_formal_eigenvector(A, tol: float = 1e-8) -> FormalEigenCert:
    """Formal eigenvector of the DAD map with ``rho_tilde = n_s / m_s``.

    The finite part is the trailing run of diagonal blocks that share the last
    ratio and are not coupled to each other; together they form a direct sum,
    so their positive eigenvectors (each scaled to max 1) combine. Every other
    column is INF.
    """
    A = _check_matrix(A)
    dec = dad_decompose(A)
    s = len(dec.blocks)
    lam = dec.lambdas[-1]
    run = [s - 1]
    for i in range(s - 2, -1, -1):
        if dec.lambdas[i] != lam or any((i, j) in dec.offdiag for j in run):
            break
        run.append(i)
    if len(run) > 1:
        log.info("formal eigenvector spans %d uncoupled blocks; it is not unique", len(run))
    entries = ["inf"] * A.shape[1]
    for i in run:
        R, J = dec.row_groups[i], dec.col_groups[i]
        if len(J) == 1:
            v_block = np.ones(1)
        else:
            block = A[np.ix_(R, J)]
            v_block = interior_eigenvector(DAD(block), _cone.standard(len(J))).vector
        v_block = v_block / v_block.max()
        for j, val in zip(J, v_block):
            entries[j] = float(val)
    z = ExtendedVector(entries)
    f = DAD(A)
    fz = evaluate_extended(f, z)
    rho = float(lam)
    fin = ~z.inf_mask
    details = {"z": z.to_json(), "f(z)": fz.to_json(), "lambda": str(lam)}
    if not np.array_equal(fz.inf_mask, z.inf_mask):
        raise CertificateRejected("INF pattern of f(z) differs from that of z", details)
    resid = float(np.max(np.abs(fz.values[fin] - rho * z.values[fin]) / (rho * z.values[fin])))
    if resid > tol:
        raise CertificateRejected("block eigenvector does not extend to an eigenvector", details)
    hi = spectral_radius(f).bracket_hi
    if rho > hi + tol:
        raise CertificateRejected("rho_tilde exceeds the spectral bracket", details)
    return FormalEigenCert(z, rho, hi, resid, f)
