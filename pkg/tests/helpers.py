"""Shared generators and the acceptance-line recorder."""

import numpy as np

ACCEPTANCE_LINES: list[str] = []


def record(criterion: str, passed: bool, detail: str = "") -> None:
    line = f"{'PASS' if passed else 'FAIL'}  {criterion}  {detail}".rstrip()
    ACCEPTANCE_LINES.append(line)
    print(line)


def cone_preserving_matrix(c, rng, positive=True):
    """sum_ij p_ij g_i w_j^T maps C into C; into int C when P > 0."""
    G, W = np.asarray(c.generators), np.asarray(c.facet_normals)
    P = rng.random((G.shape[0], W.shape[0]))
    if not positive:
        P *= rng.random(P.shape) < 0.5
        P[0, 0] += 1.0
    return G.T @ P @ W


def random_nonneg(rng, n, density=0.6, scale=1.0):
    """Nonnegative n x n matrix with every row and column nonzero."""
    A = rng.random((n, n)) * (rng.random((n, n)) < density) * scale
    A[np.arange(n), rng.permutation(n)] += rng.uniform(0.1, 1.0, n) * scale
    return A


def random_interior(rng, n, spread=2.0):
    return np.exp(rng.normal(scale=spread, size=n))
