import math
import time

import numpy as np
import pytest

from conelab.errors import DomainError, IterationLimitError
from conelab.maps import DAD, Conjugated, Matrix, MaxTimes, MinTimes, identity, perturb
from conelab.spectral import (collatz_bracket, interior_eigenvector, perturbed_eigenvector,
                              spectral_radius)
from helpers import cone_preserving_matrix, random_interior, random_nonneg
from oracles import (conjugated_maxtimes_rho, maxtimes_rho, perron_root,
                     simple_cycle_rho)


def test_collatz_examples():
    assert collatz_bracket(Matrix([[2, 1], [1, 2]]), None, [1, 1]) == (3, 3)
    assert collatz_bracket(Matrix([[1, 1], [0, 1]]), None, [1, 1]) == (1, 2)
    assert collatz_bracket(identity(3), None, [1, 5, 2]) == (1, 1)
    with pytest.raises(DomainError):
        collatz_bracket(identity(2), None, [1, 0])


def test_symmetric_matrix():
    est = spectral_radius(Matrix([[2, 1], [1, 2]]))
    assert est.status == "converged"
    assert abs(est.rho_hat - 3) <= 1e-9
    assert 3 - 1e-9 <= est.bracket_lo <= 3 <= est.bracket_hi <= 3 + 1e-9


def test_maxtimes_two_cycle():
    A = [[0.5, 2], [0.125, 0.5]]
    assert simple_cycle_rho(A) == pytest.approx(0.5)
    est = spectral_radius(MaxTimes(A))
    assert abs(est.rho_hat - 0.5) <= 1e-9
    assert est.contains(0.5)


def test_jordan_slow_convergence():
    J = Matrix([[1, 1], [0, 1]])
    est = spectral_radius(J, max_iter=1000)
    assert est.contains(1.0)
    assert abs(est.rho_hat - 1) < 1e-2
    assert est.bracket_hi - 1 < 1.1e-3
    t0 = time.perf_counter()
    est = spectral_radius(J)
    assert time.perf_counter() - t0 < 2.0
    assert est.iterations == 10_000 and est.status == "max_iter"
    assert est.bracket_lo <= 1 <= est.bracket_hi < 1 + 1e-3


def test_periodic_orbit_needs_multistep_bracket():
    # x0=(1,2) oscillates between two directions; only the 2-step bracket is tight
    est = spectral_radius(MaxTimes([[0.1, 1], [1, 0.1]]), x0=[1, 2])
    assert est.status == "converged"
    assert est.bracket_lo <= 1 <= est.bracket_hi and est.width < 1e-9


def test_boundary_orbit_reports_stalled():
    est = spectral_radius(DAD([[1, 1, 1], [0, 0, 1]]))
    assert est.contains(2.0)
    assert est.bracket_hi - 2 < 1e-6
    assert est.status in ("stalled", "max_iter")


def test_rejects_bad_start():
    with pytest.raises(DomainError):
        spectral_radius(identity(2), x0=[1, 0])


def test_polyhedral_cone(pyramid, rng):
    for _ in range(20):
        A = cone_preserving_matrix(pyramid, rng)
        est = spectral_radius(Matrix(A), pyramid)
        rho = perron_root(A)
        assert est.bracket_lo - 1e-9 <= rho <= est.bracket_hi + 1e-9
        assert abs(est.rho_hat - rho) <= 1e-6 * rho


def test_bracket_soundness_matrix(rng):
    for _ in range(150):
        n = int(rng.integers(1, 7))
        A = random_nonneg(rng, n)
        est = spectral_radius(Matrix(A), max_iter=2000)
        rho = perron_root(A)
        assert est.bracket_lo - 1e-9 <= rho <= est.bracket_hi + 1e-9
        assert est.bracket_lo > 0


def test_bracket_soundness_maxtimes(rng):
    for _ in range(150):
        n = int(rng.integers(1, 7))
        A = random_nonneg(rng, n)
        est = spectral_radius(MaxTimes(A), max_iter=2000)
        rho = maxtimes_rho(A)
        assert est.bracket_lo - 1e-9 <= rho <= est.bracket_hi + 1e-9
        if n <= 5:
            assert rho == pytest.approx(simple_cycle_rho(A), rel=1e-12)


def test_conjugated_maxtimes_inequality(rng):
    for _ in range(100):
        n = int(rng.integers(1, 7))
        A = random_nonneg(rng, n, density=0.4)
        f = MaxTimes(A)
        g_est = spectral_radius(Conjugated(f), max_iter=2000)
        f_est = spectral_radius(f, max_iter=2000)
        g_rho = conjugated_maxtimes_rho(A)
        assert g_est.bracket_lo - 1e-9 <= g_rho <= g_est.bracket_hi + 1e-9
        assert 1 / g_rho <= maxtimes_rho(A) + 1e-9
        assert g_est.rho_hat >= 1 / f_est.rho_hat - 1e-6 or g_est.bracket_hi >= 1 / f_est.bracket_hi


def test_start_independence(rng):
    # a long stall window lets near-tied cycle means finish their transient
    for _ in range(50):
        n = int(rng.integers(2, 6))
        A = rng.uniform(0.1, 1.0, (n, n))
        for f in (Matrix(A), MaxTimes(A)):
            a = spectral_radius(f, x0=random_interior(rng, n, 1.0), stall_window=5000)
            b = spectral_radius(f, x0=random_interior(rng, n, 1.0), stall_window=5000)
            assert abs(a.rho_hat - b.rho_hat) < 1e-6


NEAR_TIE = np.array([
    [0.36913724, 0.32373777, 0.15422627, 0.46250486, 0.31574022],
    [0.39957915, 0.19675635, 0.87825781, 0.80743765, 0.11329483],
    [0.12857132, 0.69958026, 0.34343117, 0.41992901, 0.53662163],
    [0.95059495, 0.2082817, 0.42331017, 0.78623255, 0.63008241],
    [0.42925981, 0.55964059, 0.1319249, 0.41385569, 0.72454601]])


def test_near_tied_cycles_stall_soundly():
    # self-loop 0.78623255 beats the 2-cycle mean 0.7838 only after ~150 steps
    f = MaxTimes(NEAR_TIE)
    x0 = [1.40336969, 4.65556457, 0.55355759, 0.19292819, 0.93908567]
    rho = maxtimes_rho(NEAR_TIE)
    short = spectral_radius(f, x0=x0)
    assert short.status == "stalled" and short.contains(rho)
    long = spectral_radius(f, x0=x0, stall_window=1000)
    assert long.status == "converged" and abs(long.rho_hat - rho) < 1e-9


def test_perturbed_identity():
    r = perturbed_eigenvector(identity(2), None, 1.0, [1, 1], [1, 1])
    np.testing.assert_allclose(r.vector, [2 ** -0.5, 2 ** -0.5], rtol=1e-12)
    assert r.value == pytest.approx(3)


def test_perturbed_value_exceeds_rho():
    r = perturbed_eigenvector(Matrix([[1, 1], [0, 1]]), None, 0.01)
    assert r.value > 1


def test_perturbed_residual_library_maps(rng):
    for _ in range(30):
        n = int(rng.integers(1, 6))
        A = random_nonneg(rng, n)
        for f in (Matrix(A), MaxTimes(A), MinTimes(A + 0.1), DAD(A), Conjugated(MaxTimes(A))):
            r = perturbed_eigenvector(f, None, 0.1)
            assert r.residual < 1e-12
            F = perturb(f, 0.1, np.ones(n), np.ones(n))
            np.testing.assert_allclose(F(r.vector), r.value * r.vector, rtol=1e-10)


def test_eps_monotone_and_convergent(rng):
    for _ in range(30):
        n = int(rng.integers(2, 6))
        A = random_nonneg(rng, n)
        rho = perron_root(A)
        values = [perturbed_eigenvector(Matrix(A), None, 10.0 ** -i).value for i in range(1, 7)]
        assert all(a >= b - 1e-12 for a, b in zip(values, values[1:]))
        gaps = [v - rho for v in values]
        assert all(g >= -1e-9 for g in gaps)
        assert all(a >= b - 1e-12 for a, b in zip(gaps, gaps[1:]))


def test_interior_eigenvector():
    r = interior_eigenvector(Matrix([[2, 1], [1, 2]]))
    np.testing.assert_allclose(r.vector, [2 ** -0.5] * 2, rtol=1e-12)
    assert r.value == pytest.approx(3)
    with pytest.raises((IterationLimitError, DomainError)):
        interior_eigenvector(Matrix([[1, 1], [0, 1]]), max_iter=200)


def test_newton_not_required():
    r = perturbed_eigenvector(MaxTimes([[1, 2], [0.5, 1]]), None, 0.1)
    assert math.isfinite(r.value) and r.residual < 1e-12
