import warnings

import numpy as np
import pytest

from holobec.hamiltonian import build_h0
from holobec.perturbation import (
    ConvergenceWarning,
    DegenerateHamiltonianError,
    coefficients,
    commutator_residual,
    convergence_bound,
    first_order_check,
    generator_resummed,
    generator_truncated,
    residual_ratio,
)
from holobec.spin import SpinSystem, is_hermitian, spin_operators


def test_leading_coefficients():
    a = coefficients(2.0, 0.3, 3).a
    assert a[0, 0] == pytest.approx(-1 / 2.0)
    assert a[1, 0] == pytest.approx(0.3 / 4.0) and a[0, 1] == pytest.approx(0.3 / 4.0)
    assert a[1, 1] == pytest.approx(-2 * 0.09 / 8.0)
    assert a[2, 2] == 0.0


def test_linear_only():
    a = coefficients(1.5, 0.0, 5).a
    assert a[0, 0] == pytest.approx(-1 / 1.5)
    assert np.count_nonzero(a) == 1
    s = SpinSystem(3)
    _, jy, _ = spin_operators(s)
    assert np.allclose(generator_resummed(s, 1.5, 0.0), -jy / 1.5)


def test_zero_alpha():
    with pytest.raises(ValueError):
        coefficients(0.0, 0.1, 4)


@pytest.mark.parametrize("j,alpha0,beta0,order,tol", [(2, 1.0, 0.1, 40, 1e-10), (10, 1.0, 0.5 / 19, 60, 1e-8)])
def test_truncation_converges(j, alpha0, beta0, order, tol):
    s = SpinSystem(j)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        g = generator_truncated(s, alpha0, beta0, order)
    assert np.abs(g - generator_resummed(s, alpha0, beta0)).max() < tol


def test_truncation_error_decreases():
    s = SpinSystem(5)
    ref = generator_resummed(s, 1.0, 0.05)
    errs = [np.abs(generator_truncated(s, 1.0, 0.05, n) - ref).max() for n in (2, 4, 8)]
    assert errs[0] > errs[1] > errs[2]


def test_divergence_warning():
    s = SpinSystem(5)
    assert convergence_bound(s, 1.0, 0.2) == pytest.approx(1.8)
    with pytest.warns(ConvergenceWarning):
        generator_truncated(s, 1.0, 0.2, 10)


def test_degenerate_levels():
    # alpha0 = -3 beta0 puts m = 1 and m = 2 at the same energy
    with pytest.raises(DegenerateHamiltonianError, match="degenerate"):
        generator_resummed(SpinSystem(3), -3.0, 1.0)


def test_hermitian():
    g = generator_resummed(SpinSystem(4.5), 1.0, 0.03)
    assert is_hermitian(g, 1e-14)


def test_spin_one_element():
    s = SpinSystem(1)
    g = generator_resummed(s, 1.0, 0.1)
    _, jy, _ = spin_operators(s)
    # entry <m=1|G|m=0> divides by alpha0 + beta0 (1 + 0)
    assert g[s.index(1), s.index(0)] == pytest.approx(-jy[s.index(1), s.index(0)] / 1.1)


def test_commutator_identity(rng):
    for _ in range(20):
        j = int(rng.integers(1, 8))
        s = SpinSystem(j)
        alpha0 = rng.uniform(0.5, 2.0) * rng.choice([-1, 1])
        beta0 = rng.uniform(-1, 1) * 0.9 * abs(alpha0) / max(2 * j - 1, 1)
        assert commutator_residual(s, alpha0, beta0) < 1e-12


def test_commutator_holds_outside_series_range():
    # the resummed form is exact whenever no denominator vanishes
    assert commutator_residual(SpinSystem(5), 1.0, 0.3) < 1e-12


def test_truncated_generator_residual():
    s = SpinSystem(5)
    g = generator_truncated(s, 1.0, 0.05, 60)
    assert commutator_residual(s, 1.0, 0.05, g) < 1e-12


def test_first_order_zero_gamma():
    assert first_order_check(SpinSystem(5), 1.0, 0.05, 0.0) < 1e-12


def test_gamma_range():
    with pytest.raises(ValueError):
        first_order_check(SpinSystem(2), 1.0, 0.05, 0.2)


@pytest.mark.parametrize("beta0", [0.0, 0.05])
def test_second_order_scaling(beta0):
    ratio = residual_ratio(SpinSystem(5), 1.0, beta0, 0.01)
    assert 3.5 <= ratio <= 4.5


def test_first_order_check_uses_h0():
    s = SpinSystem(2)
    small = first_order_check(s, 1.0, 0.05, 0.01)
    assert small < 1e-2 * np.linalg.norm(build_h0(s, 1.0, 0.05))


def test_partial_sums_shrink_geometrically():
    s = SpinSystem(5)
    bound = convergence_bound(s, 1.0, 0.05)
    sums = [generator_truncated(s, 1.0, 0.05, n) for n in range(12)]
    steps = np.array([np.abs(b - a).max() for a, b in zip(sums, sums[1:])])
    ratios = steps[1:] / steps[:-1]
    assert np.all(ratios < 1) and np.all(ratios <= bound + 1e-9)
