from fractions import Fraction

import numpy as np
import pytest

from holobec.hamiltonian import (
    PhysicalParams,
    ReducedParams,
    build_h0,
    build_hamiltonian,
    conjugated_expansion,
    conjugated_hamiltonian,
    degeneracy_ratio,
    degenerate_h0_params,
    h0_energies,
    reduce_params,
)
from holobec.spin import SpinSystem, is_hermitian, spin_operators, structure


class TestParams:
    def test_collisionless(self):
        r = reduce_params(PhysicalParams(omega_a=1.5, omega_b=0.5), SpinSystem(3))
        assert (r.alpha, r.beta, r.gamma) == (1.0, 0.0, 0.0)

    def test_resonance_cancels_beta(self):
        r = reduce_params(PhysicalParams(u_a=0.3, u_b=0.2, u_ab=0.5), SpinSystem(2))
        assert r.beta == pytest.approx(0.0)

    def test_alpha_from_collisions(self):
        r = reduce_params(PhysicalParams(u_a=0.2, u_b=0.0), SpinSystem(2))
        assert r.alpha == pytest.approx(0.3)

    def test_gamma_and_phase(self):
        r = reduce_params(PhysicalParams(lam=0.25, detuning=0.5), SpinSystem(1), t=4.0)
        assert r.gamma == 0.25 and r.phi == 2.0

    def test_validation(self):
        with pytest.raises(ValueError):
            PhysicalParams(lam=-1)
        with pytest.raises(ValueError):
            PhysicalParams(omega_a=np.inf)
        with pytest.raises(ValueError):
            ReducedParams(alpha=np.nan)

    def test_from_field(self):
        r = ReducedParams.from_field(2.0, np.pi / 6, beta=0.1, phi=0.3)
        assert r.alpha == pytest.approx(np.sqrt(3)) and r.gamma == pytest.approx(1.0)


class TestBuild:
    def test_linear_only(self):
        s = SpinSystem(2)
        assert np.allclose(build_hamiltonian(s, ReducedParams(1.0)), np.diag(s.m_values))

    def test_quadratic_only(self):
        s = SpinSystem(1.5)
        assert np.allclose(build_hamiltonian(s, ReducedParams(0.0, 1.0)), np.diag(s.m_values**2))

    def test_spin_one_example(self):
        s = SpinSystem(1)
        h = build_hamiltonian(s, ReducedParams(1.0, 0.5, 0.3, np.pi / 2))
        r2 = 1 / np.sqrt(2)
        # Jy for j=1 in ascending order, assembled by hand
        jy = np.array([[0, 1j * r2, 0], [-1j * r2, 0, 1j * r2], [0, -1j * r2, 0]])
        expect = np.diag([-1.0, 0.0, 1.0]) + 0.5 * np.diag([1.0, 0.0, 1.0]) + 0.3 * jy
        assert np.abs(h - expect).max() < 1e-15

    def test_real_tridiagonal_at_zero_phase(self):
        h = build_hamiltonian(SpinSystem(4), ReducedParams(0.7, 0.2, 0.4, 0.0))
        assert structure(h) == "tridiagonal"
        assert np.abs(h.imag).max() == 0
        assert is_hermitian(h)

    def test_hermitian_general(self, rng):
        for _ in range(10):
            r = ReducedParams(*rng.normal(size=4))
            assert is_hermitian(build_hamiltonian(SpinSystem(3.5), r), 1e-12)


class TestH0:
    def test_is_jz(self):
        s = SpinSystem(2)
        assert np.allclose(build_h0(s, 1.0, 0.0), spin_operators(s)[2])

    def test_degenerate_at_zero(self):
        s = SpinSystem(2)
        alpha0, beta0 = degenerate_h0_params(0, 1.0)
        e = h0_energies(s, alpha0, beta0)
        assert e[s.index(0)] == 0 and e[s.index(1)] == 0

    def test_example_energies(self):
        assert list(h0_energies(SpinSystem(2), 3.0, -1.0)) == [-10.0, -4.0, 0.0, 2.0, 2.0]

    @pytest.mark.parametrize("m,ratio", [(0, -1), (-1, 1), (3, -7), (0.5, -2)])
    def test_degeneracy_ratio(self, m, ratio):
        assert degeneracy_ratio(m) == Fraction(ratio)


class TestConjugation:
    def test_theta_zero(self):
        s = SpinSystem(3)
        assert np.allclose(conjugated_hamiltonian(s, 1.3, -0.4, 0.8, 0.0), build_h0(s, 1.3, -0.4))

    def test_quarter_turn_gives_jx(self):
        s = SpinSystem(2.5)
        jx, _, _ = spin_operators(s)
        assert np.abs(conjugated_hamiltonian(s, 1.7, 0.0, 0.0, np.pi / 2) - 1.7 * jx).max() < 1e-12

    def test_expansion_spin_one(self):
        s = SpinSystem(1)
        direct = conjugated_hamiltonian(s, 1.0, 0.5, 0.0, 0.3)
        assert np.abs(direct - conjugated_expansion(s, 1.0, 0.5, 0.3)).max() < 1e-10

    def test_expansion_random(self, rng):
        for j in [k / 2 for k in range(1, 21)]:
            s = SpinSystem(j)
            theta, a0, b0 = rng.uniform(0, np.pi), rng.normal(), rng.normal()
            direct = conjugated_hamiltonian(s, a0, b0, 0.0, theta)
            assert np.abs(direct - conjugated_expansion(s, a0, b0, theta)).max() < 1e-10

    def test_constant_term_would_be_wrong(self):
        # the symmetrized cross term is 2 Jx Jz + i Jy, not 2 Jx Jz + 1
        s = SpinSystem(2)
        jx, jy, jz = spin_operators(s)
        assert np.abs(jx @ jz + jz @ jx - (2 * jx @ jz + 1j * jy)).max() < 1e-12
        assert np.abs(jx @ jz + jz @ jx - (2 * jx @ jz + np.eye(s.dim))).max() > 0.1

    def test_spectrum_invariance(self, rng):
        s = SpinSystem(4)
        e0 = np.sort(h0_energies(s, 0.8, 0.3))
        for phi, theta in rng.uniform(0, 2 * np.pi, size=(20, 2)):
            h = conjugated_hamiltonian(s, 0.8, 0.3, phi, theta)
            assert is_hermitian(h, 1e-12)
            assert np.abs(np.linalg.eigvalsh(h) - e0).max() < 1e-10
