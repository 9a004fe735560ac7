"""Two-mode condensate Hamiltonians in the spin-j representation.

Units: hbar = 1, energies and angular frequencies share one unit, angles are
in radians.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .spin import SpinSystem, rotation_u, spin_operators


@dataclass(frozen=True)
class PhysicalParams:
    """Mode energies, collision strengths and Raman drive of the condensate."""

    omega_a: float = 0.0
    omega_b: float = 0.0
    u_a: float = 0.0
    u_b: float = 0.0
    u_ab: float = 0.0
    lam: float = 0.0
    detuning: float = 0.0

    def __post_init__(self):
        for name, value in vars(self).items():
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
        if self.lam < 0:
            raise ValueError(f"lam must be non-negative, got {self.lam}")


@dataclass(frozen=True)
class ReducedParams:
    """Coefficients of ``alpha Jz + beta Jz^2 + gamma (cos(phi) Jx + sin(phi) Jy)``."""

    alpha: float
    beta: float = 0.0
    gamma: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        for name, value in vars(self).items():
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")

    @classmethod
    def from_field(cls, alpha0: float, theta: float, beta: float = 0.0, phi: float = 0.0):
        """Linear drive with field magnitude ``alpha0`` tilted by ``theta``."""
        return cls(alpha0 * np.cos(theta), beta, alpha0 * np.sin(theta), phi)


def reduce_params(p: PhysicalParams, sys: SpinSystem, t: float = 0.0) -> ReducedParams:
    """Map physical parameters at time ``t`` onto the spin Hamiltonian.

    The transverse coupling is taken as ``gamma = lam``; the drive phase
    advances as ``phi = detuning * t``.
    """
    alpha = p.omega_a - p.omega_b + (2 * sys.j - 1) * (p.u_a - p.u_b) / 2
    beta = (p.u_a + p.u_b - p.u_ab) / 2
    return ReducedParams(alpha, beta, p.lam, p.detuning * t)


def build_hamiltonian(sys: SpinSystem, r: ReducedParams) -> np.ndarray:
    jx, jy, jz = spin_operators(sys)
    m = sys.m_values
    h = np.diag(r.alpha * m + r.beta * m**2).astype(complex)
    return h + r.gamma * (np.cos(r.phi) * jx + np.sin(r.phi) * jy)


def h0_energies(sys: SpinSystem, alpha0: float, beta0: float) -> np.ndarray:
    m = sys.m_values
    return alpha0 * m + beta0 * m**2


def build_h0(sys: SpinSystem, alpha0: float, beta0: float = 0.0) -> np.ndarray:
    """Diagonal ``alpha0 Jz + beta0 Jz^2``."""
    return np.diag(h0_energies(sys, alpha0, beta0)).astype(complex)


def degeneracy_ratio(m) -> Fraction:
    """``alpha0 / beta0`` that makes ``|j,m>`` and ``|j,m+1>`` degenerate."""
    return -(2 * Fraction(m) + 1)


def degenerate_h0_params(m, beta0: float = 1.0) -> tuple[float, float]:
    """``(alpha0, beta0)`` with the ``{m, m+1}`` degeneracy built in."""
    return float(degeneracy_ratio(m)) * beta0, beta0


def conjugated_hamiltonian(
    sys: SpinSystem, alpha0: float, beta0: float, phi: float, theta: float
) -> np.ndarray:
    """``U(phi, theta) H0 U(phi, theta)^dagger`` by direct conjugation."""
    u = rotation_u(sys, phi, theta)
    return (u * h0_energies(sys, alpha0, beta0)) @ u.conj().T


def conjugated_expansion(sys: SpinSystem, alpha0: float, beta0: float, theta: float) -> np.ndarray:
    """Operator expansion of ``U(0, theta) H0 U(0, theta)^dagger``.

    ``alpha0 (s Jx + c Jz) + beta0 (s^2 Jx^2 + c^2 Jz^2 + s c (2 Jx Jz + i Jy))``
    with ``s = sin(theta)``, ``c = cos(theta)``.  The ``i Jy`` term is
    ``[Jz, Jx]``, left over from symmetrizing ``Jx Jz + Jz Jx``.
    """
    jx, jy, jz = spin_operators(sys)
    s, c = np.sin(theta), np.cos(theta)
    linear = s * jx + c * jz
    quadratic = s**2 * jx @ jx + c**2 * jz @ jz + s * c * (2 * jx @ jz + 1j * jy)
    return alpha0 * linear + beta0 * quadratic
