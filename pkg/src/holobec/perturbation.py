"""Generator ``G`` that produces a weak transverse drive from ``H0 = alpha0 Jz + beta0 Jz^2``.

``G = sum_{k,l} a_kl Jz^k Jy Jz^l`` satisfies ``i [G, H0] = Jx``, so that
``exp(i gamma G) H0 exp(-i gamma G) = H0 + gamma Jx + O(gamma^2)``.  Because
``Jz`` is diagonal, ``(Jz^k Jy Jz^l)_{m'm} = m'^k (Jy)_{m'm} m^l`` and every
term is a rescaling of ``Jy``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import comb

import numpy as np

from .hamiltonian import build_h0
from .spin import SpinSystem, commutator, expm, spin_operators

DENOMINATOR_TOL = 1e-6


class ConvergenceWarning(RuntimeWarning):
    pass


class DegenerateHamiltonianError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorSeries:
    """Coefficient table ``a[k, l]`` for ``k + l <= order`` (zero elsewhere)."""

    alpha0: float
    beta0: float
    order: int
    a: np.ndarray


def coefficients(alpha0: float, beta0: float, order: int) -> GeneratorSeries:
    """``a_kl = (-1)^(k+l+1) (k+l)! / (k! l!) beta0^(k+l) / alpha0^(k+l+1)``."""
    if alpha0 == 0:
        raise ValueError("alpha0 must be nonzero")
    if order < 0:
        raise ValueError(f"order must be non-negative, got {order}")
    a = np.zeros((order + 1, order + 1))
    for k in range(order + 1):
        for l in range(order + 1 - k):
            n = k + l
            a[k, l] = (-1) ** (n + 1) * comb(n, k) * beta0**n / alpha0 ** (n + 1)
    return GeneratorSeries(alpha0, beta0, order, a)


def convergence_bound(sys: SpinSystem, alpha0: float, beta0: float) -> float:
    """``|beta0| (2j - 1) / |alpha0|``; the series converges when this is < 1."""
    return abs(beta0) * (2 * sys.j - 1) / abs(alpha0)


def _from_weights(sys, weights):
    # weights[i] multiplies the (i+1, i) entry of Jy and, by hermiticity, its mirror
    _, jy, _ = spin_operators(sys)
    g = np.zeros((sys.dim, sys.dim), dtype=complex)
    idx = np.arange(sys.dim - 1)
    g[idx + 1, idx] = weights * jy[idx + 1, idx]
    g[idx, idx + 1] = weights * jy[idx, idx + 1]
    return g


def generator_truncated(sys: SpinSystem, alpha0: float, beta0: float, order: int) -> np.ndarray:
    """Partial sum of the series through total power ``k + l = order``.

    Warns with :class:`ConvergenceWarning` when ``|beta0| (2j-1) >= |alpha0|``.
    """
    series = coefficients(alpha0, beta0, order)
    bound = convergence_bound(sys, alpha0, beta0)
    if bound >= 1:
        warnings.warn(
            f"series diverges: |beta0|(2j-1)/|alpha0| = {bound:.3g} >= 1",
            ConvergenceWarning,
            stacklevel=2,
        )
    m = sys.m_values
    lower, upper = m[1:], m[:-1]  # m' and m for the (m+1, m) entries
    powers = np.arange(order + 1)
    left = lower[:, None] ** powers
    right = upper[:, None] ** powers
    weights = np.einsum("ik,kl,il->i", left, series.a, right)
    return _from_weights(sys, weights)


def generator_resummed(sys: SpinSystem, alpha0: float, beta0: float) -> np.ndarray:
    """Closed form ``G_{m'm} = -(Jy)_{m'm} / (alpha0 + beta0 (m + m'))``."""
    m = sys.m_values
    denom = alpha0 + beta0 * (m[1:] + m[:-1])
    worst = np.argmin(np.abs(denom)) if len(denom) else None
    if worst is not None and abs(denom[worst]) < DENOMINATOR_TOL:
        raise DegenerateHamiltonianError(
            f"alpha0 + beta0 (m + m') = {denom[worst]:.3g} vanishes for m = {m[worst]:g}; "
            "the levels are degenerate"
        )
    return _from_weights(sys, -1.0 / denom)


def first_order_check(sys: SpinSystem, alpha0: float, beta0: float, gamma: float) -> float:
    """Frobenius norm of ``U H0 U^dagger - (H0 + gamma Jx)`` with ``U = exp(i gamma G)``."""
    if not 0 <= gamma <= 0.1:
        raise ValueError(f"gamma must lie in [0, 0.1], got {gamma}")
    g = generator_resummed(sys, alpha0, beta0)
    h0 = build_h0(sys, alpha0, beta0)
    jx, _, _ = spin_operators(sys)
    u = expm(g, 1j * gamma)
    return float(np.linalg.norm(u @ h0 @ u.conj().T - h0 - gamma * jx))


def residual_ratio(sys: SpinSystem, alpha0: float, beta0: float, gamma: float) -> float:
    """``residual(gamma) / residual(gamma / 2)``; about 4 for quadratic scaling."""
    return first_order_check(sys, alpha0, beta0, gamma) / first_order_check(sys, alpha0, beta0, gamma / 2)


def commutator_residual(sys: SpinSystem, alpha0: float, beta0: float, g: np.ndarray | None = None) -> float:
    """Max entry of ``i [G, H0] - Jx``."""
    if g is None:
        g = generator_resummed(sys, alpha0, beta0)
    jx, _, _ = spin_operators(sys)
    return float(np.abs(1j * commutator(g, build_h0(sys, alpha0, beta0)) - jx).max())
