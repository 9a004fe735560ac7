"""Spin-j operator algebra and the Schwinger two-mode correspondence.

All matrices act on the (2j+1)-dimensional space of one irreducible spin
block.  The basis is ordered by ascending magnetic quantum number,

    index 0 -> |j, -j>,  index 1 -> |j, -j+1>,  ...,  index 2j -> |j, +j>,

and every function in the package documents its indices against this order.

Operators are plain complex ``numpy`` arrays.  Cached arrays handed out by
this module are marked read-only so they can be shared between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
import scipy.linalg
from scipy.linalg import eigh_tridiagonal

HERMITIAN_TOL = 1e-12
IDENTITY_TOL = 1e-10


class SpinError(ValueError):
    """Invalid spin quantum numbers or operator shapes."""


@dataclass(frozen=True)
class SpinSystem:
    """A single spin-j irreducible block.

    ``j`` may be given as an int, a float or a string such as ``"3/2"``.
    """

    j: float

    def __post_init__(self):
        j = self.j
        if isinstance(j, str):
            num, _, den = j.partition("/")
            j = float(num) / float(den or 1)
        j = float(j)
        twice = 2.0 * j
        if not np.isfinite(j) or j < 0.5 or abs(twice - round(twice)) > 1e-12:
            raise SpinError(f"j must be a positive half-integer, got {self.j!r}")
        object.__setattr__(self, "j", round(twice) / 2.0)

    @property
    def dim(self) -> int:
        return int(round(2 * self.j)) + 1

    @property
    def m_values(self) -> np.ndarray:
        """Magnetic quantum numbers in basis order (ascending)."""
        return _m_values(self.j)

    def index(self, m: float) -> int:
        """Basis index of ``|j, m>``."""
        k = m + self.j
        if abs(k - round(k)) > 1e-9 or not 0 <= round(k) < self.dim:
            raise SpinError(f"m={m} is not a valid projection for j={self.j}")
        return int(round(k))

    def basis_state(self, m: float) -> np.ndarray:
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.index(m)] = 1.0
        return psi


class TwoModeFock(NamedTuple):
    """Occupation numbers of the two condensate modes."""

    n_a: int
    n_b: int


@lru_cache(maxsize=None)
def _m_values(j: float) -> np.ndarray:
    m = np.arange(-j, j + 0.5, 1.0)
    m.setflags(write=False)
    return m


@lru_cache(maxsize=None)
def _spin_operators(j: float):
    m = _m_values(j)
    # <m+1| J+ |m> sits on the sub-diagonal in ascending-m order
    ladder = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
    jp = np.diag(ladder, -1).astype(complex)
    jm = jp.conj().T
    jx = (jp + jm) / 2
    jy = (jp - jm) / 2j
    jz = np.diag(m).astype(complex)
    for op in (jx, jy, jz):
        op.setflags(write=False)
    return jx, jy, jz


def spin_operators(sys: SpinSystem) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(Jx, Jy, Jz)`` for ``sys`` in the ascending-m basis.

    ``Jz`` is diagonal with entries m; ``Jx`` and ``Jy`` are tridiagonal with
    the ladder elements ``<m+1|J+|m> = sqrt(j(j+1) - m(m+1))``.
    """
    return _spin_operators(sys.j)


def ladder_operators(sys: SpinSystem) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(J+, J-)``."""
    jx, jy, _ = spin_operators(sys)
    return jx + 1j * jy, jx - 1j * jy


def casimir(sys: SpinSystem) -> np.ndarray:
    jx, jy, jz = spin_operators(sys)
    return jx @ jx + jy @ jy + jz @ jz


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``AB - BA``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise SpinError(f"cannot commute operators of shapes {a.shape} and {b.shape}")
    return a @ b - b @ a


def structure(op: np.ndarray, tol: float = 0.0) -> str:
    """Classify ``op`` as ``"diagonal"``, ``"tridiagonal"`` or ``"dense"``.

    Entries with magnitude ``<= tol`` count as zero.
    """
    op = np.asarray(op)
    offset = np.abs(np.subtract.outer(np.arange(op.shape[0]), np.arange(op.shape[1])))
    nonzero = np.abs(op) > tol
    if not nonzero[offset > 0].any():
        return "diagonal"
    if not nonzero[offset > 1].any():
        return "tridiagonal"
    return "dense"


def is_hermitian(op: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    op = np.asarray(op)
    return op.shape[0] == op.shape[1] and np.max(np.abs(op - op.conj().T), initial=0.0) <= tol


def is_unitary(op: np.ndarray, tol: float = IDENTITY_TOL) -> bool:
    op = np.asarray(op)
    eye = np.eye(op.shape[0])
    return np.max(np.abs(op.conj().T @ op - eye), initial=0.0) <= tol


def _tridiagonal_eigh(op: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian tridiagonal matrix.

    The off-diagonal phases are gauged into a diagonal unitary so that the
    LAPACK real symmetric tridiagonal solver can be used.
    """
    diag = op.diagonal().real
    sub = op.diagonal(-1)
    mag = np.abs(sub)
    phase = np.ones(op.shape[0], dtype=complex)
    nz = mag > 0
    unit = np.ones_like(sub)
    unit[nz] = sub[nz] / mag[nz]
    phase[1:] = np.cumprod(unit)
    if op.shape[0] == 1:
        return diag.copy(), np.ones((1, 1), dtype=complex)
    evals, vecs = eigh_tridiagonal(diag, mag)
    return evals, phase[:, None] * vecs


def eigh(op: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors of a Hermitian operator.

    Uses the tridiagonal solver when the sparsity allows it.
    """
    op = np.asarray(op)
    if structure(op) == "diagonal":
        evals = op.diagonal().real
        order = np.argsort(evals, kind="stable")
        return evals[order], np.eye(op.shape[0], dtype=complex)[:, order]
    if structure(op) == "tridiagonal":
        return _tridiagonal_eigh(op)
    return np.linalg.eigh(op)


def expm(op: np.ndarray, scale: complex = 1.0, method: str = "auto") -> np.ndarray:
    """Matrix exponential ``exp(scale * op)``.

    Parameters
    ----------
    op : ndarray
        Square matrix.
    scale : complex
        Scalar multiplying ``op`` in the exponent, e.g. ``-1j * t``.
    method : {"auto", "eigh", "pade"}
        ``"eigh"`` requires ``op`` Hermitian and diagonalizes it, taking the
        tridiagonal fast path when possible.  ``"pade"`` is scaling and
        squaring.  ``"auto"`` picks ``"eigh"`` for Hermitian ``op`` and falls
        back to ``"pade"`` otherwise.
    """
    op = np.asarray(op)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise SpinError(f"expm needs a square matrix, got shape {op.shape}")
    if not np.all(np.isfinite(op)) or not np.isfinite(scale):
        raise SpinError("expm received non-finite entries")
    if method == "auto":
        method = "eigh" if is_hermitian(op, tol=1e-12 * max(1.0, np.abs(op).max(initial=0.0))) else "pade"
    if method == "eigh":
        evals, vecs = eigh(op)
        return (vecs * np.exp(scale * evals)) @ vecs.conj().T
    if method == "pade":
        return scipy.linalg.expm(scale * op)
    raise SpinError(f"unknown expm method {method!r}")


@lru_cache(maxsize=None)
def _jy_eigensystem(j: float):
    _, jy, _ = _spin_operators(j)
    evals, vecs = _tridiagonal_eigh(np.asarray(jy))
    # one Newton-Schulz step in extended precision; long propagations apply
    # rotations built from this basis tens of thousands of times
    x = vecs.astype(np.clongdouble)
    vecs = (x @ (3 * np.eye(len(x)) - x.conj().T @ x) / 2).astype(complex)
    vecs.setflags(write=False)
    return evals, vecs


def rotation_y(sys: SpinSystem, theta: float) -> np.ndarray:
    """``exp(-i theta Jy)`` (a real Wigner d-matrix in this basis)."""
    evals, vecs = _jy_eigensystem(sys.j)
    return (vecs * np.exp(-1j * theta * evals)) @ vecs.conj().T


def rotation_u(sys: SpinSystem, phi: float, theta: float) -> np.ndarray:
    """``U(phi, theta) = exp(-i phi Jz) exp(-i theta Jy)``."""
    phases = np.exp(-1j * phi * sys.m_values)
    return phases[:, None] * rotation_y(sys, theta)


def fock_map(sys: SpinSystem, m: float) -> TwoModeFock:
    """Two-mode occupations for ``|j, m>``: ``n_a = j + m``, ``n_b = j - m``."""
    sys.index(m)
    return TwoModeFock(int(round(sys.j + m)), int(round(sys.j - m)))


def fock_to_m(sys: SpinSystem, fock: TwoModeFock) -> float:
    n_a, n_b = fock
    if n_a < 0 or n_b < 0 or n_a + n_b != round(2 * sys.j):
        raise SpinError(f"{fock} does not hold 2j={2 * sys.j:g} atoms")
    return (n_a - n_b) / 2.0
