"""Connections, curvature, Berry phases and holonomies on the (phi, theta) plane.

The control manifold is parametrized by ``U(phi, theta) = exp(-i phi Jz)
exp(-i theta Jy)`` and the adiabatic frame over a set of ``Jz`` levels is
``U(phi, theta) |j, m>``.  The connection is ``A_mu = <i| U^dag d_mu U |k>``,
an anti-Hermitian n x n matrix for each direction.

Transport sign
--------------
A state that follows the frame adiabatically obeys ``dc/dt = -A(dsigma/dt) c``
(up to the dynamical phase), so Schroedinger evolution realizes the ordered
product ``P exp(-integral A)``.  Every holonomy routine takes ``sign``:
``sign=-1`` (default) gives that physical transport, ``sign=+1`` gives
``P exp(+integral A)``.  Products are always ordered with later path segments
to the left.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .hamiltonian import h0_energies
from .spin import SpinSystem, rotation_u

ANTI_HERMITIAN_TOL = 1e-10
DEGENERACY_TOL = 1e-10


class UnsupportedSubspaceError(ValueError):
    """Raised for level sets the closed-form connection does not cover."""


class OpenLoopError(ValueError):
    """Raised when a holonomy is requested for a path that does not close."""


class PhaseValue(NamedTuple):
    raw: float
    wrapped: float


def wrap_phase(x):
    """Map angles onto ``(-pi, pi]``."""
    return np.pi - np.mod(np.pi - np.asarray(x, dtype=float), 2 * np.pi)


def phase_distance(a, b):
    """Distance between two angles on the circle."""
    return np.abs(wrap_phase(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))


@dataclass(frozen=True)
class DegenerateSubspace:
    """Ordered ``Jz`` levels sharing one ``H0`` eigenvalue."""

    m_values: tuple[float, ...]
    energy: float = 0.0

    def __post_init__(self):
        if len(self.m_values) < 1:
            raise ValueError("a subspace needs at least one level")
        object.__setattr__(self, "m_values", tuple(float(m) for m in self.m_values))

    @property
    def n(self) -> int:
        return len(self.m_values)

    @classmethod
    def level(cls, m: float, energy: float = 0.0) -> "DegenerateSubspace":
        return cls((m,), energy)

    @classmethod
    def pair(cls, m: float, energy: float = 0.0) -> "DegenerateSubspace":
        return cls((m, m + 1), energy)


def find_degenerate_subspace(
    sys: SpinSystem, alpha0: float, beta0: float, m: float, tol: float = DEGENERACY_TOL
) -> DegenerateSubspace:
    """All levels of ``alpha0 Jz + beta0 Jz^2`` degenerate with ``|j, m>``."""
    energies = h0_energies(sys, alpha0, beta0)
    e = energies[sys.index(m)]
    members = tuple(mv for mv, ev in zip(sys.m_values, energies) if abs(ev - e) < tol)
    return DegenerateSubspace(members, float(e))


def _check_shape(subspace: DegenerateSubspace) -> None:
    ms = subspace.m_values
    if subspace.n == 1:
        return
    if subspace.n == 2 and abs(ms[1] - ms[0] - 1) < 1e-12:
        return
    raise UnsupportedSubspaceError(
        f"closed-form connection covers a single level or an adjacent pair (m, m+1); got m={ms}"
    )


def pair_coupling(sys: SpinSystem, m: float) -> float:
    """``rho = sqrt((j - m)(j + m + 1))``, i.e. ``<m+1|J+|m>``."""
    j = sys.j
    return float(np.sqrt((j - m) * (j + m + 1)))


def _analytic_components(sys, subspace, theta):
    theta = np.asarray(theta, dtype=float)
    c, s = np.cos(theta)[..., None, None], np.sin(theta)[..., None, None]
    m = subspace.m_values[0]
    shape = theta.shape + (subspace.n, subspace.n)
    if subspace.n == 1:
        a_phi = np.broadcast_to(-1j * m * c, shape).astype(complex)
        return a_phi, np.zeros(shape, dtype=complex)
    half = pair_coupling(sys, m) / 2
    a_phi = 1j * np.block([[-m * c, half * s], [half * s, -(m + 1) * c]])
    a_theta = np.broadcast_to(np.array([[0.0, half], [-half, 0.0]], dtype=complex), shape)
    return a_phi, a_theta.copy()


def connection_analytic(sys: SpinSystem, subspace: DegenerateSubspace, phi: float, theta: float):
    """Closed-form ``(A_phi, A_theta)`` for one level or an adjacent pair.

    Single level m: ``A_phi = -i m cos(theta)``, ``A_theta = 0``.
    Pair {m, m+1}::

        A_phi   = i [[-m cos(theta),      rho/2 sin(theta)],
                     [ rho/2 sin(theta), -(m+1) cos(theta)]]
        A_theta = rho/2 [[0, 1], [-1, 0]]

    Both are independent of ``phi``.
    """
    _check_shape(subspace)
    a_phi, a_theta = _analytic_components(sys, subspace, theta)
    return a_phi, a_theta


def _frame(sys, subspace, phi, theta):
    idx = [sys.index(m) for m in subspace.m_values]
    return rotation_u(sys, phi, theta)[:, idx]


def connection_numeric(
    sys: SpinSystem, subspace: DegenerateSubspace, phi: float, theta: float, h: float = 1e-5
):
    """``(A_phi, A_theta)`` from central differences of the frame ``U(phi, theta)|m>``.

    The difference quotient carries an O(h^2) Hermitian part; only the
    anti-Hermitian part, which is what the exact connection has, is kept.
    """
    if not 1e-6 <= h <= 1e-3:
        raise ValueError(f"finite-difference step must lie in [1e-6, 1e-3], got {h}")
    v = _frame(sys, subspace, phi, theta)
    d_phi = (_frame(sys, subspace, phi + h, theta) - _frame(sys, subspace, phi - h, theta)) / (2 * h)
    d_theta = (_frame(sys, subspace, phi, theta + h) - _frame(sys, subspace, phi, theta - h)) / (2 * h)
    return _anti_hermitian(v.conj().T @ d_phi), _anti_hermitian(v.conj().T @ d_theta)


def _anti_hermitian(a):
    return 0.5 * (a - a.conj().T)


@dataclass(frozen=True)
class ConnectionField:
    """A pair of connection evaluators over the (phi, theta) plane.

    ``evaluate(phi, theta)`` accepts broadcastable arrays and returns two
    stacks of shape ``broadcast(phi, theta).shape + (n, n)``.  ``m_values``
    names the frame levels; it is used to close loops that wind in ``phi``.
    """

    evaluate: Callable
    n: int
    m_values: tuple[float, ...] | None = None
    label: str = ""

    def __call__(self, phi, theta):
        return self.evaluate(phi, theta)


def analytic_connection(sys: SpinSystem, subspace: DegenerateSubspace) -> ConnectionField:
    _check_shape(subspace)

    def evaluate(phi, theta):
        phi, theta = np.broadcast_arrays(np.asarray(phi, float), np.asarray(theta, float))
        return _analytic_components(sys, subspace, theta)

    return ConnectionField(evaluate, subspace.n, subspace.m_values, "analytic")


def numeric_connection(sys: SpinSystem, subspace: DegenerateSubspace, h: float = 1e-5) -> ConnectionField:
    n = subspace.n

    def evaluate(phi, theta):
        phi, theta = np.broadcast_arrays(np.asarray(phi, float), np.asarray(theta, float))
        a_phi = np.empty(phi.shape + (n, n), dtype=complex)
        a_theta = np.empty_like(a_phi)
        for idx in np.ndindex(phi.shape):
            a_phi[idx], a_theta[idx] = connection_numeric(sys, subspace, phi[idx], theta[idx], h)
        return a_phi, a_theta

    return ConnectionField(evaluate, n, subspace.m_values, "numeric")


def gauge_transform(connection: ConnectionField, w: np.ndarray) -> ConnectionField:
    """Connection of the rotated frame ``V W`` for a constant unitary ``W``."""
    w = np.asarray(w, dtype=complex)
    wd = w.conj().T

    def evaluate(phi, theta):
        a_phi, a_theta = connection(phi, theta)
        return wd @ a_phi @ w, wd @ a_theta @ w

    return ConnectionField(evaluate, connection.n, connection.m_values, connection.label + "+gauge")


def _derivatives(connection, phi, theta, h):
    ap_plus, at_plus = connection(phi + h, theta)
    ap_minus, at_minus = connection(phi - h, theta)
    d_phi_a_theta = (at_plus - at_minus) / (2 * h)
    ap_plus, _ = connection(phi, theta + h)
    ap_minus, _ = connection(phi, theta - h)
    d_theta_a_phi = (ap_plus - ap_minus) / (2 * h)
    return d_phi_a_theta, d_theta_a_phi


def field_strength(
    sys: SpinSystem,
    subspace: DegenerateSubspace,
    phi: float,
    theta: float,
    h: float = 1e-4,
    connection: str = "numeric",
) -> np.ndarray:
    """``F = -d_phi A_theta + d_theta A_phi + [A_phi, A_theta]``.

    Derivatives are central differences of the connection, which itself is
    either the finite-difference one (``connection="numeric"``) or the closed
    form (``"analytic"``).  For a single level ``F = i m sin(theta)``.
    """
    if connection == "numeric":
        conn = numeric_connection(sys, subspace)
    elif connection == "analytic":
        conn = analytic_connection(sys, subspace)
    else:
        raise ValueError(f"unknown connection kind {connection!r}")
    a_phi, a_theta = conn(phi, theta)
    d_phi_a_theta, d_theta_a_phi = _derivatives(conn, phi, theta, h)
    return -d_phi_a_theta + d_theta_a_phi + a_phi @ a_theta - a_theta @ a_phi


def berry_phase_closed(m: float, theta: float) -> PhaseValue:
    """``-2 pi m (1 - cos(theta))``: m times the solid angle of the cone."""
    raw = -2 * np.pi * m * (1 - np.cos(theta))
    return PhaseValue(float(raw), float(wrap_phase(raw)))


def _default_j(m):
    if abs(m - round(m)) > 1e-12:
        return abs(m)
    return max(abs(m), 1.0)


def berry_phase_flux(m: float, theta: float, steps: int = 1024, j: float | None = None, h: float = 1e-4) -> PhaseValue:
    """``i`` times the curvature flux through the cap ``[0, 2 pi] x [0, theta]``.

    The curvature comes from :func:`field_strength` with the finite-difference
    connection; the surface integral uses a tensor Gauss-Legendre rule with
    about ``steps`` nodes.
    """
    if steps < 16:
        raise ValueError("flux quadrature needs at least 16 nodes")
    sys = SpinSystem(_default_j(m) if j is None else j)
    subspace = DegenerateSubspace.level(m)
    side = max(4, int(round(np.sqrt(steps))))
    x, w = np.polynomial.legendre.leggauss(side)
    thetas = 0.5 * theta * (x + 1)
    phis = np.pi * (x + 1)
    total = 0.0 + 0.0j
    for ph, wp in zip(phis, w):
        for th, wt in zip(thetas, w):
            total += wp * wt * field_strength(sys, subspace, ph, th, h)[0, 0]
    total *= np.pi * 0.5 * theta
    raw = float((1j * total).real)
    return PhaseValue(raw, float(wrap_phase(raw)))


@dataclass(frozen=True)
class LoopPath:
    """Sampled curve ``s -> (phi, theta)``; ``points`` has shape (K+1, 2).

    A path is closed when the end point repeats the start, with ``phi``
    allowed to differ by a whole number of turns (``winding``).
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"loop points must have shape (K+1, 2), got {pts.shape}")
        if pts.shape[0] - 1 < 8:
            raise ValueError("a loop needs at least 8 segments")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def segments(self) -> int:
        return self.points.shape[0] - 1

    @property
    def winding(self) -> float:
        return (self.points[-1, 0] - self.points[0, 0]) / (2 * np.pi)

    @property
    def closed(self) -> bool:
        w = self.winding
        return abs(self.points[-1, 1] - self.points[0, 1]) <= 1e-12 and abs(w - round(w)) <= 1e-12

    def at(self, s):
        """Piecewise-linear interpolation, ``s`` in [0, 1]."""
        s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0) * self.segments
        k = np.minimum(s.astype(int), self.segments - 1)
        f = (s - k)[..., None]
        return self.points[k] * (1 - f) + self.points[k + 1] * f


def circle_loop(theta: float, segments: int = 4096, winding: int = 1, phi0: float = 0.0) -> LoopPath:
    """Constant-``theta`` loop sweeping ``phi`` through ``winding`` turns."""
    phis = phi0 + np.linspace(0.0, 2 * np.pi * winding, segments + 1)
    phis[-1] = phi0 + 2 * np.pi * winding
    return LoopPath(np.column_stack([phis, np.full_like(phis, theta)]))


def rectangle_loop(phi_range, theta_range, segments_per_side: int = 64) -> LoopPath:
    """Axis-aligned rectangle traversed side 1..4 from ``(phi0, theta0)``.

    Side 1 runs ``phi0 -> phi1`` at ``theta0``, side 2 ``theta0 -> theta1`` at
    ``phi1``, side 3 back to ``phi0`` at ``theta1`` and side 4 down to the start.
    """
    (p0, p1), (t0, t1) = phi_range, theta_range
    s = np.linspace(0.0, 1.0, segments_per_side + 1)[:-1]
    sides = [
        np.column_stack([p0 + (p1 - p0) * s, np.full_like(s, t0)]),
        np.column_stack([np.full_like(s, p1), t0 + (t1 - t0) * s]),
        np.column_stack([p1 + (p0 - p1) * s, np.full_like(s, t1)]),
        np.column_stack([np.full_like(s, p0), t1 + (t0 - t1) * s]),
    ]
    return LoopPath(np.vstack(sides + [np.array([[p0, t0]])]))


def ellipse_loop(center, radii, segments: int = 256) -> LoopPath:
    s = np.linspace(0.0, 2 * np.pi, segments + 1)
    pts = np.column_stack([center[0] + radii[0] * np.cos(s), center[1] + radii[1] * np.sin(s)])
    pts[-1] = pts[0]
    return LoopPath(pts)


def back_and_forth_loop(start, end, segments: int = 64) -> LoopPath:
    """Go from ``start`` to ``end`` and retrace the same segment back."""
    s = np.linspace(0.0, 1.0, segments // 2 + 1)
    start, end = np.asarray(start, float), np.asarray(end, float)
    out = start + np.outer(s, end - start)
    return LoopPath(np.vstack([out, out[-2::-1]]))


def transfer_rectangle(sys: SpinSystem, m: float, theta0: float, fraction: float = 1.0):
    """``(phi_range, theta_range)`` of the pair-rotating rectangle.

    Width ``pi / (rho sin(theta0))`` in ``phi`` and height
    ``fraction * pi / (2 rho)`` in ``theta``; ``fraction=1`` moves
    ``|j,m>`` into ``|j,m+1>``, ``fraction=0.5`` makes an equal superposition.
    """
    rho = pair_coupling(sys, m)
    if abs(np.sin(theta0)) < 1e-12 or rho == 0:
        raise ValueError("transfer rectangle needs sin(theta0) != 0 and m < j")
    return (0.0, np.pi / (rho * np.sin(theta0))), (theta0, theta0 + fraction * np.pi / (2 * rho))


@dataclass(frozen=True)
class Holonomy:
    matrix: np.ndarray
    method: str
    leakage: float | None = None
    info: dict = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def phase(self) -> float:
        """Phase of the 1x1 holonomy, or of the determinant for n > 1."""
        if self.n == 1:
            return float(np.angle(self.matrix[0, 0]))
        return float(np.angle(np.linalg.det(self.matrix)))

    @property
    def eigenphases(self) -> np.ndarray:
        return np.sort(np.angle(np.linalg.eigvals(self.matrix)))

    def unitarity_error(self) -> float:
        eye = np.eye(self.n)
        return float(np.abs(self.matrix.conj().T @ self.matrix - eye).max())

    def distance(self, other) -> float:
        other = other.matrix if isinstance(other, Holonomy) else np.asarray(other)
        return float(np.linalg.norm(self.matrix - other))


def expm_antihermitian(x: np.ndarray) -> np.ndarray:
    """Batched ``exp(X)`` for anti-Hermitian stacks of shape (..., n, n)."""
    herm = 1j * x
    herm = 0.5 * (herm + np.swapaxes(herm.conj(), -1, -2))
    evals, vecs = np.linalg.eigh(herm)
    return (vecs * np.exp(-1j * evals)[..., None, :]) @ np.swapaxes(vecs.conj(), -1, -2)


def ordered_product(stack: np.ndarray) -> np.ndarray:
    """``stack[-1] @ ... @ stack[0]`` by pairwise reduction."""
    mats = np.asarray(stack)
    n = mats.shape[-1]
    if mats.shape[0] == 0:
        return np.eye(n, dtype=complex)
    while mats.shape[0] > 1:
        if mats.shape[0] % 2:
            mats = np.concatenate([mats, np.eye(n, dtype=mats.dtype)[None]])
        mats = mats[1::2] @ mats[0::2]
    return mats[0]


def _frame_closure(connection, winding_angle, sign):
    if connection.m_values is None or winding_angle == 0:
        return np.eye(connection.n, dtype=complex)
    m = np.asarray(connection.m_values)
    return np.diag(np.exp(-sign * 1j * winding_angle * m))


def holonomy_path_ordered(connection: ConnectionField, loop: LoopPath, sign: int = -1) -> Holonomy:
    """Ordered product of segment exponentials ``exp(sign (A_phi dphi + A_theta dtheta))``.

    The connection is evaluated at segment midpoints.  When the loop winds in
    ``phi`` the frame ``U(phi, theta)`` itself does not return to its start
    and the ordered product is multiplied by ``<frame(start)|frame(end)>``.
    """
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 or -1")
    if not loop.closed:
        raise OpenLoopError(f"loop does not close: start {loop.points[0]}, end {loop.points[-1]}")
    pts = loop.points
    mid = 0.5 * (pts[1:] + pts[:-1])
    step = np.diff(pts, axis=0)
    a_phi, a_theta = connection(mid[:, 0], mid[:, 1])
    gen = sign * (a_phi * step[:, 0, None, None] + a_theta * step[:, 1, None, None])
    product = ordered_product(expm_antihermitian(gen))
    closure = _frame_closure(connection, pts[-1, 0] - pts[0, 0], sign)
    return Holonomy(closure @ product, "path_ordered", info={"segments": loop.segments, "sign": sign})


def holonomy_closed_form(sys: SpinSystem, m: float, theta0: float, theta1: float, sign: int = -1) -> Holonomy:
    """Large-rho holonomy of the pair-rotating rectangle.

    ``exp{-sign' i (cos theta1 - cos theta0) [(m + 1/2) I - (rho / sin theta0) sigma_y]}``
    with ``sign' = +1`` for ``sign=+1`` transport and ``-1`` for the physical
    (``sign=-1``) transport; ``sigma_y = [[0, -i], [i, 0]]`` in the ordered
    basis ``(|j,m>, |j,m+1>)``.  Valid when the ``theta`` side is short
    compared with ``theta0`` and ``rho >> 1``.
    """
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 or -1")
    s0 = np.sin(theta0)
    if abs(s0) < 1e-12:
        raise ValueError("closed-form holonomy is singular at sin(theta0) = 0")
    rho = pair_coupling(sys, m)
    sigma_y = np.array([[0, -1j], [1j, 0]])
    gen = (m + 0.5) * np.eye(2) - (rho / s0) * sigma_y
    arg = -sign * 1j * (np.cos(theta1) - np.cos(theta0)) * gen
    return Holonomy(expm_antihermitian(arg), "closed_form", info={"rho": rho, "sign": sign})


def holonomy_stokes(
    connection: ConnectionField,
    phi_range,
    theta_range,
    grid=(512, 512),
    sign: int = -1,
    h: float = 1e-5,
) -> Holonomy:
    """Holonomy of an axis-aligned rectangle from the curvature flux.

    The rectangle is the one of :func:`rectangle_loop` with base point
    ``(phi0, theta0)``.  Each curvature sample is carried back to the base
    point by the lasso transport ``L`` (up the ``phi = phi0`` edge, then
    along the row) and the conjugated flux ``L^-1 F L`` is exponentiated
    row by row, ordered in ``theta``.  The curvature matching the transport
    ``P exp(sign integral A)`` is ``sign (d_phi A_theta - d_theta A_phi) +
    [A_theta, A_phi]``, taken by central differences with step ``h``.
    """
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 or -1")
    (x0, x1), (y0, y1) = phi_range, theta_range
    nx, ny = grid
    if nx < 1 or ny < 1:
        raise ValueError("grid must have positive size")
    dx, dy = (x1 - x0) / nx, (y1 - y0) / ny
    n = connection.n
    if dy == 0 or dx == 0:
        return Holonomy(np.eye(n, dtype=complex), "stokes", info={"grid": (nx, ny)})
    xc = x0 + (np.arange(nx) + 0.5) * dx
    yc = y0 + (np.arange(ny) + 0.5) * dy

    # transport up the left edge to each row centre
    y_nodes = np.concatenate([[y0], yc])
    y_mid = 0.5 * (y_nodes[1:] + y_nodes[:-1])
    _, a_theta = connection(np.full(ny, x0), y_mid)
    up_steps = expm_antihermitian(sign * a_theta * np.diff(y_nodes)[:, None, None])
    lasso = np.empty((ny, n, n), dtype=complex)
    acc = np.eye(n, dtype=complex)
    for k in range(ny):
        acc = up_steps[k] @ acc
        lasso[k] = acc

    flux = np.zeros((ny, n, n), dtype=complex)
    x_prev = x0
    for i in range(nx):
        xm = np.full(ny, 0.5 * (x_prev + xc[i]))
        a_phi, _ = connection(xm, yc)
        lasso = expm_antihermitian(sign * a_phi * (xc[i] - x_prev)) @ lasso
        x_prev = xc[i]
        xs = np.full(ny, xc[i])
        a_phi, a_theta = connection(xs, yc)
        d_phi_a_theta, d_theta_a_phi = _derivatives(connection, xs, yc, h)
        curv = sign * (d_phi_a_theta - d_theta_a_phi) + a_theta @ a_phi - a_phi @ a_theta
        flux += np.swapaxes(lasso.conj(), -1, -2) @ curv @ lasso
    flux *= dx * dy
    return Holonomy(ordered_product(expm_antihermitian(flux)), "stokes", info={"grid": (nx, ny), "sign": sign})
