"""Adiabatic Schroedinger propagation and geometric-phase extraction.

The propagator is piecewise constant: each step applies
``exp(-i H(t_k + dt/2) dt)`` exactly through the eigendecomposition of the
midpoint Hamiltonian, so every step is unitary to round-off.

Phase convention: a stationary state evolves as ``exp(-i E t)``, so the
dynamical phase is ``-integral <psi|H|psi> dt`` and

    total = dynamical + geometric.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg
from scipy.linalg import eigh_tridiagonal

from .geometry import (
    DegenerateSubspace,
    Holonomy,
    berry_phase_closed,
    find_degenerate_subspace,
    phase_distance,
    wrap_phase,
)
from .hamiltonian import ReducedParams, build_hamiltonian, h0_energies
from .spin import SpinSystem, fock_map, rotation_u, rotation_y

NORM_TOL = 1e-10
CHUNK = 4096
CYCLIC_OVERLAP = 0.99


class NonCyclicEvolutionError(RuntimeError):
    def __init__(self, overlap: float):
        super().__init__(f"evolution is not cyclic: |<psi(0)|psi(T)>| = {overlap:.6f} < {CYCLIC_OVERLAP}")
        self.overlap = overlap


class SubspaceLeakageError(RuntimeError):
    def __init__(self, leakage: float, tol: float):
        super().__init__(f"population leaked out of the degenerate subspace: {leakage:.3e} > {tol:.1e}")
        self.leakage = leakage


class DegeneracyError(ValueError):
    pass


def linear_profile(u):
    return u


def smooth_profile(u):
    """Monotone ramp on [0, 1] with zero slope at both ends."""
    return u - np.sin(2 * np.pi * u) / (2 * np.pi)


PROFILES = {"linear": linear_profile, "smooth": smooth_profile}


def polyline_path(vertices, weights=None, profile="linear") -> Callable[[float], tuple[float, float]]:
    """Map ``s`` in [0, 1] onto a polyline through ``vertices`` in (phi, theta).

    ``weights`` sets the share of time spent on each edge (equal by default);
    ``profile`` shapes the motion along each edge, either one name for all
    edges or a list with one entry per edge.
    """
    verts = np.asarray(vertices, dtype=float)
    nedge = len(verts) - 1
    if nedge < 1:
        raise ValueError("a path needs at least two vertices")
    w = np.ones(nedge) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (nedge,) or np.any(w <= 0):
        raise ValueError("weights must be positive, one per edge")
    bounds = np.concatenate([[0.0], np.cumsum(w) / w.sum()])
    shapes = [profile] * nedge if isinstance(profile, str) or callable(profile) else list(profile)
    if len(shapes) != nedge:
        raise ValueError("need one profile per edge")
    shapes = [PROFILES[p] if isinstance(p, str) else p for p in shapes]

    def path(s):
        s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
        flat = np.atleast_1d(s)
        k = np.minimum(np.searchsorted(bounds, flat, side="right") - 1, nedge - 1)
        u = (flat - bounds[k]) / (bounds[k + 1] - bounds[k])
        for edge in np.unique(k):
            sel = k == edge
            u[sel] = shapes[edge](u[sel])
        p = verts[k] + u[:, None] * (verts[k + 1] - verts[k])
        if s.ndim == 0:
            return float(p[0, 0]), float(p[0, 1])
        return p[:, 0], p[:, 1]

    return path


@dataclass(frozen=True)
class UniformSweep:
    """Path with fixed ``theta`` and ``phi = phi0 + 2 pi turns s``."""

    theta: float
    turns: float = 1.0
    phi0: float = 0.0

    def __call__(self, s):
        phi = self.phi0 + 2 * np.pi * self.turns * np.asarray(s, dtype=float)
        if phi.ndim == 0:
            return float(phi), float(self.theta)
        return phi, np.full_like(phi, self.theta)


def rectangle_vertices(phi_range, theta_range) -> np.ndarray:
    (p0, p1), (t0, t1) = phi_range, theta_range
    return np.array([[p0, t0], [p1, t0], [p1, t1], [p0, t1], [p0, t0]])


@dataclass(frozen=True)
class FrameSchedule:
    """``H(t) = U(phi(t), theta(t)) (alpha0 Jz + beta0 Jz^2) U^dagger``.

    ``path`` maps the normalized time ``s = t / duration`` onto ``(phi, theta)``.
    """

    alpha0: float
    beta0: float
    path: Callable[[float], tuple[float, float]]
    duration: float
    steps: int

    def __post_init__(self):
        _check_grid(self.duration, self.steps)

    def controls(self, t: float) -> tuple[float, float]:
        return self.path(t / self.duration)

    def hamiltonian(self, sys: SpinSystem, t: float) -> np.ndarray:
        u = rotation_u(sys, *self.controls(t))
        return (u * h0_energies(sys, self.alpha0, self.beta0)) @ u.conj().T

    def eigensystems(self, sys: SpinSystem, times):
        """Yield ``(evals, phase, basis, basis_h)`` with
        ``H(t) = P B diag(evals) B^dagger P^dagger`` and ``P = diag(phase)``
        for every ``t`` in ``times``."""
        energies = h0_energies(sys, self.alpha0, self.beta0)
        m = sys.m_values
        last_theta, basis = None, None
        for start in range(0, len(times), CHUNK):
            phi, theta = self.path(np.asarray(times[start : start + CHUNK]) / self.duration)
            theta = np.broadcast_to(theta, np.shape(phi))
            phases = np.exp(-1j * np.multiply.outer(phi, m))
            for ph, th in zip(phases, theta):
                if th != last_theta:
                    rot = rotation_y(sys, th)
                    last_theta, basis = th, (rot, rot.conj().T.copy())
                yield energies, ph, *basis

    def is_cyclic(self, tol: float = 1e-9) -> bool:
        (p0, t0), (p1, t1) = self.path(0.0), self.path(1.0)
        turns = (p1 - p0) / (2 * np.pi)
        return abs(t1 - t0) <= tol and abs(turns - round(turns)) <= tol

    @classmethod
    def sweep(cls, alpha0, theta, duration, steps, beta0=0.0, turns=1):
        """Constant ``theta`` with ``phi`` advancing uniformly, ``phi = 2 pi turns t / T``."""
        return cls(alpha0, beta0, UniformSweep(theta, turns), duration, steps)


@dataclass(frozen=True)
class ReducedSchedule:
    """``H(t) = alpha Jz + beta Jz^2 + gamma (cos(phi) Jx + sin(phi) Jy)`` with
    ``controls(t) -> ReducedParams``."""

    controls: Callable[[float], ReducedParams]
    duration: float
    steps: int

    def __post_init__(self):
        _check_grid(self.duration, self.steps)

    def hamiltonian(self, sys: SpinSystem, t: float) -> np.ndarray:
        return build_hamiltonian(sys, self.controls(t))

    def eigensystems(self, sys: SpinSystem, times):
        m = sys.m_values
        half_ladder = 0.5 * np.sqrt(sys.j * (sys.j + 1) - m[:-1] * (m[:-1] + 1))
        for t in times:
            r = self.controls(t)
            diag = r.alpha * m + r.beta * m**2
            if not (np.all(np.isfinite(diag)) and np.isfinite(r.gamma) and np.isfinite(r.phi)):
                raise ValueError(f"non-finite Hamiltonian at t={t}")
            # H = D(phi) H_real D(phi)^dagger, D = exp(-i phi Jz)
            if sys.dim == 1:
                evals, vecs = diag, np.ones((1, 1))
            else:
                evals, vecs = eigh_tridiagonal(diag, r.gamma * half_ladder)
            yield evals, np.exp(-1j * r.phi * m), vecs, vecs.T

    def is_cyclic(self, tol: float = 1e-9) -> bool:
        a, b = self.controls(0.0), self.controls(self.duration)
        turns = (b.phi - a.phi) / (2 * np.pi)
        same = np.allclose([a.alpha, a.beta, a.gamma], [b.alpha, b.beta, b.gamma], atol=tol, rtol=0)
        return same and abs(turns - round(turns)) <= tol

    @classmethod
    def static(cls, params: ReducedParams, duration, steps):
        return cls(lambda t: params, duration, steps)


def _orthonormalize(u):
    """Nearest unitary to ``u``, refined in extended precision.

    A constant-theta sweep reuses one rotation for every step, so any bias in
    ``R^dagger R - I`` accumulates linearly in the norm.
    """
    w, _, vh = np.linalg.svd(u)
    x = (w @ vh).astype(np.clongdouble)
    x = x @ (3 * np.eye(len(x)) - x.conj().T @ x) / 2
    return x.astype(complex)


def _check_grid(duration, steps):
    if not np.isfinite(duration) or duration <= 0:
        raise ValueError(f"duration must be positive, got {duration}")
    if steps < 100:
        raise ValueError(f"a schedule needs at least 100 steps, got {steps}")


@dataclass
class Trajectory:
    """Summary of one propagation.

    ``states`` holds snapshots every ``store_every`` steps (the first and last
    state are always kept) and ``energy_integral`` is ``sum_k <H>_k dt`` with
    ``<H>_k = <psi|H(t_k + dt/2)|psi>``, which step k conserves exactly.
    ``energies`` lists the ``<H>_k`` themselves when they were recorded.
    Multi-column initial states propagate column by column in one pass.
    """

    dt: float
    steps: int
    times: np.ndarray
    states: np.ndarray
    energy_integral: np.ndarray | float
    norm_error: float
    energies: np.ndarray | None = None

    @property
    def initial(self) -> np.ndarray:
        return self.states[0]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    @property
    def duration(self) -> float:
        return self.dt * self.steps


def propagate(
    sys: SpinSystem, schedule, psi0, store_every: int | None = None, method: str = "auto"
) -> Trajectory:
    """Midpoint piecewise-constant propagation of ``psi0`` along ``schedule``.

    Step k applies ``exp(-i H(t_k + dt/2) dt)`` exactly.  ``psi0`` is a
    normalized vector of length ``sys.dim`` or a matrix whose columns are
    normalized states.

    ``method="stepwise"`` loops over the steps.  For a :class:`FrameSchedule`
    whose path is a :class:`UniformSweep`, every step is the same map in the
    co-rotating frame, and ``method="auto"`` evaluates the identical step
    product through one eigendecomposition of that map (``energies`` is then
    not recorded).
    """
    psi = np.array(psi0, dtype=complex)
    if psi.shape[0] != sys.dim:
        raise ValueError(f"state has dimension {psi.shape[0]}, expected {sys.dim}")
    norms = np.linalg.norm(psi, axis=0)
    if np.any(np.abs(norms - 1) > NORM_TOL):
        raise ValueError(f"initial state is not normalized (norm {norms})")
    if method not in ("auto", "stepwise"):
        raise ValueError(f"unknown propagation method {method!r}")
    single = psi.ndim == 1
    if single:
        psi = psi[:, None]
    steps = schedule.steps
    stride = steps if store_every is None else max(1, int(store_every))
    marks = sorted(set(range(stride, steps + 1, stride)) | {steps})
    if method == "auto" and isinstance(schedule, FrameSchedule) and isinstance(schedule.path, UniformSweep):
        states, integral, energies = _sweep_product(sys, schedule, psi, marks)
    else:
        states, integral, energies = _step_loop(sys, schedule, psi, marks)
    dt = schedule.duration / steps
    states = np.array(states)
    if single:
        states, integral = states[..., 0], float(integral[0])
        energies = None if energies is None else energies[:, 0]
    norm_error = float(np.abs(np.linalg.norm(states, axis=1) - 1).max())
    times = np.array([0.0] + [k * dt for k in marks])
    return Trajectory(dt, steps, times, states, integral, norm_error, energies)


def _step_loop(sys, schedule, psi, marks):
    steps = schedule.steps
    dt = schedule.duration / steps
    energies = np.empty((steps, psi.shape[1]))
    states = [psi.copy()]
    marks = set(marks)
    midpoints = (np.arange(steps) + 0.5) * dt
    last_evals = None
    for k, (evals, phase, basis, basis_h) in enumerate(schedule.eigensystems(sys, midpoints)):
        if evals is not last_evals:
            last_evals, kick = evals, np.exp(-1j * evals * dt)[:, None]
        phase = phase[:, None]
        c = basis_h @ (phase.conj() * psi)
        weight = c.real**2 + c.imag**2
        # normalized so round-off drift in the norm does not leak into the
        # (possibly huge) dynamical phase
        energies[k] = (evals @ weight) / weight.sum(axis=0)
        psi = phase * (basis @ (kick * c))
        if k + 1 in marks:
            states.append(psi.copy())
    return states, energies.sum(axis=0) * dt, energies


def _sweep_product(sys, schedule, psi, marks):
    """Step product for a uniform sweep, without looping over steps.

    With ``D(phi) = exp(-i phi Jz)``, ``W = R exp(-i E dt) R^dagger`` and the
    sweep increment ``d`` per step, step k is ``A D(k d) W D(-k d) A^dagger``
    where ``A = D(phi0 + d/2)``.  After k steps the state is
    ``A D(k d) M^k A^dagger psi0`` with ``M = D(-d) W``, and the energy of
    step k is ``<chi_k|R E R^dagger|chi_k>`` with ``chi_k = M^k A^dagger psi0``.
    """
    path, steps = schedule.path, schedule.steps
    dt = schedule.duration / steps
    m = sys.m_values
    d = 2 * np.pi * path.turns / steps
    energies = h0_energies(sys, schedule.alpha0, schedule.beta0)
    rot = _orthonormalize(rotation_y(sys, path.theta))
    w = (rot * np.exp(-1j * energies * dt)) @ rot.conj().T
    step_map = np.exp(1j * d * m)[:, None] * w
    tri, vecs = scipy.linalg.schur(step_map, output="complex")
    omega = np.angle(np.diag(tri))
    start = path.phi0 + d / 2
    coeff = vecs.conj().T @ (np.exp(1j * start * m)[:, None] * psi)
    states = [psi.copy()]
    for k in marks:
        chi = vecs @ (np.exp(1j * k * omega)[:, None] * coeff)
        states.append(np.exp(-1j * (start + k * d) * m)[:, None] * chi)
    # sum_k exp(i k delta) for every pair of quasi-energies
    delta = np.angle(np.exp(1j * np.subtract.outer(omega, omega)).T)
    half = np.sin(delta / 2)
    flat = np.abs(half) < 1e-15
    ratio = np.where(flat, steps, np.sin(steps * delta / 2) / np.where(flat, 1.0, half))
    kernel = np.exp(1j * (steps - 1) * delta / 2) * ratio
    g = vecs.conj().T @ ((rot * energies) @ rot.conj().T) @ vecs
    total = np.einsum("ak,bk,ab,ab->k", coeff.conj(), coeff, g, kernel).real
    integral = total / np.sum(np.abs(coeff) ** 2, axis=0) * dt
    return states, integral, None


@dataclass(frozen=True)
class PhaseDecomposition:
    """``total`` and ``geometric`` wrapped to (-pi, pi]; ``dynamical`` raw."""

    total: float
    dynamical: float
    geometric: float
    overlap: float


def extract_phases(trajectory: Trajectory, schedule=None):
    """Split the cyclic phase of each propagated state.

    ``total = arg <psi(0)|psi(T)>``, ``dynamical = -sum <H> dt`` over the
    step midpoints and ``geometric = total - dynamical``.  Returns one
    :class:`PhaseDecomposition`, or a list for multi-column trajectories.
    """
    if schedule is not None and not schedule.is_cyclic():
        raise ValueError("schedule does not return to its starting controls")
    first, last = trajectory.initial, trajectory.final
    single = first.ndim == 1
    if single:
        first, last = first[:, None], last[:, None]
    integral = np.atleast_1d(trajectory.energy_integral)
    overlaps = np.einsum("ik,ik->k", first.conj(), last)
    out = []
    for ov, energy in zip(overlaps, integral):
        if abs(ov) < CYCLIC_OVERLAP:
            raise NonCyclicEvolutionError(float(abs(ov)))
        total = float(np.angle(ov))
        dynamical = float(-energy)
        out.append(PhaseDecomposition(total, dynamical, float(wrap_phase(total - dynamical)), float(abs(ov))))
    return out[0] if single else out


def adiabatic_berry_phases(
    sys: SpinSystem, m_values, theta: float, duration: float, steps: int, alpha0: float = 1.0, beta0: float = 0.0
):
    """Geometric phases of ``U(0, theta)|j, m>`` after one uniform ``phi`` turn.

    Returns ``(phases, trajectory)`` with one :class:`PhaseDecomposition` per m.
    """
    schedule = FrameSchedule.sweep(alpha0, theta, duration, steps, beta0=beta0)
    idx = [sys.index(m) for m in m_values]
    psi0 = rotation_u(sys, 0.0, theta)[:, idx]
    traj = propagate(sys, schedule, psi0)
    return extract_phases(traj, schedule), traj


@dataclass
class ConvergenceStudy:
    durations: list
    values: list
    changes: list
    converged: bool
    extras: list = field(default_factory=list)

    @property
    def value(self):
        return self.values[-1]

    @property
    def duration(self):
        return self.durations[-1]


def converge_duration(run, duration0, steps0, tol=1e-3, max_doublings=10, metric=None) -> ConvergenceStudy:
    """Double the duration (and steps) until successive results differ by < ``tol``.

    ``run(duration, steps)`` returns ``(value, extra)``; ``value`` may be an
    array of phases, compared on the circle by default.  A run that raises
    :class:`NonCyclicEvolutionError` (too fast to be adiabatic) is recorded
    as NaN and the ladder moves on.
    """
    metric = metric or (lambda a, b: float(np.max(phase_distance(a, b))))
    durations, values, changes, extras = [], [], [], []
    duration, steps = duration0, steps0
    for _ in range(max_doublings + 1):
        try:
            value, extra = run(duration, steps)
        except NonCyclicEvolutionError as err:
            value, extra = np.nan, err.overlap
        durations.append(duration)
        values.append(value)
        extras.append(extra)
        if len(values) > 1:
            prev, cur = values[-2], values[-1]
            bad = np.any(np.isnan(prev)) or np.any(np.isnan(cur))
            changes.append(np.inf if bad else metric(cur, prev))
            if changes[-1] < tol:
                return ConvergenceStudy(durations, values, changes, True, extras)
        duration, steps = 2 * duration, 2 * steps
    return ConvergenceStudy(durations, values, changes, False, extras)


def converged_berry_phases(
    sys, m_values, theta, duration0=400.0, steps0=800, alpha0=1.0, beta0=0.0, tol=1e-3, max_doublings=14
) -> ConvergenceStudy:
    """Adiabatic Berry phases with the sweep time doubled until stable.

    The defaults keep ``alpha0 dt = 0.5`` for ``alpha0 = 1``.
    """

    def run(duration, steps):
        phases, traj = adiabatic_berry_phases(sys, m_values, theta, duration, steps, alpha0, beta0)
        return np.array([p.geometric for p in phases]), traj.norm_error

    return converge_duration(run, duration0, steps0, tol, max_doublings)


def _fock_populations(sys, psi):
    probs = np.abs(psi) ** 2
    return [
        {"n_a": fock_map(sys, m).n_a, "n_b": fock_map(sys, m).n_b, "probability": float(p)}
        for m, p in zip(sys.m_values, probs)
    ]


@dataclass
class DetectionReport:
    variant: str
    theta: float
    loop_duration: float
    populations: list
    overlap_top: float
    mode_b_population: float
    atoms: int
    ideal_overlap_top: float
    ideal_mode_b_population: float
    dynamical_turns: float
    norm_error: float
    warnings: list = field(default_factory=list)
    final_state: np.ndarray | None = field(default=None, repr=False)


def _frame_change(sys, start, end):
    """Unitary taking the frame at ``start`` to the frame at ``end`` (no phases)."""
    return rotation_u(sys, *end) @ rotation_u(sys, *start).conj().T


def detection_protocol(
    sys: SpinSystem,
    theta: float = np.pi / 3,
    loop_duration: float = 2 * np.pi * 400,
    steps: int = 20000,
    alpha0: float = 1.0,
    variant: str = "instantaneous",
    ramp_fraction: float = 0.1,
    prep_duration: float | None = None,
    prep_steps: int | None = None,
) -> DetectionReport:
    """Interferometric readout of the Berry phase on ``|j, j>``.

    Prepare ``|j, j>``, rotate it to ``U(0, pi/2)|j, j>``, carry the field
    around the cone of half-angle ``theta`` (tilt to ``theta``, one ``phi``
    turn, tilt back), rotate back with ``U(0, pi/2)^dagger`` and read out the
    two-mode populations.  The ``phi`` turn is always true time evolution.

    ``variant="instantaneous"`` applies the tilts and the quarter-turn
    rotations as exact frame changes.  ``variant="adiabatic"`` runs every
    tilt as a smooth ramp of the Hamiltonian; the loop then spends
    ``ramp_fraction`` of ``loop_duration`` on each tilt.

    ``alpha0 * loop_duration`` should be a multiple of ``2 pi`` so the
    dynamical phases of all levels coincide; otherwise a warning is recorded.
    """
    if variant not in ("instantaneous", "adiabatic"):
        raise ValueError(f"unknown variant {variant!r}")
    warnings = []
    turns = alpha0 * loop_duration / (2 * np.pi)
    if abs(turns - round(turns)) > 1e-6:
        warnings.append(
            f"alpha0 * loop_duration = {alpha0 * loop_duration:.6g} is not a multiple of 2 pi; "
            "dynamical phases do not cancel"
        )
    top = sys.basis_state(sys.j)
    norm_error = 0.0
    if variant == "instantaneous":
        psi = rotation_u(sys, 0.0, np.pi / 2) @ top
        psi = _frame_change(sys, (0.0, 0.0), (0.0, theta)) @ psi
        traj = propagate(sys, FrameSchedule.sweep(alpha0, theta, loop_duration, steps), psi)
        psi = _frame_change(sys, (2 * np.pi, theta), (2 * np.pi, 0.0)) @ traj.final
        psi = rotation_u(sys, 0.0, np.pi / 2).conj().T @ psi
        norm_error = traj.norm_error
    else:
        prep_duration = prep_duration or ramp_fraction * loop_duration
        prep_steps = prep_steps or max(100, int(ramp_fraction * steps))
        ramp = FrameSchedule(alpha0, 0.0, polyline_path([(0, 0), (0, np.pi / 2)], profile="smooth"), prep_duration, prep_steps)
        traj = propagate(sys, ramp, top)
        norm_error = traj.norm_error
        verts = [(0.0, 0.0), (0.0, theta), (2 * np.pi, theta), (2 * np.pi, 0.0)]
        weights = [ramp_fraction, 1 - 2 * ramp_fraction, ramp_fraction]
        path = polyline_path(verts, weights, profile=["smooth", "linear", "smooth"])
        loop = FrameSchedule(alpha0, 0.0, path, loop_duration, steps)
        traj = propagate(sys, loop, traj.final)
        norm_error = max(norm_error, traj.norm_error)
        unramp = FrameSchedule(alpha0, 0.0, polyline_path([(0, np.pi / 2), (0, 0)], profile="smooth"), prep_duration, prep_steps)
        traj = propagate(sys, unramp, traj.final)
        norm_error = max(norm_error, traj.norm_error)
        psi = traj.final

    # ideal readout: each |m> picks up the closed-form Berry phase
    berry = np.array([berry_phase_closed(m, theta).raw for m in sys.m_values])
    quarter = rotation_u(sys, 0.0, np.pi / 2)
    ideal = quarter.conj().T @ (np.exp(1j * berry) * (quarter @ top))
    n_b = np.array([fock_map(sys, m).n_b for m in sys.m_values])
    return DetectionReport(
        variant=variant,
        theta=theta,
        loop_duration=loop_duration,
        populations=_fock_populations(sys, psi),
        overlap_top=float(abs(psi[-1]) ** 2),
        mode_b_population=float(n_b @ np.abs(psi) ** 2),
        atoms=int(round(2 * sys.j)),
        ideal_overlap_top=float(abs(ideal[-1]) ** 2),
        ideal_mode_b_population=float(n_b @ np.abs(ideal) ** 2),
        dynamical_turns=float(turns),
        norm_error=norm_error,
        warnings=warnings,
        final_state=psi,
    )


def adiabatic_holonomy(
    sys: SpinSystem,
    alpha0: float,
    beta0: float,
    m: float,
    vertices,
    duration: float,
    steps: int,
    profile: str = "smooth",
    leakage_tol: float | None = 1e-3,
) -> Holonomy:
    """Holonomy of the ``{m, m+1}`` level pair measured by time evolution.

    Both frame states ``U(phi0, theta0)|j,m>`` and ``U(phi0, theta0)|j,m+1>``
    are propagated around the closed polyline ``vertices`` under the rotated
    degenerate Hamiltonian.  The common factor ``exp(-i E T)`` is removed and
    the 2x2 overlap matrix with the initial frame is returned; ``leakage`` is
    the largest population lost from the pair.
    """
    if beta0 == 0 or abs(alpha0 / beta0 + (2 * m + 1)) > 1e-12:
        raise DegeneracyError(f"alpha0/beta0 must equal -(2m+1) = {-(2 * m + 1)} for the pair at m={m}")
    subspace = find_degenerate_subspace(sys, alpha0, beta0, m)
    if subspace.m_values != DegenerateSubspace.pair(m).m_values:
        raise DegeneracyError(f"expected degenerate pair {(m, m + 1)}, found {subspace.m_values}")
    verts = np.asarray(vertices, dtype=float)
    if not np.allclose(verts[0], verts[-1], atol=1e-12, rtol=0):
        raise ValueError("holonomy path must end where it starts")
    schedule = FrameSchedule(alpha0, beta0, polyline_path(verts, profile=profile), duration, steps)
    idx = [sys.index(mv) for mv in subspace.m_values]
    frame0 = rotation_u(sys, *verts[0])[:, idx]
    traj = propagate(sys, schedule, frame0)
    gamma = frame0.conj().T @ traj.final * np.exp(1j * subspace.energy * duration)
    leakage = max(0.0, float(np.max(1 - np.sum(np.abs(gamma) ** 2, axis=0))))
    if leakage_tol is not None and leakage > leakage_tol:
        raise SubspaceLeakageError(leakage, leakage_tol)
    return Holonomy(gamma, "adiabatic", leakage, info={"norm_error": traj.norm_error, "duration": duration})
