import numpy as np
import pytest

from holobec.evolution import (
    DegeneracyError,
    FrameSchedule,
    NonCyclicEvolutionError,
    ReducedSchedule,
    SubspaceLeakageError,
    UniformSweep,
    adiabatic_berry_phases,
    adiabatic_holonomy,
    converged_berry_phases,
    detection_protocol,
    extract_phases,
    polyline_path,
    propagate,
    rectangle_vertices,
)
from holobec.geometry import (
    DegenerateSubspace,
    analytic_connection,
    berry_phase_closed,
    holonomy_path_ordered,
    phase_distance,
    rectangle_loop,
    transfer_rectangle,
    wrap_phase,
)
from holobec.hamiltonian import ReducedParams, build_hamiltonian, degenerate_h0_params
from holobec.spin import SpinSystem, eigh, is_unitary, rotation_u


def frame_states(sys, theta, ms):
    return rotation_u(sys, 0.0, theta)[:, [sys.index(m) for m in ms]]


class TestSchedules:
    def test_minimum_steps(self):
        with pytest.raises(ValueError):
            FrameSchedule.sweep(1.0, 0.5, 10.0, 99)
        with pytest.raises(ValueError):
            ReducedSchedule.static(ReducedParams(1.0), -1.0, 200)

    def test_polyline(self):
        path = polyline_path([(0, 0), (1, 0), (1, 2)])
        assert path(0.0) == (0.0, 0.0)
        assert path(0.25) == pytest.approx((0.5, 0.0))
        assert path(0.75) == pytest.approx((1.0, 1.0))
        phi, theta = path(np.array([0.0, 0.5, 1.0]))
        assert np.allclose(phi, [0, 1, 1]) and np.allclose(theta, [0, 0, 2])

    def test_polyline_profiles(self):
        path = polyline_path([(0, 0), (1, 0), (2, 0)], weights=[1, 3], profile=["smooth", "linear"])
        assert path(0.125)[0] == pytest.approx(0.5)
        assert path(0.625)[0] == pytest.approx(1.5)
        with pytest.raises(ValueError):
            polyline_path([(0, 0), (1, 0)], profile=["smooth", "linear"])

    def test_cyclic_flags(self):
        assert FrameSchedule.sweep(1.0, 0.5, 100.0, 100).is_cyclic()
        assert FrameSchedule.sweep(1.0, 0.5, 100.0, 100, turns=2).is_cyclic()
        assert not FrameSchedule.sweep(1.0, 0.5, 100.0, 100, turns=0.5).is_cyclic()
        assert not FrameSchedule(1.0, 0.0, polyline_path([(0, 0), (1, 1)]), 10.0, 100).is_cyclic()
        assert ReducedSchedule.static(ReducedParams(1.0, 0.1, 0.2), 5.0, 100).is_cyclic()

    def test_frame_hamiltonian(self):
        s = SpinSystem(2)
        sched = FrameSchedule.sweep(1.0, 0.7, 10.0, 100)
        h = sched.hamiltonian(s, 2.5)
        r = ReducedParams.from_field(1.0, 0.7, phi=2 * np.pi * 0.25)
        assert np.abs(h - build_hamiltonian(s, r)).max() < 1e-12


class TestPropagate:
    def test_stationary_state(self):
        s = SpinSystem(3)
        r = ReducedParams(0.7, 0.2, 0.4)
        evals, vecs = eigh(build_hamiltonian(s, r))
        traj = propagate(s, ReducedSchedule.static(r, 30.0, 300), vecs[:, 2])
        assert np.abs(traj.final - np.exp(-1j * evals[2] * 30.0) * vecs[:, 2]).max() < 1e-10

    def test_diagonal_phase(self):
        s = SpinSystem(2)
        traj = propagate(s, ReducedSchedule.static(ReducedParams(1.3), 7.0, 100), s.basis_state(-1))
        assert np.allclose(traj.final, np.exp(-1j * 1.3 * -1 * 7.0) * s.basis_state(-1), atol=1e-12)

    def test_slow_sweep_is_adiabatic(self):
        s = SpinSystem(3)
        psi0 = frame_states(s, 1.0, [2])[:, 0]
        traj = propagate(s, FrameSchedule.sweep(1.0, 1.0, 2000.0, 4000), psi0)
        assert abs(np.vdot(psi0, traj.final)) > 0.999

    def test_non_normalized(self):
        s = SpinSystem(1)
        with pytest.raises(ValueError, match="normalized"):
            propagate(s, ReducedSchedule.static(ReducedParams(1.0), 1.0, 100), 2 * s.basis_state(0))

    def test_wrong_dimension(self):
        with pytest.raises(ValueError):
            propagate(SpinSystem(1), ReducedSchedule.static(ReducedParams(1.0), 1.0, 100), np.ones(2) / np.sqrt(2))

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_non_finite_controls(self):
        s = SpinSystem(1)

        class Bad:
            alpha, beta, gamma, phi = 1.0, np.inf, 0.0, 0.0

        sched = ReducedSchedule(lambda t: Bad(), 1.0, 100)
        with pytest.raises(ValueError, match="non-finite"):
            propagate(s, sched, s.basis_state(0))

    def test_norm_conserved(self):
        s = SpinSystem(10)
        psi0 = frame_states(s, 0.8, [3])[:, 0]
        sched = FrameSchedule(1.0, 0.1, polyline_path([(0, 0.8), (2, 1.4), (0, 0.8)]), 500.0, 20000)
        assert propagate(s, sched, psi0).norm_error < 1e-10

    def test_step_doubling(self):
        s = SpinSystem(3)
        psi0 = frame_states(s, 1.0, [1])[:, 0]
        a = propagate(s, FrameSchedule.sweep(1.0, 1.0, 200.0, 20000), psi0, method="stepwise")
        b = propagate(s, FrameSchedule.sweep(1.0, 1.0, 200.0, 40000), psi0, method="stepwise")
        assert np.abs(a.final - b.final).max() < 1e-6

    def test_snapshots(self):
        s = SpinSystem(1)
        traj = propagate(s, ReducedSchedule.static(ReducedParams(1.0), 10.0, 100), s.basis_state(0), store_every=25)
        assert np.allclose(traj.times, [0, 2.5, 5, 7.5, 10])
        assert traj.states.shape == (5, 3)

    @pytest.mark.parametrize("j,beta0,ms", [(10, 0.0, [0, 1, 10]), (1.5, 0.07, [0.5, 1.5]), (5, 0.07, [-5, 2])])
    def test_sweep_product_matches_step_loop(self, j, beta0, ms):
        s = SpinSystem(j)
        sched = FrameSchedule.sweep(1.0, 1.1, 4000.0, 12000, beta0=beta0)
        psi0 = frame_states(s, 1.1, ms)
        a = propagate(s, sched, psi0, store_every=1000)
        b = propagate(s, sched, psi0, store_every=1000, method="stepwise")
        assert np.abs(a.states - b.states).max() < 1e-10
        assert np.abs(a.energy_integral - b.energy_integral).max() < 1e-9
        assert np.allclose(b.energies.sum(axis=0) * b.dt, b.energy_integral)

    def test_reduced_drive_matches_frame(self):
        # a rotating linear drive is the same Hamiltonian as the rotated frame
        s = SpinSystem(2)
        theta, T = 0.9, 300.0
        reduced = ReducedSchedule(lambda t: ReducedParams.from_field(1.0, theta, phi=2 * np.pi * t / T), T, 3000)
        frame = FrameSchedule.sweep(1.0, theta, T, 3000)
        psi0 = frame_states(s, theta, [1])[:, 0]
        assert np.abs(propagate(s, reduced, psi0).final - propagate(s, frame, psi0).final).max() < 1e-9


class TestPhases:
    def test_berry_m1(self):
        study = converged_berry_phases(SpinSystem(1), [1], np.pi / 3)
        assert study.converged
        assert phase_distance(study.value[0], -np.pi) < 2e-3

    def test_m0(self):
        phases, _ = adiabatic_berry_phases(SpinSystem(2), [0], np.pi / 3, 4000.0, 8000)
        assert abs(phases[0].geometric) < 1e-3

    def test_static(self):
        s = SpinSystem(3)
        r = ReducedParams(0.9, 0.1, 0.3)
        _, vecs = eigh(build_hamiltonian(s, r))
        sched = ReducedSchedule.static(r, 40.0, 400)
        p = extract_phases(propagate(s, sched, vecs[:, 4]), sched)
        assert abs(p.geometric) < 1e-6

    def test_decomposition_identity(self):
        phases, _ = adiabatic_berry_phases(SpinSystem(2), [1, 2], 1.0, 800.0, 1600)
        for p in phases:
            assert phase_distance(p.total, p.dynamical + p.geometric) < 1e-12
            assert -np.pi < p.geometric <= np.pi

    def test_dynamical_sign(self):
        # exp(-i E t): a state at energy E accumulates dynamical phase -E T
        phases, _ = adiabatic_berry_phases(SpinSystem(2), [2], 0.0, 500.0, 1000, alpha0=1.5)
        assert phases[0].dynamical == pytest.approx(-1.5 * 2 * 500.0, rel=1e-12)

    def test_non_cyclic(self):
        s = SpinSystem(3)
        sched = ReducedSchedule.static(ReducedParams(0.0, 0.0, 1.0), np.pi / 2, 100)
        traj = propagate(s, sched, s.basis_state(3))
        with pytest.raises(NonCyclicEvolutionError) as err:
            extract_phases(traj)
        assert err.value.overlap < 0.99

    def test_open_schedule_rejected(self):
        s = SpinSystem(1)
        sched = FrameSchedule.sweep(1.0, 0.5, 100.0, 100, turns=0.5)
        with pytest.raises(ValueError):
            extract_phases(propagate(s, sched, s.basis_state(0)), sched)

    def test_error_shrinks_with_duration(self):
        s = SpinSystem(5)
        errs = []
        for T in (2000.0, 4000.0, 8000.0):
            phases, _ = adiabatic_berry_phases(s, [1, 5], np.pi / 3, T, int(2 * T))
            errs.append(max(phase_distance(p.geometric, berry_phase_closed(m, np.pi / 3).wrapped)
                            for p, m in zip(phases, [1, 5])))
        assert errs[1] / errs[0] < 1 and errs[2] / errs[1] < 1

    def test_half_integer(self):
        study = converged_berry_phases(SpinSystem(1.5), [0.5, 1.5], 1.0)
        ref = [berry_phase_closed(m, 1.0).wrapped for m in (0.5, 1.5)]
        assert np.max(phase_distance(study.value, ref)) < 2e-3

    def test_ladder_skips_non_cyclic_rungs(self):
        study = converged_berry_phases(SpinSystem(10), [10], np.pi / 2, duration0=5.0, steps0=100, max_doublings=8)
        assert np.isnan(study.values[0]).all() and np.isinf(study.changes[0])
        assert np.isfinite(study.values[-1]).all() and study.changes[-1] < study.changes[-2]


class TestDetection:
    @pytest.mark.parametrize("variant", ["instantaneous", "adiabatic"])
    def test_spin_one(self, variant):
        r = detection_protocol(SpinSystem(1), np.pi / 3, 2 * np.pi * 200, 20000, variant=variant)
        assert r.overlap_top < 0.01 and r.mode_b_population > 0.5 * r.atoms
        assert sum(p["probability"] for p in r.populations) == pytest.approx(1.0)
        assert not r.warnings

    def test_spin_five_improves_with_time(self):
        s = SpinSystem(5)
        overlaps = [
            detection_protocol(s, np.pi / 3, 2 * np.pi * n, 100 * n, variant="adiabatic").overlap_top for n in (5, 40)
        ]
        assert overlaps[1] < overlaps[0] and overlaps[1] < 0.01

    @pytest.mark.parametrize("variant", ["instantaneous", "adiabatic"])
    def test_flat_loop_returns(self, variant):
        r = detection_protocol(SpinSystem(5), 0.0, 2 * np.pi * 200, 20000, variant=variant)
        assert r.overlap_top > 1 - 1e-4 and r.mode_b_population < 1e-3

    def test_warns_on_dynamical_phase(self):
        r = detection_protocol(SpinSystem(1), np.pi / 3, 1000.0, 10000)
        assert r.warnings and "2 pi" in r.warnings[0]

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            detection_protocol(SpinSystem(1), variant="sudden")


class TestAdiabaticHolonomy:
    def setup_rectangle(self, j, m=0, fraction=1.0):
        s = SpinSystem(j)
        (p0, p1), (t0, t1) = transfer_rectangle(s, m, np.pi / 3, fraction)
        return s, (p0, p1), (t0, t1)

    def test_matches_path_ordered(self):
        s, pr, tr = self.setup_rectangle(10)
        a0, b0 = degenerate_h0_params(0, 1.0)
        h = adiabatic_holonomy(s, a0, b0, 0, rectangle_vertices(pr, tr), 4000.0, 20000)
        path = holonomy_path_ordered(analytic_connection(s, DegenerateSubspace.pair(0)), rectangle_loop(pr, tr, 64))
        assert h.distance(path) < 0.05
        assert h.leakage < 1e-3 and is_unitary(h.matrix, 1e-3)

    def test_zero_area(self):
        s = SpinSystem(4)
        a0, b0 = degenerate_h0_params(1, 0.5)
        verts = [(0.3, 1.0), (0.9, 1.0), (0.3, 1.0)]
        # retracing the path cancels the geometric part; what remains is O(1/T)
        errs = [np.abs(adiabatic_holonomy(s, a0, b0, 1, verts, T, 5 * int(T)).matrix - np.eye(2)).max()
                for T in (2000.0, 8000.0)]
        assert errs[1] < 1e-3 and errs[1] < errs[0] / 3

    @pytest.mark.slow
    def test_transfer_spin_fifty(self):
        s, pr, tr = self.setup_rectangle(50)
        a0, b0 = degenerate_h0_params(0, 1.0)
        h = adiabatic_holonomy(s, a0, b0, 0, rectangle_vertices(pr, tr), 2000.0, 10000)
        assert abs(h.matrix[1, 0]) ** 2 > 0.9

    def test_degeneracy_required(self):
        s = SpinSystem(3)
        with pytest.raises(DegeneracyError):
            adiabatic_holonomy(s, 1.0, 0.5, 0, [(0, 1), (1, 1), (0, 1)], 100.0, 100)
        with pytest.raises(DegeneracyError):
            adiabatic_holonomy(s, 1.0, 0.0, 0, [(0, 1), (1, 1), (0, 1)], 100.0, 100)

    def test_open_path(self):
        a0, b0 = degenerate_h0_params(0, 1.0)
        with pytest.raises(ValueError):
            adiabatic_holonomy(SpinSystem(3), a0, b0, 0, [(0, 1), (1, 1)], 100.0, 100)

    def test_leakage_detected(self):
        s, pr, tr = self.setup_rectangle(10)
        a0, b0 = degenerate_h0_params(0, 1.0)
        with pytest.raises(SubspaceLeakageError) as err:
            adiabatic_holonomy(s, a0, b0, 0, rectangle_vertices(pr, tr), 2.0, 200)
        assert err.value.leakage > 1e-3
        h = adiabatic_holonomy(s, a0, b0, 0, rectangle_vertices(pr, tr), 2.0, 200, leakage_tol=None)
        assert h.leakage > 1e-3


def test_uniform_sweep_path():
    path = UniformSweep(0.4, turns=2, phi0=0.1)
    assert path(0.5) == pytest.approx((0.1 + 2 * np.pi, 0.4))
    phi, theta = path(np.array([0.0, 1.0]))
    assert np.allclose(phi, [0.1, 0.1 + 4 * np.pi]) and np.allclose(theta, 0.4)
    assert wrap_phase(4 * np.pi) == pytest.approx(0.0)
