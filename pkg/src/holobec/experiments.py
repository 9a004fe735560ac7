"""Experiment definitions, config validation and result records.

Each experiment has a flat schema of typed keys with defaults and
constraints, and a runner that returns computed quantities plus oracle
comparisons.  Everything is deterministic given the config (and its seed).
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from . import __version__
from .evolution import (
    adiabatic_berry_phases,
    adiabatic_holonomy,
    converged_berry_phases,
    detection_protocol,
    rectangle_vertices,
)
from .geometry import (
    DegenerateSubspace,
    analytic_connection,
    berry_phase_closed,
    berry_phase_flux,
    circle_loop,
    holonomy_closed_form,
    holonomy_path_ordered,
    holonomy_stokes,
    numeric_connection,
    pair_coupling,
    phase_distance,
    rectangle_loop,
    transfer_rectangle,
)
from .hamiltonian import degenerate_h0_params
from .perturbation import (
    commutator_residual,
    convergence_bound,
    generator_resummed,
    generator_truncated,
    residual_ratio,
)
from .spin import SpinError, SpinSystem

SCHEMA_VERSION = 1
EXPERIMENTS = ("berry", "detect", "holonomy", "transfer", "stokes", "perturbation", "sweep")


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the key."""


@dataclass(frozen=True)
class Key:
    default: Any
    kind: type
    check: Callable[[Any], bool] | None = None
    rule: str = ""
    nullable: bool = False


def _half_integer(x):
    try:
        SpinSystem(x)
    except SpinError:
        return False
    return True


def _positive(x):
    return x > 0


def _open_angle(x):
    return 0 < x < math.pi


def _angle(x):
    return 0 <= x <= math.pi


COMMON = {"seed": Key(0, int, lambda x: x >= 0, "a non-negative integer")}

SCHEMAS: dict[str, dict[str, Key]] = {
    "berry": {
        "j": Key(5.0, float, _half_integer, "a positive half-integer"),
        "m": Key(1.0, float),
        "theta": Key(math.pi / 3, float, _angle, "in [0, pi]"),
        "T": Key(400.0, float, _positive, "positive"),
        "steps": Key(800, int, lambda x: x >= 100, ">= 100"),
        "alpha0": Key(1.0, float, lambda x: x != 0, "nonzero"),
        "beta0": Key(0.0, float),
        "converge": Key(True, bool),
        "converge_tol": Key(1e-3, float, _positive, "positive"),
        "max_doublings": Key(14, int, lambda x: x >= 0, ">= 0"),
        "segments": Key(4096, int, lambda x: x >= 8, ">= 8"),
        "flux_steps": Key(1024, int, lambda x: x >= 16, ">= 16"),
        "flux_tol": Key(1e-4, float, _positive, "positive"),
        "path_tol": Key(1e-4, float, _positive, "positive"),
        "adiabatic_tol": Key(2e-3, float, _positive, "positive"),
    },
    "detect": {
        "j": Key(1.0, float, _half_integer, "a positive half-integer"),
        "theta": Key(math.pi / 3, float, _angle, "in [0, pi]"),
        "T_loop": Key(2 * math.pi * 200, float, _positive, "positive"),
        "steps": Key(20000, int, lambda x: x >= 100, ">= 100"),
        "alpha0": Key(1.0, float, lambda x: x != 0, "nonzero"),
        "variant": Key("both", str, lambda x: x in ("both", "instantaneous", "adiabatic"),
                       "one of both, instantaneous, adiabatic"),
        "ramp_fraction": Key(0.1, float, lambda x: 0 < x < 0.5, "in (0, 0.5)"),
        "overlap_tol": Key(0.01, float, _positive, "positive"),
        "mode_b_tol": Key(0.05, float, _positive, "positive"),
    },
    "holonomy": {
        "j": Key(10.0, float, _half_integer, "a positive half-integer"),
        "m": Key(0.0, float),
        "theta0": Key(math.pi / 3, float, _open_angle, "in (0, pi)"),
        "theta1": Key(None, float, _angle, "in [0, pi]", nullable=True),
        "fraction": Key(1.0, float, _positive, "positive"),
        "beta0": Key(1.0, float, lambda x: x != 0, "nonzero"),
        "segments": Key(256, int, lambda x: x >= 2, ">= 2"),
        "adiabatic": Key(True, bool),
        "T": Key(4000.0, float, _positive, "positive"),
        "steps": Key(20000, int, lambda x: x >= 100, ">= 100"),
        "leakage_tol": Key(1e-3, float, _positive, "positive"),
        "closed_tol": Key(None, float, _positive, "positive", nullable=True),
        "adiabatic_tol": Key(0.05, float, _positive, "positive"),
    },
    "transfer": {
        "j": Key(50.0, float, _half_integer, "a positive half-integer"),
        "m": Key(0.0, float),
        "theta0": Key(math.pi / 3, float, _open_angle, "in (0, pi)"),
        "fraction": Key(1.0, float, lambda x: 0 < x <= 1, "in (0, 1]"),
        "beta0": Key(1.0, float, lambda x: x != 0, "nonzero"),
        "segments": Key(256, int, lambda x: x >= 2, ">= 2"),
        "adiabatic": Key(True, bool),
        "T": Key(4000.0, float, _positive, "positive"),
        "steps": Key(20000, int, lambda x: x >= 100, ">= 100"),
        "leakage_tol": Key(1e-3, float, _positive, "positive"),
        "closed_tol": Key(0.05, float, _positive, "positive"),
        "adiabatic_tol": Key(0.1, float, _positive, "positive"),
    },
    "stokes": {
        "j": Key(10.0, float, _half_integer, "a positive half-integer"),
        "m": Key(0.0, float),
        "subspace": Key("pair", str, lambda x: x in ("pair", "level"), "pair or level"),
        "theta0": Key(math.pi / 3, float, _open_angle, "in (0, pi)"),
        "theta1": Key(None, float, _angle, "in [0, pi]", nullable=True),
        "phi1": Key(None, float, _positive, "positive", nullable=True),
        "fraction": Key(1.0, float, _positive, "positive"),
        "grid": Key(512, int, lambda x: x >= 1, ">= 1"),
        "segments": Key(256, int, lambda x: x >= 2, ">= 2"),
        "connection": Key("analytic", str, lambda x: x in ("analytic", "numeric"), "analytic or numeric"),
        "tol": Key(1e-3, float, _positive, "positive"),
    },
    "perturbation": {
        "j": Key(5.0, float, _half_integer, "a positive half-integer"),
        "alpha0": Key(1.0, float, lambda x: x != 0, "nonzero"),
        "beta0": Key(0.05, float),
        "gamma": Key(0.01, float, lambda x: 0 < x <= 0.1, "in (0, 0.1]"),
        "order": Key(60, int, lambda x: x >= 0, ">= 0"),
        "draws": Key(20, int, lambda x: x >= 0, ">= 0"),
        "commutator_tol": Key(1e-12, float, _positive, "positive"),
        "truncation_tol": Key(1e-8, float, _positive, "positive"),
        "ratio_range": Key([3.5, 4.5], list, lambda x: len(x) == 2 and x[0] < x[1], "[low, high] with low < high"),
    },
}


def _coerce(name: str, key: Key, value):
    if value is None:
        if key.nullable:
            return None
        raise ConfigError(f"{name}: must not be null")
    kind = key.kind
    try:
        if kind is bool:
            if isinstance(value, str):
                if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                    raise ValueError
                value = value.lower() in ("true", "1", "yes")
            elif not isinstance(value, (bool, int)):
                raise ValueError
            value = bool(value)
        elif kind is int:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError
            value = int(value)
        elif kind is float:
            if isinstance(value, bool):
                raise ValueError
            value = float(value)
            if not math.isfinite(value):
                raise ValueError
        elif kind is list:
            if isinstance(value, str):
                value = json.loads(value)
            value = [float(v) for v in value]
        else:
            value = str(value)
    except (TypeError, ValueError, json.JSONDecodeError):
        raise ConfigError(f"{name}: expected {kind.__name__}, got {value!r}") from None
    if key.check is not None and not key.check(value):
        raise ConfigError(f"{name}: must be {key.rule}, got {value!r}")
    return value


def schema(experiment: str) -> dict[str, Key]:
    if experiment not in SCHEMAS:
        raise ConfigError(f"experiment: unknown experiment {experiment!r}")
    return {**SCHEMAS[experiment], **COMMON}


def validate(experiment: str, values: dict) -> dict:
    """Merge ``values`` onto the defaults of ``experiment`` and check them.

    Unknown keys are rejected.  The result is a plain dict with every key of
    the schema, in canonical (sorted) order.
    """
    if experiment == "sweep":
        return validate_sweep(values)
    keys = schema(experiment)
    unknown = sorted(set(values) - set(keys))
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown key for experiment {experiment!r}")
    config = {name: _coerce(name, key, values.get(name, key.default)) for name, key in keys.items()}
    _check_cross(experiment, config)
    return dict(sorted(config.items()))


def _check_cross(experiment, config):
    if "m" in config:
        sys = SpinSystem(config["j"])
        try:
            sys.index(config["m"])
        except SpinError:
            raise ConfigError(f"m: must be a projection of j={config['j']:g}, got {config['m']}") from None
        if experiment in ("holonomy", "transfer") or config.get("subspace") == "pair":
            if config["m"] >= config["j"]:
                raise ConfigError(f"m: must be below j={config['j']:g} for a degenerate pair")


def parse_axis(text: str) -> tuple[str, list]:
    """``name=v1,v2,...`` or ``name=start:stop:num`` (inclusive linspace)."""
    name, sep, spec = text.partition("=")
    if not sep or not name:
        raise ConfigError(f"axes: cannot parse axis {text!r}; use name=v1,v2 or name=start:stop:num")
    if spec.count(":") == 2:
        start, stop, num = spec.split(":")
        try:
            values = np.linspace(float(start), float(stop), int(num)).tolist()
        except ValueError:
            raise ConfigError(f"axes: bad range {spec!r} for {name}") from None
    else:
        values = [json.loads(v) if _is_json(v) else v for v in spec.split(",") if v != ""]
    return name, values


def _is_json(text):
    try:
        json.loads(text)
    except json.JSONDecodeError:
        return False
    return True


def validate_sweep(values: dict) -> dict:
    values = dict(values)
    base = values.pop("base", "berry")
    if base not in SCHEMAS:
        raise ConfigError(f"base: must be one of {sorted(SCHEMAS)}, got {base!r}")
    axes = values.pop("axes", {})
    if isinstance(axes, list):
        axes = dict(parse_axis(a) for a in axes)
    if not isinstance(axes, dict) or not axes:
        raise ConfigError("axes: a sweep needs at least one axis")
    if len(axes) > 2:
        raise ConfigError(f"axes: at most two swept axes, got {len(axes)}")
    keys = schema(base)
    for name, points in axes.items():
        if name not in keys:
            raise ConfigError(f"axes: {name!r} is not a key of experiment {base!r}")
        if not isinstance(points, list) or not points:
            raise ConfigError(f"axes: empty range for {name!r}")
        axes[name] = [_coerce(name, keys[name], p) for p in points]
    fixed = validate(base, values)
    for name in axes:
        fixed.pop(name)
    return {"axes": dict(sorted(axes.items())), "base": base, "fixed": fixed}


def canonical(config: dict) -> str:
    return json.dumps(config, sort_keys=True, separators=(",", ":"))


def sweep_points(config: dict) -> list[dict]:
    """Cartesian product of the axes, first axis slowest, in input order."""
    axes = config["axes"]
    names = list(axes)
    grids = np.meshgrid(*[np.arange(len(axes[n])) for n in names], indexing="ij")
    points = []
    for idx in zip(*[g.ravel() for g in grids]):
        point = dict(config["fixed"])
        point.update({n: axes[n][i] for n, i in zip(names, idx)})
        points.append(validate(config["base"], point))
    return points


# ---------------------------------------------------------------- results


def complex_matrix(mat) -> list:
    """Row-major nested list of ``[re, im]`` pairs."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(mat)]


def compare(name, value, reference, tol, kind="abs"):
    """One oracle comparison.

    ``kind`` is ``"abs"`` (``|value - reference|``), ``"phase"`` (distance on
    the circle) or ``"max"`` (``value`` is itself an error, reference 0).
    """
    if kind == "phase":
        err = float(phase_distance(value, reference))
    elif kind == "max":
        err = float(value)
    else:
        err = float(abs(value - reference))
    rel = err / abs(reference) if reference not in (0, None) and kind != "max" else None
    return {
        "name": name,
        "value": float(value),
        "reference": None if reference is None else float(reference),
        "abs_error": err,
        "rel_error": rel,
        "tolerance": float(tol),
        "passed": bool(err <= tol),
    }


def _phase(pv):
    return {"raw": pv.raw, "wrapped": pv.wrapped}


def run_berry(c):
    sys = SpinSystem(c["j"])
    m, theta = c["m"], c["theta"]
    closed = berry_phase_closed(m, theta)
    flux = berry_phase_flux(m, theta, c["flux_steps"], j=c["j"])
    conn = analytic_connection(sys, DegenerateSubspace.level(m))
    path = holonomy_path_ordered(conn, circle_loop(theta, c["segments"]))
    if c["converge"]:
        study = converged_berry_phases(
            sys, [m], theta, c["T"], c["steps"], c["alpha0"], c["beta0"], c["converge_tol"], c["max_doublings"]
        )
        phases, traj = adiabatic_berry_phases(
            sys, [m], theta, study.duration, int(c["steps"] * study.duration / c["T"]), c["alpha0"], c["beta0"]
        )
        ladder = {"durations": study.durations, "changes": study.changes, "converged": study.converged}
    else:
        phases, traj = adiabatic_berry_phases(sys, [m], theta, c["T"], c["steps"], c["alpha0"], c["beta0"])
        ladder = None
    p = phases[0]
    quantities = {
        "closed_form": _phase(closed),
        "flux": _phase(flux),
        "path_ordered": path.phase,
        "adiabatic": {
            "total": p.total,
            "dynamical": p.dynamical,
            "geometric": p.geometric,
            "overlap": p.overlap,
            "duration": traj.duration,
            "steps": traj.steps,
            "norm_error": traj.norm_error,
        },
        "convergence": ladder,
    }
    comparisons = [
        compare("flux_vs_closed_form", flux.wrapped, closed.wrapped, c["flux_tol"], "phase"),
        compare("path_ordered_vs_closed_form", path.phase, closed.wrapped, c["path_tol"], "phase"),
        compare("adiabatic_vs_closed_form", p.geometric, closed.wrapped, c["adiabatic_tol"], "phase"),
        compare("norm_conservation", traj.norm_error, 0.0, 1e-10, "max"),
    ]
    if ladder is not None:
        comparisons.append(compare("adiabatic_converged", study.changes[-1] if study.changes else math.inf,
                                   0.0, c["converge_tol"], "max"))
    return quantities, comparisons


def run_detect(c):
    sys = SpinSystem(c["j"])
    variants = ["instantaneous", "adiabatic"] if c["variant"] == "both" else [c["variant"]]
    quantities, comparisons = {}, []
    n_atoms = 2 * sys.j
    for variant in variants:
        r = detection_protocol(
            sys, c["theta"], c["T_loop"], c["steps"], c["alpha0"], variant=variant, ramp_fraction=c["ramp_fraction"]
        )
        quantities[variant] = {
            "overlap_top": r.overlap_top,
            "mode_b_population": r.mode_b_population,
            "ideal_overlap_top": r.ideal_overlap_top,
            "ideal_mode_b_population": r.ideal_mode_b_population,
            "populations": r.populations,
            "atoms": r.atoms,
            "dynamical_turns": r.dynamical_turns,
            "norm_error": r.norm_error,
            "warnings": r.warnings,
        }
        comparisons += [
            compare(f"{variant}.overlap_top_vs_ideal", r.overlap_top, r.ideal_overlap_top, c["overlap_tol"]),
            compare(f"{variant}.mode_b_fraction_vs_ideal", r.mode_b_population / n_atoms,
                    r.ideal_mode_b_population / n_atoms, c["mode_b_tol"]),
            compare(f"{variant}.norm_conservation", r.norm_error, 0.0, 1e-10, "max"),
        ]
    return quantities, comparisons


def _pair_setup(c):
    sys = SpinSystem(c["j"])
    m, theta0 = c["m"], c["theta0"]
    (p0, p1), (t0, t1) = transfer_rectangle(sys, m, theta0, c["fraction"])
    if c.get("theta1") is not None:
        t1 = c["theta1"]
    return sys, (p0, p1), (t0, t1)


def _holonomies(c, sys, phi_range, theta_range):
    m = c["m"]
    conn = analytic_connection(sys, DegenerateSubspace.pair(m))
    path = holonomy_path_ordered(conn, rectangle_loop(phi_range, theta_range, c["segments"]))
    closed = holonomy_closed_form(sys, m, theta_range[0], theta_range[1])
    adiabatic = None
    if c["adiabatic"]:
        alpha0, beta0 = degenerate_h0_params(m, c["beta0"])
        adiabatic = adiabatic_holonomy(
            sys, alpha0, beta0, m, rectangle_vertices(phi_range, theta_range), c["T"], c["steps"],
            leakage_tol=None,
        )
    return path, closed, adiabatic


def run_holonomy(c):
    sys, phi_range, theta_range = _pair_setup(c)
    path, closed, adiabatic = _holonomies(c, sys, phi_range, theta_range)
    rho = pair_coupling(sys, c["m"])
    closed_tol = c["closed_tol"] if c["closed_tol"] is not None else 3.0 / rho
    quantities = {
        "rho": rho,
        "phi_range": list(phi_range),
        "theta_range": list(theta_range),
        "path_ordered": complex_matrix(path.matrix),
        "closed_form": complex_matrix(closed.matrix),
        "path_ordered_unitarity_error": path.unitarity_error(),
    }
    comparisons = [
        compare("closed_form_vs_path_ordered", path.distance(closed), 0.0, closed_tol, "max"),
        compare("path_ordered_unitarity", path.unitarity_error(), 0.0, 1e-8, "max"),
    ]
    if adiabatic is not None:
        quantities["adiabatic"] = complex_matrix(adiabatic.matrix)
        quantities["leakage"] = adiabatic.leakage
        quantities["adiabatic_norm_error"] = adiabatic.info["norm_error"]
        comparisons += [
            compare("adiabatic_vs_path_ordered", adiabatic.distance(path), 0.0, c["adiabatic_tol"], "max"),
            compare("leakage", adiabatic.leakage, 0.0, c["leakage_tol"], "max"),
            compare("adiabatic_norm_conservation", adiabatic.info["norm_error"], 0.0, 1e-10, "max"),
        ]
    return quantities, comparisons


def run_transfer(c):
    c = dict(c, theta1=None)
    sys, phi_range, theta_range = _pair_setup(c)
    path, closed, adiabatic = _holonomies(c, sys, phi_range, theta_range)
    ideal_move = math.sin(c["fraction"] * math.pi / 2) ** 2
    ideal_stay = 1 - ideal_move

    def probs(h):
        return {"stay": float(abs(h.matrix[0, 0]) ** 2), "transfer": float(abs(h.matrix[1, 0]) ** 2)}

    quantities = {
        "rho": pair_coupling(sys, c["m"]),
        "theta1": theta_range[1],
        "phi_width": phi_range[1] - phi_range[0],
        "ideal": {"stay": ideal_stay, "transfer": ideal_move},
        "closed_form": probs(closed),
        "path_ordered": probs(path),
    }
    comparisons = []
    for label, h, tol in [("closed_form", closed, c["closed_tol"]), ("path_ordered", path, c["closed_tol"])]:
        p = probs(h)
        comparisons += [
            compare(f"{label}.transfer", p["transfer"], ideal_move, tol),
            compare(f"{label}.stay", p["stay"], ideal_stay, tol),
        ]
    if adiabatic is not None:
        p = probs(adiabatic)
        quantities["adiabatic"] = p
        quantities["leakage"] = adiabatic.leakage
        comparisons += [
            compare("adiabatic.transfer", p["transfer"], ideal_move, c["adiabatic_tol"]),
            compare("adiabatic.stay", p["stay"], ideal_stay, c["adiabatic_tol"]),
            compare("leakage", adiabatic.leakage, 0.0, c["leakage_tol"], "max"),
        ]
    return quantities, comparisons


def run_stokes(c):
    sys = SpinSystem(c["j"])
    m = c["m"]
    if c["subspace"] == "pair":
        subspace = DegenerateSubspace.pair(m)
        (p0, p1), (t0, t1) = transfer_rectangle(sys, m, c["theta0"], c["fraction"])
    else:
        subspace = DegenerateSubspace.level(m)
        (p0, p1), (t0, t1) = (0.0, 2 * math.pi), (c["theta0"], c["theta0"] + 0.25)
    if c["phi1"] is not None:
        p1 = c["phi1"]
    if c["theta1"] is not None:
        t1 = c["theta1"]
    conn = analytic_connection(sys, subspace) if c["connection"] == "analytic" else numeric_connection(sys, subspace)
    path = holonomy_path_ordered(conn, rectangle_loop((p0, p1), (t0, t1), c["segments"]))
    stokes = holonomy_stokes(conn, (p0, p1), (t0, t1), grid=(c["grid"], c["grid"]))
    quantities = {
        "phi_range": [p0, p1],
        "theta_range": [t0, t1],
        "path_ordered": complex_matrix(path.matrix),
        "stokes": complex_matrix(stokes.matrix),
    }
    comparisons = [compare("stokes_vs_path_ordered", stokes.distance(path), 0.0, c["tol"], "max")]
    return quantities, comparisons


def run_perturbation(c):
    sys = SpinSystem(c["j"])
    a0, b0 = c["alpha0"], c["beta0"]
    rng = np.random.default_rng(c["seed"])
    worst = commutator_residual(sys, a0, b0)
    draws = []
    for _ in range(c["draws"]):
        j = rng.integers(1, 21) / 2
        s = SpinSystem(j)
        alpha = rng.choice([-1, 1]) * rng.uniform(0.5, 2.0)
        beta = rng.uniform(-1, 1) * 0.9 * abs(alpha) / max(2 * j - 1, 1)
        res = commutator_residual(s, alpha, beta)
        draws.append({"j": j, "alpha0": alpha, "beta0": beta, "residual": res})
        worst = max(worst, res)
    bound = convergence_bound(sys, a0, b0)
    ratio = residual_ratio(sys, a0, b0, c["gamma"])
    quantities = {
        "convergence_bound": bound,
        "commutator_residual": worst,
        "draws": draws,
        "residual_ratio": ratio,
        "generator": complex_matrix(generator_resummed(sys, a0, b0)),
    }
    lo, hi = c["ratio_range"]
    comparisons = [
        compare("commutator_identity", worst, 0.0, c["commutator_tol"], "max"),
        compare("residual_ratio", ratio, (lo + hi) / 2, (hi - lo) / 2),
    ]
    if bound < 1:
        trunc = float(np.abs(generator_truncated(sys, a0, b0, c["order"]) - generator_resummed(sys, a0, b0)).max())
        quantities["truncation_error"] = trunc
        comparisons.append(compare("truncated_vs_resummed", trunc, 0.0, c["truncation_tol"], "max"))
    return quantities, comparisons


RUNNERS = {
    "berry": run_berry,
    "detect": run_detect,
    "holonomy": run_holonomy,
    "transfer": run_transfer,
    "stokes": run_stokes,
    "perturbation": run_perturbation,
}


def _check_finite(obj, where="quantities"):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _check_finite(v, f"{where}.{k}")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _check_finite(v, f"{where}[{i}]")
    elif isinstance(obj, float) and not math.isfinite(obj):
        raise FloatingPointError(f"non-finite value at {where}")


def run(experiment: str, config: dict) -> dict:
    """Run one experiment on a validated config and return its result record."""
    start = time.perf_counter()
    quantities, comparisons = RUNNERS[experiment](config)
    _check_finite(quantities)
    return {
        "schema_version": SCHEMA_VERSION,
        "experiment": experiment,
        "config": config,
        "quantities": quantities,
        "comparisons": comparisons,
        "passed": all(c["passed"] for c in comparisons),
        "duration_s": time.perf_counter() - start,
        "version": __version__,
    }


def flatten(obj, prefix="") -> dict:
    """Scalar leaves of nested dicts as ``a.b.c`` keys (lists are skipped)."""
    out = {}
    for key, value in obj.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(flatten(value, name + "."))
        elif isinstance(value, (int, float, str, bool)) or value is None:
            out[name] = value
    return out


def sweep_row(base: str, axes: list, point: dict) -> dict:
    record = run(base, point)
    row = {name: point[name] for name in axes}
    row["passed"] = record["passed"]
    row.update(flatten(record["quantities"]))
    for comp in record["comparisons"]:
        row[f"{comp['name']}.abs_error"] = comp["abs_error"]
        row[f"{comp['name']}.passed"] = comp["passed"]
    return row


def monotone_trends(rows: list, axis: str) -> dict:
    """For each numeric column, whether it is monotone along ``axis``."""
    if len(rows) < 2:
        return {}
    ordered = sorted(rows, key=lambda r: r[axis])
    trends = {}
    for name in ordered[0]:
        if name == axis:
            continue
        vals = [r.get(name) for r in ordered]
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals):
            continue
        diffs = np.diff(vals)
        if np.all(diffs >= 0):
            trends[name] = "increasing"
        elif np.all(diffs <= 0):
            trends[name] = "decreasing"
        else:
            trends[name] = "mixed"
    return trends
