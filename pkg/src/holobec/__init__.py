"""Berry phases and non-Abelian holonomies of a two-mode condensate spin."""

__version__ = "0.1.0"

from .spin import SpinSystem, TwoModeFock, fock_map, rotation_u, spin_operators  # noqa: E402
from .hamiltonian import PhysicalParams, ReducedParams, build_h0, build_hamiltonian, reduce_params  # noqa: E402
from .geometry import (  # noqa: E402
    DegenerateSubspace,
    Holonomy,
    LoopPath,
    berry_phase_closed,
    holonomy_closed_form,
    holonomy_path_ordered,
    holonomy_stokes,
)
from .evolution import FrameSchedule, ReducedSchedule, extract_phases, propagate  # noqa: E402

__all__ = [
    "DegenerateSubspace",
    "FrameSchedule",
    "Holonomy",
    "LoopPath",
    "PhysicalParams",
    "ReducedParams",
    "ReducedSchedule",
    "SpinSystem",
    "TwoModeFock",
    "berry_phase_closed",
    "build_h0",
    "build_hamiltonian",
    "extract_phases",
    "fock_map",
    "holonomy_closed_form",
    "holonomy_path_ordered",
    "holonomy_stokes",
    "propagate",
    "reduce_params",
    "rotation_u",
    "spin_operators",
]
