"""Quantum-trajectory simulator for the 2D motion of a far-detuned atom
near the axis of a Gaussian-Laguerre beam, with spontaneous-emission
recoil and an analytic dissipative check."""

from .caldeira_leggett import CLParams, cl_coefficients, cl_variance
from .engine import (
    EnsembleConfig,
    EnsembleResult,
    run_ensemble,
    run_trajectory,
    snapshot_density,
)
from .fock2d import (
    DimensionlessParams,
    ObservableRecord,
    TruncatedState,
    expectations,
    make_coherent,
    position_density,
)
from .params import PhysicalParams, benchmark_params, cs_preset, derive, direct
from .propagator import (
    DisentangledCoeffs,
    PropagatorCache,
    PropagatorMatrix,
    apply,
    disentangle,
    propagator_matrix,
    waiting_time,
)
from .recoil import (
    EmissionDirection,
    JumpKick,
    JumpMatrices,
    apply_jump,
    displacement_matrix,
    jump_matrices,
    kick_position_matrix,
    sample_direction,
)

__version__ = "0.1.0"

__all__ = [
    "CLParams",
    "DimensionlessParams",
    "DisentangledCoeffs",
    "EmissionDirection",
    "EnsembleConfig",
    "EnsembleResult",
    "JumpKick",
    "JumpMatrices",
    "ObservableRecord",
    "PhysicalParams",
    "PropagatorCache",
    "PropagatorMatrix",
    "TruncatedState",
    "apply",
    "apply_jump",
    "benchmark_params",
    "cl_coefficients",
    "cl_variance",
    "cs_preset",
    "derive",
    "direct",
    "disentangle",
    "displacement_matrix",
    "expectations",
    "jump_matrices",
    "kick_position_matrix",
    "make_coherent",
    "position_density",
    "propagator_matrix",
    "run_ensemble",
    "run_trajectory",
    "sample_direction",
    "snapshot_density",
    "waiting_time",
]
