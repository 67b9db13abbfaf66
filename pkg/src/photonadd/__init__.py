"""Delocalized photon addition on two-mode coherent states.

Truncated-Fock-space simulation of (a1^dag + e^{i phi} a2^dag)|alpha, alpha>,
its noise channels, entanglement, time-multiplexed homodyne sampling,
maximum-likelihood tomography and photon-number statistics.
"""

from ._accel import backend_name
from .channels import NoiseModel, apply_full_noise, displaced_frame_core, phase_average
from .entanglement import negativity, npt_at, npt_sweep
from .fock import DensityOperator, PureKet, TruncatedSpace, fidelity, trace_distance
from .homodyne import QuadratureDataset, sample_shots, sample_shots_displaced_frame
from .photon_stats import delta_n_distribution, discorrelation_score, joint_photon_distribution
from .states import StateRecipe, decomposed_addition_state, delocalized_addition_state
from .tomography import (ReconstructionConfig, ac_reconstruct, ac_transform, bin_dataset,
                         mle_reconstruct)

__version__ = "0.1.0"

__all__ = [
    "DensityOperator", "NoiseModel", "PureKet", "QuadratureDataset", "ReconstructionConfig",
    "StateRecipe", "TruncatedSpace", "ac_reconstruct", "ac_transform", "apply_full_noise",
    "backend_name", "bin_dataset", "decomposed_addition_state", "delocalized_addition_state",
    "delta_n_distribution", "discorrelation_score", "displaced_frame_core", "fidelity",
    "joint_photon_distribution", "mle_reconstruct", "negativity", "npt_at", "npt_sweep",
    "phase_average", "sample_shots", "sample_shots_displaced_frame", "trace_distance",
]
