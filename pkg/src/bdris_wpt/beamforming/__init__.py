"""Scattering-matrix design algorithms and the joint optimization driver."""

from .alternating import BDRISOptimizer, alternating_optimize, with_direct_link
from .common import KINDS, BeamformerConfig, OptimizerReport
from .dris import dris_baseline, dris_los, dris_sdr
from .iterative import initial_impedance, it_bdris_inner, taylor_coefficient
from .sca import linear_coefficient, sca_bdris_step
from .sdr import (
    SdrData,
    build_diagonal_data,
    build_sdr_data,
    gaussian_randomization,
    lag_values,
    objective_matrix,
    relaxation_loop,
    sdp_rank_step,
    sdr_objective,
    sdr_step,
    theta_to_matrix,
    unitarity_constraints,
)

__all__ = [
    "BDRISOptimizer",
    "BeamformerConfig",
    "KINDS",
    "OptimizerReport",
    "SdrData",
    "alternating_optimize",
    "build_diagonal_data",
    "build_sdr_data",
    "dris_baseline",
    "dris_los",
    "dris_sdr",
    "gaussian_randomization",
    "initial_impedance",
    "it_bdris_inner",
    "lag_values",
    "linear_coefficient",
    "objective_matrix",
    "relaxation_loop",
    "sca_bdris_step",
    "sdp_rank_step",
    "sdr_objective",
    "sdr_step",
    "taylor_coefficient",
    "theta_to_matrix",
    "unitarity_constraints",
    "with_direct_link",
]
