"""Configuration and report types shared by the beamforming algorithms."""

from dataclasses import dataclass, field

import numpy as np

from .._validation import ContractError, check_in_unit_interval, check_positive
from ..rectenna import idc
from ..ris import DEFAULT_Z0, symmetry_residual, total_channel, unitarity_residual

KINDS = ("sdr", "sdp", "sca", "it", "dris-sdr", "dris-los")


@dataclass(frozen=True)
class BeamformerConfig:
    """Hyperparameters of the beamforming algorithms and the alternating driver.

    ``tol`` stops the outer alternation, ``inner_tol`` the SDR/SDP/SCA
    linearization loops and ``it_tol`` the IT-BDRIS impedance loop.
    """

    kind: str = "sdr"
    tol: float = 1e-4
    inner_tol: float = 1e-4
    it_tol: float = 1e-5
    gamma: float = 0.01
    rho_omega: float = 0.5
    sigma0: float = 1e-5
    iota: float = 1.0
    K_rand: int = 10_000
    max_outer: int = 8
    max_inner: int = 10
    max_inner_it: int = 1000
    max_inner_sca: int = 15
    Z0: float = DEFAULT_Z0
    topology: str = "fully-connected"
    group_size: int | None = None
    exact_neumann: bool = True
    rank_mu0: float = 0.05
    rank_growth: float = 2.0
    rank_target: float = 0.999
    max_inner_rank: int = 14

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ContractError(f"unknown beamformer kind {self.kind!r}; expected one of {KINDS}")
        for name in ("tol", "inner_tol", "it_tol", "sigma0", "iota", "Z0", "rank_mu0"):
            check_positive(getattr(self, name), name)
        if not 0 < self.gamma < 1:
            raise ContractError("gamma must lie in (0, 1)")
        check_in_unit_interval(self.rho_omega, "rho_omega")
        if self.K_rand < 0:
            raise ContractError("K_rand must be >= 0")
        if self.rank_growth < 1:
            raise ContractError("rank_growth must be >= 1")


@dataclass
class OptimizerReport:
    """Outcome of a joint waveform / scattering-matrix optimization."""

    kind: str
    trace: list
    theta: np.ndarray
    waveform: np.ndarray
    h_I: np.ndarray
    h_R: np.ndarray
    h_D: np.ndarray | None = None
    Z: np.ndarray | None = None
    dominance_ratio: float | None = None
    dr_history: list = field(default_factory=list)
    raw_idc: float | None = None
    inner_trace: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)
    iterations: int = 0

    @property
    def idc(self):
        return self.trace[-1]

    @property
    def cascade(self):
        return total_channel(self.theta, self.h_R, self.h_I, self.h_D)

    @property
    def unitarity_residual(self):
        return unitarity_residual(self.theta)

    @property
    def symmetry_residual(self):
        return symmetry_residual(self.theta)

    def exact_idc(self, params):
        return idc(self.waveform, self.cascade, params)
