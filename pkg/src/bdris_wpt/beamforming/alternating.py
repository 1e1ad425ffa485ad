"""Alternating waveform / scattering-matrix optimization driver.

Every outer iteration runs one beamforming block for the current
waveform, maps the result onto the feasible set when the block works on
a relaxation, keeps the incumbent scattering matrix if the candidate is
worse, and then re-optimizes the waveform from its current amplitudes.
Both blocks are evaluated on the exact DC current, so the outer trace
never decreases.
"""

import time
import warnings

import numpy as np
from sklearn.base import BaseEstimator

from .._validation import ContractError, NumericalError, check_channels, check_positive
from ..channel import ChannelRealization
from ..rectenna import RectifierParams, idc
from ..ris import Topology, feasibility_map, halfvec, scattering_from_impedance, total_channel
from ..waveform import WaveformOptConfig, it_wf, smf_init
from .common import BeamformerConfig, OptimizerReport
from .dris import dris_los, dris_sdr
from .iterative import initial_impedance, it_bdris_inner
from .sca import sca_bdris_step
from .sdr import build_sdr_data, gaussian_randomization, lag_values, relaxation_loop, sdr_objective, theta_to_matrix


class _State:
    def __init__(self, theta, Z, s, sigma):
        self.theta = theta
        self.Z = Z
        self.s = s
        self.sigma = sigma


def _sub_seed(seed, outer):
    return int(np.random.SeedSequence([int(seed), int(outer)]).generate_state(1)[0])


def _lifted_block(state, ctx, mode, seed):
    h_I, h_R, h_D, cfg, params = ctx["h_I"], ctx["h_R"], ctx["h_D"], ctx["cfg"], ctx["params"]
    data = build_sdr_data(h_I, h_R, state.s, h_D)
    theta0 = halfvec(state.theta)
    if data.augmented:
        theta0 = np.concatenate([theta0, [1.0]])
    X, info = relaxation_loop(
        data, lag_values(data, theta0), params, mode, cfg.inner_tol, cfg.max_inner,
        cfg.rank_mu0, cfg.rank_growth, cfg.rank_target, cfg.max_inner_rank,
    )
    flags = [f"sdp-{st}" for st in info["statuses"] if st not in ("optimal", "near-optimal")]
    if len(flags) == len(info["statuses"]):
        raise NumericalError(f"every relaxation solve failed: {info['statuses']}")
    theta_vec = gaussian_randomization(X, data, cfg.K_rand, seed, params)
    t0 = time.perf_counter()
    candidate = feasibility_map(theta_to_matrix(theta_vec, data), h_I, h_R, state.s, cfg.K_rand, seed, params, h_D)
    ctx["timings"]["mapping"] += time.perf_counter() - t0
    return candidate, {"dr": info["dr"][-1], "raw": sdr_objective(data, X, params), "flags": flags}


def _sca_block(state, ctx, seed):
    h_I, h_R, h_D, cfg, params = ctx["h_I"], ctx["h_R"], ctx["h_D"], ctx["cfg"], ctx["params"]
    theta_p = state.theta
    prev = None
    flags = []
    for _ in range(cfg.max_inner_sca):
        theta_new, info = sca_bdris_step(theta_p, h_I, h_R, state.s, state.sigma, cfg.iota, params, h_D)
        state.sigma = min(1.0, 1.5 * state.sigma)
        if info["failed"]:
            flags.append(f"sca-{info['status']}")
            break
        theta_p = theta_new
        if prev is not None and abs(info["value"] - prev) <= cfg.inner_tol * max(abs(info["value"]), 1e-12):
            break
        prev = info["value"]
    t0 = time.perf_counter()
    candidate = feasibility_map(theta_p, h_I, h_R, state.s, cfg.K_rand, seed, params, h_D)
    ctx["timings"]["mapping"] += time.perf_counter() - t0
    return candidate, {"flags": flags}


def _it_block(state, ctx):
    h_I, h_R, h_D, cfg, params = ctx["h_I"], ctx["h_R"], ctx["h_D"], ctx["cfg"], ctx["params"]
    Z, trace, info = it_bdris_inner(
        state.Z, h_I, h_R, state.s, cfg.gamma, cfg.rho_omega, cfg.it_tol, ctx["topology"], cfg.max_inner_it,
        params, cfg.Z0, h_D, cfg.exact_neumann,
    )
    state.Z = Z
    ctx["inner_trace"].extend(trace[1:])
    return scattering_from_impedance(Z, cfg.Z0), {"reason": info["reason"]}


def _beamform(state, ctx, outer):
    cfg = ctx["cfg"]
    seed = _sub_seed(ctx["seed"], outer)
    if cfg.kind in ("sdr", "sdp"):
        return _lifted_block(state, ctx, cfg.kind, seed)
    if cfg.kind == "sca":
        return _sca_block(state, ctx, seed)
    if cfg.kind == "it":
        return _it_block(state, ctx)
    if cfg.kind == "dris-sdr":
        theta, _ = dris_sdr(ctx["h_I"], ctx["h_R"], state.s, ctx["params"], cfg.K_rand, seed, ctx["h_D"], cfg.inner_tol, cfg.max_inner)
        return theta, {}
    return dris_los(ctx["h_I"], ctx["h_R"]), {}


def alternating_optimize(h_I, h_R, P_T, cfg=None, wf_cfg=None, params=None, h_D=None, seed=0):
    """Jointly optimize the waveform and the scattering matrix.

    Starts from Z = j Z0 I (Theta = j I) and the scattered matched filter,
    then alternates the beamforming block selected by ``cfg.kind`` with
    the waveform iteration until the relative change of the DC current
    falls below ``cfg.tol``. A direct link ``h_D`` equal to zero is
    dropped so the result matches the no-direct-link path exactly.
    """
    cfg = cfg or BeamformerConfig()
    wf_cfg = wf_cfg or WaveformOptConfig()
    params = params or RectifierParams()
    check_positive(P_T, "P_T")
    h_I, h_R, h_D = check_channels(h_I, h_R, h_D)
    if h_D is not None and not np.any(h_D):
        h_D = None
    M = h_I.shape[1]
    topology = Topology.from_name(cfg.topology, M, cfg.group_size) if cfg.kind == "it" else None
    ctx = {
        "h_I": h_I, "h_R": h_R, "h_D": h_D, "cfg": cfg, "params": params, "seed": seed,
        "topology": topology, "inner_trace": [],
        "timings": {"beamforming": 0.0, "mapping": 0.0, "waveform": 0.0},
    }
    Z = initial_impedance(M, cfg.Z0)
    theta = scattering_from_impedance(Z, cfg.Z0)
    s = smf_init(total_channel(theta, h_R, h_I, h_D), P_T, wf_cfg.beta)
    state = _State(theta, Z, s, cfg.sigma0)
    current = idc(s, total_channel(theta, h_R, h_I, h_D), params)
    trace = [current]
    report = OptimizerReport(kind=cfg.kind, trace=trace, theta=theta, waveform=s, h_I=h_I, h_R=h_R, h_D=h_D)
    outer = 0
    for outer in range(1, cfg.max_outer + 1):
        t0 = time.perf_counter()
        candidate, info = _beamform(state, ctx, outer)
        ctx["timings"]["beamforming"] += time.perf_counter() - t0
        report.flags.extend(info.get("flags", []))
        if "dr" in info:
            report.dr_history.append(info["dr"])
            report.dominance_ratio = info["dr"]
            report.raw_idc = info["raw"]
        candidate = 0.5 * (candidate + candidate.T)
        value = idc(state.s, total_channel(candidate, h_R, h_I, h_D), params)
        if value >= current:
            state.theta, current = candidate, value
        else:
            report.flags.append(f"incumbent-kept@{outer}")
        t0 = time.perf_counter()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = it_wf(total_channel(state.theta, h_R, h_I, h_D), P_T, wf_cfg, params, s_init=state.s)
        ctx["timings"]["waveform"] += time.perf_counter() - t0
        if not res.converged:
            report.flags.append(f"waveform-max-iters@{outer}")
        if res.idc >= current:
            state.s, current = res.s, res.idc
        previous = trace[-1]
        trace.append(current)
        if cfg.kind == "dris-los" or abs(1 - previous / current) <= cfg.tol:
            break
    report.theta = state.theta
    report.waveform = state.s
    report.Z = state.Z if cfg.kind == "it" else None
    report.inner_trace = ctx["inner_trace"]
    report.timings = ctx["timings"]
    report.iterations = outer
    return report


def with_direct_link(h_I, h_R, h_D, P_T, cfg=None, **kwargs):
    """Joint optimization with a direct transmitter-receiver link."""
    if h_D is None:
        raise ContractError("with_direct_link requires h_D")
    return alternating_optimize(h_I, h_R, P_T, cfg, h_D=h_D, **kwargs)


def _unpack_channels(X):
    if isinstance(X, ChannelRealization):
        return X.h_I, X.h_R, X.h_D
    if isinstance(X, (tuple, list)) and len(X) in (2, 3):
        return tuple(X) + (None,) * (3 - len(X))
    raise ContractError("expected a ChannelRealization or an (h_I, h_R[, h_D]) tuple")


class BDRISOptimizer(BaseEstimator):
    """Estimator interface to :func:`alternating_optimize`.

    ``fit`` takes a channel realization (or an ``(h_I, h_R[, h_D])`` tuple)
    and stores ``scattering_matrix_``, ``waveform_`` and ``report_``;
    ``predict`` returns the per-subcarrier cascade channel obtained with the
    fitted scattering matrix and ``score`` the resulting DC current.
    """

    def __init__(self, algorithm="sdr", P_T=100.0, seed=0, tol=1e-4, K_rand=10_000, max_outer=8, gamma=0.01,
                 rho_omega=0.5, sigma0=1e-5, iota=1.0, topology="fully-connected", rho_s=0.5, wf_tol=1e-5,
                 beta=1.0, K2=0.17, K4=957.25):
        self.algorithm = algorithm
        self.P_T = P_T
        self.seed = seed
        self.tol = tol
        self.K_rand = K_rand
        self.max_outer = max_outer
        self.gamma = gamma
        self.rho_omega = rho_omega
        self.sigma0 = sigma0
        self.iota = iota
        self.topology = topology
        self.rho_s = rho_s
        self.wf_tol = wf_tol
        self.beta = beta
        self.K2 = K2
        self.K4 = K4

    def _configs(self):
        kind = {"dris": "dris-sdr"}.get(self.algorithm, self.algorithm)
        cfg = BeamformerConfig(kind=kind, tol=self.tol, K_rand=self.K_rand, max_outer=self.max_outer, gamma=self.gamma,
                               rho_omega=self.rho_omega, sigma0=self.sigma0, iota=self.iota, topology=self.topology)
        wf = WaveformOptConfig(rho_s=self.rho_s, tol=self.wf_tol, beta=self.beta)
        return cfg, wf, RectifierParams(self.K2, self.K4)

    def fit(self, X, y=None):
        h_I, h_R, h_D = _unpack_channels(X)
        cfg, wf, params = self._configs()
        report = alternating_optimize(h_I, h_R, self.P_T, cfg, wf, params, h_D, self.seed)
        self.report_ = report
        self.scattering_matrix_ = report.theta
        self.waveform_ = report.waveform
        self.trace_ = report.trace
        return self

    def predict(self, X):
        h_I, h_R, h_D = _unpack_channels(X)
        return total_channel(self.scattering_matrix_, np.asarray(h_R), np.asarray(h_I), h_D)

    def score(self, X, y=None):
        return idc(self.waveform_, self.predict(X), RectifierParams(self.K2, self.K4))
