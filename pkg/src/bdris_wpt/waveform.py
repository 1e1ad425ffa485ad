"""Multi-carrier waveform design for a fixed cascade channel.

Phases are matched to the channel (s~_n = -h~_n); amplitudes follow the
closed-form successive linearization: maximize the first-order minorant
of the convex DC current over the power ball, whose solution is
s* = g / lambda, then take a damped step toward it.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import SignalError, check_in_unit_interval, check_positive, check_vector
from .rectenna import RectifierParams, idc, waveform_gradient


@dataclass(frozen=True)
class WaveformOptConfig:
    rho_s: float = 0.5
    tol: float = 1e-5
    beta: float = 1.0
    max_iters: int = 2000
    kkt_tol: float = 1e-5

    def __post_init__(self):
        check_in_unit_interval(self.rho_s, "rho_s")
        check_positive(self.tol, "tol")
        check_positive(self.beta, "beta", strict=False)
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class WaveformResult:
    s: np.ndarray
    trace: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = True

    @property
    def idc(self):
        return self.trace[-1]


def smf_init(h, P_T, beta=1.0):
    """Scaled matched filter: s_n = exp(-j h~_n) h_bar_n^beta sqrt(2 P_T / sum h_bar^(2 beta))."""
    h = check_vector(h, "h")
    check_positive(P_T, "P_T")
    h_bar = np.abs(h)
    if not np.any(h_bar > 0):
        raise SignalError("cannot build a matched filter for an all-zero channel")
    weights = h_bar**beta
    amp = weights * np.sqrt(2 * P_T / np.sum(weights**2))
    return amp * np.exp(-1j * np.angle(h))


def dual_lambda(g, P_T):
    """lambda = sqrt(sum g^2 / (2 P_T)), so that s* = g / lambda meets the budget."""
    g = check_vector(g, "g", dtype=float)
    check_positive(P_T, "P_T")
    total = float(np.sum(g * g))
    if total <= 0:
        raise SignalError("zero gradient: the waveform is stationary at the origin")
    return float(np.sqrt(total / (2 * P_T)))


def budget(s):
    """Transmit power (1/2) sum |s_n|^2."""
    return 0.5 * float(np.sum(np.abs(s) ** 2))


def it_wf(h, P_T, cfg=None, params=None, s_init=None):
    """Iterative waveform optimization for channel ``h`` under budget ``P_T``.

    ``s_init`` warm-starts the amplitudes (its phases are discarded);
    without it the scaled matched filter is used. The DC current trace is
    non-decreasing and the returned waveform uses the whole budget.
    """
    cfg = cfg or WaveformOptConfig()
    params = params or RectifierParams()
    h = check_vector(h, "h")
    check_positive(P_T, "P_T")
    h_bar = np.abs(h)
    phase = np.exp(-1j * np.angle(h))
    if s_init is None:
        s_bar = np.abs(smf_init(h, P_T, cfg.beta))
    else:
        s_bar = np.abs(check_vector(s_init, "s_init", n=h.shape[0]))
        p = budget(s_bar)
        if p > P_T:
            s_bar = s_bar * np.sqrt(P_T / p)
    trace = [idc(s_bar * phase, h, params)]
    xi_prev = None
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        g = waveform_gradient(s_bar, h_bar, params)
        if not np.any(g > 0):
            converged = True
            break
        s_star = g / dual_lambda(g, P_T)
        # optimal value of the linearized problem at the current point
        xi = -float(g @ s_star)
        s_prev = s_bar
        s_bar = s_bar + cfg.rho_s * (s_star - s_bar)
        trace.append(idc(s_bar * phase, h, params))
        # relative surrogate change, plus stationarity ||s* - s_bar|| / ||s*|| of the pre-step point
        stationary = np.linalg.norm(s_star - s_prev) <= cfg.kkt_tol * np.linalg.norm(s_star)
        if xi_prev is not None and abs(1 - xi_prev / xi) <= cfg.tol and stationary:
            converged = True
            break
        xi_prev = xi
    if not converged:
        warnings.warn("waveform optimization hit max_iters before converging", RuntimeWarning, stacklevel=2)
    p = budget(s_bar)
    if p > 0:
        s_bar = s_bar * np.sqrt(P_T / p)
        trace[-1] = max(trace[-1], idc(s_bar * phase, h, params))
    return WaveformResult(s=s_bar * phase, trace=trace, iterations=it, converged=converged)


def kkt_residual(s, h, P_T, params=None):
    """||g(s_bar) - lambda s_bar|| / ||g|| at a phase-matched waveform."""
    params = params or RectifierParams()
    s_bar, h_bar = np.abs(s), np.abs(h)
    g = waveform_gradient(s_bar, h_bar, params)
    lam = dual_lambda(g, P_T)
    return float(np.linalg.norm(g - lam * s_bar) / np.linalg.norm(g))


class WaveformOptimizer(BaseEstimator):
    """Estimator wrapper around :func:`it_wf`.

    Parameters
    ----------
    P_T : float
        Transmit power budget in watts.
    rho_s : float
        Damping of the amplitude update, in (0, 1].
    tol : float
        Relative change of the surrogate objective used as stopping rule.
    beta : float
        Exponent of the matched-filter initialization.
    max_iters : int
    K2, K4 : float
        Rectifier coefficients.

    Attributes
    ----------
    waveform_ : ndarray of complex, shape (N,)
    trace_ : list of float
    converged_ : bool
    """

    def __init__(self, P_T=1.0, rho_s=0.5, tol=1e-5, beta=1.0, max_iters=2000, K2=0.17, K4=957.25):
        self.P_T = P_T
        self.rho_s = rho_s
        self.tol = tol
        self.beta = beta
        self.max_iters = max_iters
        self.K2 = K2
        self.K4 = K4

    def _params(self):
        return RectifierParams(self.K2, self.K4)

    def fit(self, X, y=None):
        """Optimize the waveform for the cascade channel ``X`` (complex, shape (N,))."""
        cfg = WaveformOptConfig(self.rho_s, self.tol, self.beta, self.max_iters)
        result = it_wf(X, self.P_T, cfg, self._params())
        self.waveform_ = result.s
        self.trace_ = result.trace
        self.converged_ = result.converged
        self.n_iter_ = result.iterations
        return self

    def transform(self, X):
        """Received phasors y_n = s_n h_n."""
        X = check_vector(X, "X", n=self.waveform_.shape[0])
        return self.waveform_ * X

    def score(self, X, y=None):
        """DC current of the fitted waveform over channel ``X``."""
        return idc(self.waveform_, X, self._params())
