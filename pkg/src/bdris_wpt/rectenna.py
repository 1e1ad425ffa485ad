"""Nonlinear rectenna model.

The harvested DC current is modelled by the truncated diode expansion

    i_dc = K2 * E[y(t)^2] + K4 * E[y(t)^4],

where ``y(t) = sum_n Re{s_n h_n exp(j 2 pi f_n t)}``. Two evaluation
routes are provided: a frequency-domain closed form over subcarrier
quadruples (:func:`idc`) and a brute-force time average over one
fundamental period (:func:`idc_time_oracle`). They must always agree.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._validation import ContractError, SignalError, check_positive, check_same_length, check_vector
from .channel import CarrierPlan


@dataclass(frozen=True)
class RectifierParams:
    """Diode expansion coefficients (small-signal fit constants)."""

    K2: float = 0.17
    K4: float = 957.25

    def __post_init__(self):
        check_positive(self.K2, "K2")
        check_positive(self.K4, "K4")


DEFAULT_RECTIFIER = RectifierParams()


def _products(s, h):
    s = check_vector(s, "s")
    h = check_vector(h, "h")
    check_same_length(s, h, "s", "h")
    return s * h


def self_convolution(y):
    """c_sigma = sum_{n0 + n1 = sigma} y_n0 y_n1 for sigma = 0 .. 2N-2."""
    return np.convolve(y, y)


def lag_correlations(y):
    """d_k = sum_n conj(y_n) y_{n+k} for k = 0 .. N-1."""
    y = np.asarray(y, dtype=complex)
    N = y.shape[0]
    return np.array([np.vdot(y[: N - k], y[k:]) for k in range(N)])


def idc_from_products(y, params=DEFAULT_RECTIFIER):
    """DC current as a function of the received per-subcarrier phasors y_n = s_n h_n.

    The quadruple sum over n0 + n1 = n2 + n3 is evaluated by iterating the
    common sum index sigma, which turns it into sum_sigma |c_sigma|^2.
    """
    y = np.asarray(y, dtype=complex)
    second = 0.5 * params.K2 * np.sum(np.abs(y) ** 2)
    fourth = 0.375 * params.K4 * np.sum(np.abs(self_convolution(y)) ** 2)
    return float(second + fourth)


def idc(s, h, params=DEFAULT_RECTIFIER):
    """Frequency-domain DC current for waveform ``s`` over cascade channel ``h``."""
    return idc_from_products(_products(s, h), params)


def idc_lag_form(y, params=DEFAULT_RECTIFIER):
    """Same quantity written through lag correlations d_k (used by the SDR lifting)."""
    d = lag_correlations(y)
    return float(
        0.5 * params.K2 * d[0].real
        + 0.375 * params.K4 * abs(d[0]) ** 2
        + 0.75 * params.K4 * np.sum(np.abs(d[1:]) ** 2)
    )


def conj_gradient(y, params=DEFAULT_RECTIFIER):
    """Wirtinger derivative G_n = d i_dc / d conj(y_n).

    For a real function, a perturbation dy changes i_dc by 2 Re sum conj(G_n) dy_n.
    """
    y = np.asarray(y, dtype=complex)
    N = y.shape[0]
    d = lag_correlations(y)
    G = 0.5 * params.K2 * y.copy()
    for k in range(-(N - 1), N):
        dk = d[k] if k >= 0 else np.conj(d[-k])
        lo, hi = max(0, -k), min(N, N - k)
        G[lo:hi] += 0.75 * params.K4 * np.conj(dk) * y[lo + k : hi + k]
    return G


def _time_grid(plan, oversampling):
    if oversampling < 8:
        raise ContractError("oversampling must be at least 8 samples per cycle")
    q_top = (plan.f_c + plan.bandwidth) / plan.delta_f
    return int(oversampling * np.ceil(q_top - 1e-9))


def time_signal(s, h, plan=None, oversampling=64):
    """Sample y(t) over one fundamental period 1/delta_f.

    Returns ``(t, y)``. When f_c is an integer multiple of delta_f the
    tone phases are computed with exact integer arithmetic, which keeps
    the passband evaluation accurate at GHz carriers.
    """
    y_n = _products(s, h)
    plan = plan if plan is not None else CarrierPlan(N=y_n.shape[0])
    if plan.N != y_n.shape[0]:
        raise ContractError("carrier plan and waveform disagree on N")
    n_samples = _time_grid(plan, oversampling)
    k = np.arange(n_samples)
    t = k / (n_samples * plan.delta_f)
    q = plan.frequencies / plan.delta_f
    q_int = np.rint(q)
    if np.allclose(q, q_int, rtol=0, atol=1e-6):
        q_int = q_int.astype(np.int64)
        phase = 2 * np.pi * ((q_int[:, None] * k[None, :]) % n_samples) / n_samples
    else:
        phase = 2 * np.pi * plan.frequencies[:, None] * t[None, :]
    y = np.real(y_n[:, None] * np.exp(1j * phase)).sum(axis=0)
    return t, y


def idc_time_oracle(s, h, params=DEFAULT_RECTIFIER, plan=None, oversampling=64):
    """Brute-force time-average DC current: K2 mean(y^2) + K4 mean(y^4)."""
    _, y = time_signal(s, h, plan, oversampling)
    y2 = y * y
    return float(params.K2 * y2.mean() + params.K4 * (y2 * y2).mean())


def papr(s, h, plan=None, oversampling=64):
    """Peak-to-average power ratio of y(t) in dB."""
    _, y = time_signal(s, h, plan, oversampling)
    y2 = y * y
    mean = y2.mean()
    if mean <= 0:
        raise SignalError("PAPR is undefined for a zero signal")
    return float(10 * np.log10(y2.max() / mean))


@lru_cache(maxsize=16)
def _gradient_index_sets(N):
    # Index sets of the third and fourth sums of the amplitude gradient.
    # Third: n1 = n and n2 + n3 = 2n with n2 != n3.
    # Fourth: -n1 + n2 + n3 = n with n1 outside {n, n2, n3}; n2 == n3 is allowed.
    third, fourth = [], []
    for n in range(N):
        for n2 in range(N):
            n3 = 2 * n - n2
            if 0 <= n3 < N and n2 != n3:
                third.append((n, n2, n3))
        for n1 in range(N):
            if n1 == n:
                continue
            for n2 in range(N):
                n3 = n + n1 - n2
                if 0 <= n3 < N and n1 != n2 and n1 != n3:
                    fourth.append((n, n1, n2, n3))
    third = np.array(third, dtype=np.intp).reshape(-1, 3)
    fourth = np.array(fourth, dtype=np.intp).reshape(-1, 4)
    return third, fourth


def waveform_gradient(s_bar, h_bar, params=DEFAULT_RECTIFIER):
    """Derivative of i_dc with respect to phase-matched amplitudes s_bar.

    With phases matched (s~_n = -h~_n) every y_n = s_bar_n h_bar_n is real
    and non-negative, and the gradient splits into four sums: the
    self term, the pairwise power term, the mirrored pairs around n, and
    the genuine three-tone intermodulation term.
    """
    s_bar = check_vector(s_bar, "s_bar", dtype=float, nonneg=True)
    h_bar = check_vector(h_bar, "h_bar", dtype=float, nonneg=True)
    check_same_length(s_bar, h_bar, "s_bar", "h_bar")
    N = s_bar.shape[0]
    y = s_bar * h_bar
    power = y * y
    g = params.K2 * h_bar**2 * s_bar
    quartic = h_bar * (power * y)
    quartic += 2 * h_bar * y * (power.sum() - power)
    third, fourth = _gradient_index_sets(N)
    if third.size:
        np.add.at(quartic, third[:, 0], h_bar[third[:, 0]] * y[third[:, 0]] * y[third[:, 1]] * y[third[:, 2]])
    if fourth.size:
        np.add.at(quartic, fourth[:, 0], h_bar[fourth[:, 0]] * y[fourth[:, 1]] * y[fourth[:, 2]] * y[fourth[:, 3]])
    return g + 1.5 * params.K4 * quartic
