"""Diagonal-RIS baselines: closed-form phase alignment and diagonal SDR."""

import numpy as np

from .._validation import ContractError, check_channels, check_vector
from ..rectenna import DEFAULT_RECTIFIER
from ..ris import _batched_idc
from .sdr import build_diagonal_data, lag_values, relaxation_loop


def reference_subcarrier(N):
    """0-based index of subcarrier ceil(N/2)."""
    return int(np.ceil(N / 2)) - 1


def dris_los(h_I, h_R, ref=None):
    """Theta_ii = exp(-j(angle h_R,i + angle h_I,i)) at the reference subcarrier."""
    h_I, h_R, _ = check_channels(h_I, h_R)
    n = reference_subcarrier(h_I.shape[0]) if ref is None else ref
    return np.diag(np.exp(-1j * (np.angle(h_R[n]) + np.angle(h_I[n]))))


def dris_sdr(h_I, h_R, s, params=DEFAULT_RECTIFIER, K_rand=10_000, seed=0, h_D=None, inner_tol=1e-4, max_inner=10):
    """Diagonal SDR: diag(X) = 1, then phase-projected Gaussian draws scored by the exact DC current."""
    h_I, h_R, h_D = check_channels(h_I, h_R, h_D)
    s = check_vector(s, "s", n=h_I.shape[0])
    data = build_diagonal_data(h_I, h_R, s, h_D)
    v0 = np.ones(data.n, dtype=complex)
    X, info = relaxation_loop(data, lag_values(data, v0), params, "sdr", inner_tol, max_inner)
    w, V = np.linalg.eigh(0.5 * (X + X.conj().T))
    w = np.clip(w, 0.0, None)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), 0xD1A6])))
    xi = (rng.standard_normal((data.n, K_rand)) + 1j * rng.standard_normal((data.n, K_rand))) / np.sqrt(2)
    cands = np.concatenate([V[:, -1:], (V * np.sqrt(w)) @ xi], axis=1)
    if data.augmented:
        cands = cands[:-1] * np.exp(-1j * np.angle(cands[-1:]))
    phases = np.exp(1j * np.angle(cands))  # (M, K+1)
    a = h_R * h_I
    direct = 0 if h_D is None else h_D[None, :]
    Y = s[None, :] * ((phases.T @ a.T) + direct)
    vals = _batched_idc(Y, params)
    best = phases[:, int(np.argmax(vals))]
    return np.diag(best), {"X": X, **info}


def dris_baseline(h_I, h_R, s, mode="sdr", **kwargs):
    if mode in ("los", "dris-los"):
        return dris_los(h_I, h_R)
    if mode in ("sdr", "dris-sdr"):
        return dris_sdr(h_I, h_R, s, **kwargs)[0]
    raise ContractError(f"unknown D-RIS mode {mode!r}")
