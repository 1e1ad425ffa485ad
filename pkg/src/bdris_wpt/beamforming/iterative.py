"""Impedance-domain iterative beamforming.

The cascade channel is linearized in a small imaginary increment of the
impedance matrix; the DC current then has a first-order model
i0 + Re(u^H omega), maximized in closed form under an entrywise box
|omega_r| <= tau with tau = gamma / ||(Z + Z0 I)^-1||_inf. Only the
imaginary part of the step is applied so Z stays lossless, and the
topology mask pins the unconnected entries to zero.
"""

import numpy as np

from .._validation import ContractError, SignalError
from ..rectenna import DEFAULT_RECTIFIER, conj_gradient, idc
from ..ris import (
    DEFAULT_Z0,
    Topology,
    cascade_channel,
    infinity_norm,
    linearization_terms,
    scattering_from_impedance,
    unvec,
)


def initial_impedance(M, Z0=DEFAULT_Z0):
    """Z = j Z0 I, whose scattering matrix is j I."""
    return 1j * Z0 * np.eye(M)


def taylor_coefficient(Z, h_I, h_R, s, params=DEFAULT_RECTIFIER, Z0=DEFAULT_Z0, h_D=None, exact=True):
    """u such that i_dc(Z + Omega) ~ i_dc(Z) + Re(u^H halfvec(Omega)). Returns (u, i0)."""
    h0, f = linearization_terms(Z, h_R, h_I, Z0=Z0, exact=exact)
    h = h0 if h_D is None else h0 + h_D
    y = s * h
    G = conj_gradient(y, params)
    # i ~ i0 + 2 Re sum conj(G_n) s_n (-f_n^T omega)
    u = -2 * np.sum((G * np.conj(s))[:, None] * np.conj(f), axis=0)
    return u, idc(s, h, params)


def _exact_idc(Z, h_I, h_R, s, params, Z0, h_D):
    theta = scattering_from_impedance(Z, Z0)
    h = cascade_channel(theta, h_R, h_I)
    if h_D is not None:
        h = h + h_D
    return idc(s, h, params)


def it_bdris_inner(Z, h_I, h_R, s, gamma=0.01, rho_omega=0.5, tol=1e-5, topology=None, max_inner=1000,
                   params=DEFAULT_RECTIFIER, Z0=DEFAULT_Z0, h_D=None, exact=True, backtrack=True):
    """Run the closed-form impedance updates for a fixed waveform.

    Returns ``(Z, trace, info)`` where ``trace`` holds the exact DC
    current after every accepted update. With ``backtrack`` the step is
    halved (up to 20 times) whenever the exact current would decrease,
    which keeps the trace non-decreasing.
    """
    Z = np.array(Z, dtype=complex)
    M = Z.shape[0]
    if np.max(np.abs(Z.real), initial=0.0) > 1e-9 * max(1.0, np.max(np.abs(Z))):
        raise ContractError("Z must be purely imaginary")
    topology = topology or Topology.fully_connected(M)
    free = topology.free
    current = _exact_idc(Z, h_I, h_R, s, params, Z0, h_D)
    trace = [current]
    xi_prev = None
    reason = "max-iters"
    steps = []
    for _ in range(max_inner):
        u, _ = taylor_coefficient(Z, h_I, h_R, s, params, Z0, h_D, exact)
        u = np.where(free, u, 0.0)
        mag = np.abs(u)
        if not np.any(mag > 0):
            reason = "stationary"
            break
        A = np.linalg.inv(Z + Z0 * np.eye(M))
        tau = gamma / infinity_norm(A)
        omega_star = np.where(mag > 0, tau * u / np.where(mag > 0, mag, 1.0), 0.0)
        xi = -float(np.real(np.vdot(u, omega_star)))
        step = rho_omega * omega_star
        accepted = False
        for _ in range(21 if backtrack else 1):
            Z_new = Z + 1j * unvec(step, M).imag
            val = _exact_idc(Z_new, h_I, h_R, s, params, Z0, h_D)
            if val >= current or not backtrack:
                accepted = True
                break
            step = 0.5 * step
        if not accepted:
            reason = "no-ascent"
            break
        Z, current = Z_new, val
        trace.append(current)
        steps.append(float(np.max(np.abs(step.imag))))
        if xi_prev is not None and abs(1 - xi_prev / xi) <= tol:
            reason = "converged"
            break
        xi_prev = xi
    return Z, trace, {"reason": reason, "max_step": steps}


def impedance_for(theta, Z0=DEFAULT_Z0):
    """Inverse map Z = Z0 (I + Theta)(I - Theta)^-1 (requires 1 not an eigenvalue of Theta)."""
    M = theta.shape[0]
    eye = np.eye(M)
    try:
        return Z0 * np.linalg.solve((eye - theta).T, (eye + theta).T).T
    except np.linalg.LinAlgError as exc:
        raise SignalError("Theta has eigenvalue 1; no finite impedance") from exc
