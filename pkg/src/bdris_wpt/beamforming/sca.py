"""Successive convex approximation on the scattering matrix.

Theta^H Theta <= I is convex (a Schur-complement block); the reverse
inequality is replaced by its affine minorant around the previous point
and relaxed by a PSD slack S penalized with weight sigma. A Frobenius
trust region keeps each step local. The conic program is solved with
cvxpy and the Clarabel interior-point solver; it is compiled once per
surface size and re-solved with updated parameters.
"""

import warnings
from functools import lru_cache

import cvxpy as cp
import numpy as np

from ..rectenna import DEFAULT_RECTIFIER, conj_gradient, idc
from ..ris import cascade_channel


@lru_cache(maxsize=8)
def _template(M):
    theta = cp.Variable((M, M), complex=True, name="theta")
    S = cp.Variable((M, M), hermitian=True, name="S")
    W = cp.Parameter((M, M), complex=True, name="W")
    theta_p = cp.Parameter((M, M), complex=True, name="theta_p")
    gram_p = cp.Parameter((M, M), hermitian=True, name="gram_p")
    sigma = cp.Parameter(nonneg=True, name="sigma")
    iota = cp.Parameter(nonneg=True, name="iota")
    eye = np.eye(M)
    cross = theta_p.H @ theta
    surrogate = cross + cross.H - gram_p + S - eye
    schur = cp.bmat([[eye, theta.H], [theta, eye]])
    constraints = [
        theta == theta.T,
        cp.hermitian_wrap(schur) >> 0,
        cp.hermitian_wrap(surrogate) >> 0,
        S >> 0,
        cp.norm(theta - theta_p, "fro") <= iota,
    ]
    objective = cp.Maximize(2 * cp.real(cp.trace(W @ theta)) - sigma * cp.real(cp.trace(S)))
    problem = cp.Problem(objective, constraints)
    return problem, theta, S, W, theta_p, gram_p, sigma, iota


def linear_coefficient(theta_p, h_I, h_R, s, params=DEFAULT_RECTIFIER, h_D=None):
    """W with i_dc(Theta) ~ i_dc(Theta_p) + 2 Re Tr(W (Theta - Theta_p)). Returns (W, i0)."""
    h = cascade_channel(theta_p, h_R, h_I)
    if h_D is not None:
        h = h + h_D
    y = s * h
    G = conj_gradient(y, params)
    coef = np.conj(G) * s
    W = np.einsum("n,ni,nj->ij", coef, h_I, h_R)
    return W, idc(s, h, params)


def sca_bdris_step(theta_prev, h_I, h_R, s, sigma, iota, params=DEFAULT_RECTIFIER, h_D=None):
    """One convex subproblem around ``theta_prev``.

    The linear objective is divided by the current DC current so that
    ``sigma`` weighs the slack against a relative improvement.
    Returns ``(theta, info)``; on solver failure ``theta_prev`` comes back
    with ``info["failed"] = True``.
    """
    theta_prev = np.asarray(theta_prev, dtype=complex)
    M = theta_prev.shape[0]
    W, i0 = linear_coefficient(theta_prev, h_I, h_R, s, params, h_D)
    problem, theta, S, Wp, theta_p, gram_p, sigma_p, iota_p = _template(M)
    Wp.value = W / max(i0, 1e-300)
    theta_p.value = theta_prev
    gram = theta_prev.conj().T @ theta_prev
    gram_p.value = 0.5 * (gram + gram.conj().T)
    sigma_p.value = float(sigma)
    iota_p.value = float(iota)
    try:
        with warnings.catch_warnings():
            # inaccurate solves are reported through the status instead
            warnings.simplefilter("ignore", UserWarning)
            problem.solve(solver=cp.CLARABEL, warm_start=False)
    except Exception:  # solver and data-formatting failures alike
        return theta_prev, {"failed": True, "status": "solver-error"}
    if problem.status not in ("optimal", "optimal_inaccurate") or theta.value is None:
        return theta_prev, {"failed": True, "status": problem.status}
    out = 0.5 * (theta.value + theta.value.T)
    smax = np.linalg.norm(out, 2)
    if smax > 1:
        out = out / smax
    slack = float(np.real(np.trace(S.value)))
    return out, {"failed": False, "status": problem.status, "slack": slack, "value": float(problem.value)}
