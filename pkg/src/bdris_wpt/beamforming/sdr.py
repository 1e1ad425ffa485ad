"""Semidefinite relaxation of the scattering-matrix design.

The half-vector theta of a symmetric Theta enters the received phasors
linearly, y_n = z_n^H theta with z_n = conj(s_n a_n). Every lag
correlation d_k = sum_n conj(y_n) y_{n+k} is then a quadratic form
theta^H D_k theta with D_k = sum_n z_n z_{n+k}^H, so after lifting to
X = theta theta^H the DC current is a convex function of the linear
quantities Tr(D_k X). Maximizing it is handled by successive
linearization; each step is an SDP with the unitarity of Theta written
as linear constraints on X.
"""

from dataclasses import dataclass

import numpy as np

from .._validation import SignalError, check_channels, check_vector
from ..rectenna import DEFAULT_RECTIFIER
from ..ris import _vec_to_half, cascade_vectors, half_dim, unvec
from ..sdp import CompositeConstraints, MatrixConstraints, PartialTraceConstraints, SdpProblem, dominance_ratio, herm, solve


@dataclass
class SdrData:
    """Lifted problem data. Rows of ``z`` are the vectors z_n."""

    z: np.ndarray
    M: int
    augmented: bool
    diagonal: bool = False

    @property
    def N(self):
        return self.z.shape[0]

    @property
    def n(self):
        return self.z.shape[1]

    def D(self, k):
        """D_k = sum_n z_n z_{n+k}^H."""
        return self.z[: self.N - k].T @ self.z[k:].conj()


def build_sdr_data(h_I, h_R, s, h_D=None):
    """Lifted data for the fully connected scattering matrix (direct link appended as an auxiliary slot)."""
    h_I, h_R, h_D = check_channels(h_I, h_R, h_D)
    s = check_vector(s, "s", n=h_I.shape[0])
    a = cascade_vectors(h_R, h_I)
    if h_D is not None:
        a = np.concatenate([a, h_D[:, None]], axis=1)
    return SdrData(z=np.conj(s[:, None] * a), M=h_I.shape[1], augmented=h_D is not None)


def build_diagonal_data(h_I, h_R, s, h_D=None):
    """Lifted data for a diagonal surface: h_n = sum_i h_R,i h_I,i v_i."""
    h_I, h_R, h_D = check_channels(h_I, h_R, h_D)
    s = check_vector(s, "s", n=h_I.shape[0])
    a = h_R * h_I
    if h_D is not None:
        a = np.concatenate([a, h_D[:, None]], axis=1)
    return SdrData(z=np.conj(s[:, None] * a), M=h_I.shape[1], augmented=h_D is not None, diagonal=True)


def lag_values(data, X):
    """d_k = Tr(D_k X) for k = 0 .. N-1 (X may also be a vector theta)."""
    if X.ndim == 1:
        y = data.z.conj() @ X
        return np.array([np.vdot(y[: data.N - k], y[k:]) for k in range(data.N)])
    W = X @ data.z.T  # column n: X z_n
    G = data.z.conj() @ W  # G[m, n] = z_m^H X z_n
    return np.array([np.trace(G, offset=-k) for k in range(data.N)])


def sdr_objective(data, X, params=DEFAULT_RECTIFIER):
    """(K2/2) d_0 + (3 K4/8) |d_0|^2 + (3 K4/4) sum_{k>=1} |d_k|^2; equals i_dc for rank-1 feasible X."""
    d = lag_values(data, np.asarray(X))
    return float(0.5 * params.K2 * d[0].real + 0.375 * params.K4 * abs(d[0]) ** 2 + 0.75 * params.K4 * np.sum(np.abs(d[1:]) ** 2))


def objective_matrix(data, d_prev, params=DEFAULT_RECTIFIER):
    """K1 such that Tr(K1 X) is the linearization of the SDR objective at lags d_prev (up to a constant)."""
    D0 = data.D(0)
    K1 = (0.5 * params.K2 + 0.75 * params.K4 * d_prev[0].real) * D0
    for k in range(1, data.N):
        Dk = data.D(k)
        K1 = K1 + 0.75 * params.K4 * (np.conj(d_prev[k]) * Dk + d_prev[k] * Dk.conj().T)
    return herm(K1)


def unitarity_constraints(M, augmented=False):
    """Constraint map and right-hand side for Tr(X Pbar_ij) = delta_ij (plus X_gg = 1 when augmented)."""
    n = half_dim(M) + int(augmented)
    op = PartialTraceConstraints(M, _vec_to_half(M), n)
    b = op.target
    if augmented:
        E = np.zeros((n, n))
        E[-1, -1] = 1.0
        op = CompositeConstraints([op, MatrixConstraints([E])])
        b = np.concatenate([b, [1.0]])
    return op, b


def diagonal_constraints(n):
    mats = []
    for i in range(n):
        E = np.zeros((n, n))
        E[i, i] = 1.0
        mats.append(E)
    return MatrixConstraints(mats), np.ones(n)


def _constraints(data):
    if data.diagonal:
        return diagonal_constraints(data.n)
    return unitarity_constraints(data.M, data.augmented)


def sdr_step(data, d_prev, params=DEFAULT_RECTIFIER, eps=1e-7, constraints=None):
    """One linearized SDR solve: minimize Tr(-K1 X) over the relaxed feasible set."""
    op, b = constraints or _constraints(data)
    K1 = objective_matrix(data, d_prev, params)
    scale = max(np.abs(K1).max(), 1e-300)
    sol = solve(SdpProblem(-K1 / scale, op, b, eps=eps))
    return sol.X, sol


def sdp_rank_step(data, d_prev, X_bar, mu, params=DEFAULT_RECTIFIER, eps=1e-7, constraints=None):
    """Linearized solve with the rank-one surrogate as an exact penalty.

    ||X||_* - <X, X_bar>/||X_bar||_F is non-negative on the PSD cone and
    vanishes only at multiples of a rank-one X_bar; it is added to the
    cost with weight ``mu`` (relative to the largest entry of K1).
    """
    op, b = constraints or _constraints(data)
    K1 = objective_matrix(data, d_prev, params)
    scale = max(np.abs(K1).max(), 1e-300)
    nrm = np.linalg.norm(X_bar)
    if nrm == 0:
        raise SignalError("X_bar must be non-zero")
    penalty = np.eye(data.n) - X_bar / nrm
    sol = solve(SdpProblem(-K1 / scale + mu * herm(penalty), op, b, eps=eps))
    return sol.X, sol


def gaussian_randomization(X, data, K_rand, seed=0, params=DEFAULT_RECTIFIER, return_value=False):
    """Best of ``K_rand`` draws theta ~ CN(0, X) ranked by the SDR objective.

    A numerically rank-one X (dominance ratio >= 1 - 1e-6) returns its
    scaled principal eigenvector directly.
    """
    X = herm(np.asarray(X))
    w, V = np.linalg.eigh(X)
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        raise SignalError("X has no positive eigenvalue")
    principal = np.sqrt(w[-1]) * V[:, -1]
    if w[-1] / w.sum() >= 1 - 1e-6 or K_rand == 0:
        best = principal
        val = sdr_objective(data, best, params)
        return (best, val) if return_value else best
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), 0xD1CE])))
    root = V * np.sqrt(w)
    best, best_val = None, -np.inf
    chunk = 1024
    drawn = 0
    zc = data.z.conj()
    while drawn < K_rand:
        b = min(chunk, K_rand - drawn)
        xi = (rng.standard_normal((data.n, b)) + 1j * rng.standard_normal((data.n, b))) / np.sqrt(2)
        thetas = root @ xi  # (n, b)
        Y = (zc @ thetas).T  # (b, N)
        vals = _lag_objective_batch(Y, params)
        j = int(np.argmax(vals))
        if vals[j] > best_val:
            best_val, best = float(vals[j]), thetas[:, j].copy()
        drawn += b
    return (best, best_val) if return_value else best


def _lag_objective_batch(Y, params):
    N = Y.shape[1]
    d0 = np.sum(np.abs(Y) ** 2, axis=1)
    val = 0.5 * params.K2 * d0 + 0.375 * params.K4 * d0**2
    for k in range(1, N):
        dk = np.sum(np.conj(Y[:, : N - k]) * Y[:, k:], axis=1)
        val += 0.75 * params.K4 * np.abs(dk) ** 2
    return val


def theta_to_matrix(theta, data):
    """Scattering candidate from a (possibly augmented) lifted vector; augmented vectors are normalized by g."""
    theta = np.asarray(theta)
    if data.augmented:
        g = theta[-1]
        if abs(g) < 1e-9 * max(1.0, np.linalg.norm(theta)):
            raise SignalError("auxiliary variable g vanished; cannot normalize the direct-link solution")
        theta = theta[:-1] / g
    if data.diagonal:
        return np.diag(theta)
    return unvec(theta, data.M)


def relaxation_loop(data, d_init, params=DEFAULT_RECTIFIER, mode="sdr", inner_tol=1e-4, max_inner=10,
                    mu0=0.05, growth=2.0, rank_target=0.999, max_inner_rank=14):
    """Successive linearization of the lifted problem.

    ``mode="sdr"`` repeats :func:`sdr_step` until the relaxed objective
    settles. ``mode="sdp"`` starts the same way and then adds the rank
    penalty with a growing weight until the dominance ratio reaches
    ``rank_target`` and the objective settles.
    Returns ``(X, info)``.
    """
    constraints = _constraints(data)
    d = d_init
    X, prev = None, None
    statuses, drs, values = [], [], []
    for _ in range(max_inner):
        X, sol = sdr_step(data, d, params, constraints=constraints)
        statuses.append(sol.status)
        val = sdr_objective(data, X, params)
        values.append(val)
        drs.append(dominance_ratio(X))
        d = lag_values(data, X)
        if prev is not None and abs(val - prev) <= inner_tol * abs(val):
            break
        prev = val
    if mode == "sdp":
        mu = mu0
        prev = None
        for _ in range(max_inner_rank):
            X_new, sol = sdp_rank_step(data, d, X, mu, params, constraints=constraints)
            statuses.append(sol.status)
            if not sol.ok:
                break
            X = X_new
            val = sdr_objective(data, X, params)
            values.append(val)
            drs.append(dominance_ratio(X))
            d = lag_values(data, X)
            if drs[-1] >= rank_target and prev is not None and abs(val - prev) <= inner_tol * abs(val):
                break
            prev = val
            mu *= growth
    return X, {"statuses": statuses, "dr": drs, "values": values}
