"""BD-RIS algebra.

Impedance to scattering map, the half-vectorization of symmetric
matrices through the permutation matrix P, the first-order Neumann
linearization of the cascade channel around an impedance matrix, the
Takagi factorization and the randomized mapping of a relaxed scattering
matrix onto the symmetric-unitary set.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from ._validation import (
    ContractError,
    NumericalError,
    check_channels,
    check_positive,
    check_square,
    check_symmetric,
    check_vector,
)
from .rectenna import DEFAULT_RECTIFIER, idc_from_products

DEFAULT_Z0 = 50.0


# ---------------------------------------------------------------------------
# impedance / scattering


def scattering_from_impedance(Z, Z0=DEFAULT_Z0, imag_tol=1e-9):
    """Theta = (Z + Z0 I)^-1 (Z - Z0 I) for a lossless reciprocal impedance network."""
    Z = check_symmetric(Z, "Z")
    check_positive(Z0, "Z0")
    if np.max(np.abs(Z.real), initial=0.0) > imag_tol * max(1.0, np.max(np.abs(Z))):
        raise ContractError("Z must be purely imaginary (lossless network)")
    M = Z.shape[0]
    eye = np.eye(M)
    K = Z + Z0 * eye
    cond = np.linalg.cond(K)
    if not np.isfinite(cond) or cond > 1e12:
        raise NumericalError(f"Z + Z0 I is singular to working precision (condition number {cond:.3e})")
    theta = np.linalg.solve(K, Z - Z0 * eye)
    return 0.5 * (theta + theta.T)


def infinity_norm(A):
    """Maximum absolute row sum."""
    return float(np.max(np.abs(A).sum(axis=1)))


def unitarity_residual(theta):
    theta = np.asarray(theta)
    return float(np.linalg.norm(theta.conj().T @ theta - np.eye(theta.shape[0])))


def symmetry_residual(theta):
    theta = np.asarray(theta)
    return float(np.linalg.norm(theta - theta.T))


def is_feasible(theta, unitary_tol=1e-8, symmetric_tol=1e-9):
    return unitarity_residual(theta) <= unitary_tol and symmetry_residual(theta) <= symmetric_tol


# ---------------------------------------------------------------------------
# half-vectorization


@lru_cache(maxsize=64)
def half_index(M):
    """Row/column of each half-vector slot, following the P-matrix indexing.

    Slot k (0-based) of column m holds entries (n, m) with n <= m, so the
    order is (0,0), (0,1), (1,1), (0,2), (1,2), (2,2), ...
    """
    rows, cols = [], []
    for m in range(M):
        for n in range(m + 1):
            rows.append(n)
            cols.append(m)
    rows = np.array(rows, dtype=np.intp)
    cols = np.array(cols, dtype=np.intp)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


def half_dim(M):
    return M * (M + 1) // 2


@lru_cache(maxsize=64)
def _vec_to_half(M):
    # slot of every Vec position (column-major)
    slot = np.empty((M, M), dtype=np.intp)
    rows, cols = half_index(M)
    slot[rows, cols] = np.arange(rows.shape[0])
    slot[cols, rows] = np.arange(rows.shape[0])
    out = slot.reshape(-1, order="F")
    out.setflags(write=False)
    return out


def permutation_matrix(M):
    """Sparse M^2 x M(M+1)/2 zero/one matrix with P halfvec(Theta) = Vec(Theta)."""
    if int(M) != M or M < 1:
        raise ContractError("M must be a positive integer")
    slots = _vec_to_half(M)
    return sp.csr_matrix((np.ones(M * M), (np.arange(M * M), slots)), shape=(M * M, half_dim(M)))


def halfvec(theta):
    theta = check_square(theta, "theta")
    rows, cols = half_index(theta.shape[0])
    return theta[rows, cols].copy()


def unvec(theta_half, M=None):
    theta_half = np.asarray(theta_half)
    if M is None:
        M = int(round((np.sqrt(8 * theta_half.shape[0] + 1) - 1) / 2))
    if half_dim(M) != theta_half.shape[0]:
        raise ContractError(f"length {theta_half.shape[0]} is not a half-vector size")
    return theta_half[_vec_to_half(M)].reshape(M, M, order="F")


def fold_to_half(mat):
    """P^T Vec(mat) for (..., M, M) stacks: off-diagonal slots receive mat[r,c] + mat[c,r]."""
    mat = np.asarray(mat)
    M = mat.shape[-1]
    rows, cols = half_index(M)
    out = mat[..., rows, cols] + mat[..., cols, rows]
    out[..., rows == cols] *= 0.5
    return out


# ---------------------------------------------------------------------------
# cascade channel


def cascade_channel(theta, h_R, h_I):
    """h_n = h_R,n^T Theta h_I,n; accepts single vectors or (N, M) stacks."""
    theta = np.asarray(theta, dtype=complex)
    h_R = np.asarray(h_R, dtype=complex)
    h_I = np.asarray(h_I, dtype=complex)
    return np.einsum("...i,ij,...j->...", h_R, theta, h_I)


def cascade_vectors(h_R, h_I):
    """a_n = P^T Vec(h_I,n h_R,n^T) so that h_n = a_n^T halfvec(Theta) for symmetric Theta."""
    h_R = np.asarray(h_R, dtype=complex)
    h_I = np.asarray(h_I, dtype=complex)
    return fold_to_half(h_I[..., :, None] * h_R[..., None, :])


def total_channel(theta, h_R, h_I, h_D=None):
    h = cascade_channel(theta, h_R, h_I)
    return h if h_D is None else h + h_D


# ---------------------------------------------------------------------------
# Neumann linearization


def _neumann_ratio(Z, Omega, Z0):
    A = np.linalg.inv(Z + Z0 * np.eye(Z.shape[0]))
    return np.max(np.abs(Omega), initial=0.0) * infinity_norm(A), A


def neumann_approx_inverse(Z, Omega, Z0=DEFAULT_Z0, max_ratio=0.1):
    """First-order Neumann approximation of (Z + Z0 I + Omega)^-1.

    The entrywise size of Omega times ||(Z + Z0 I)^-1||_inf must stay
    below ``max_ratio``; violations raise with the measured ratio.
    """
    Z = check_square(Z, "Z")
    Omega = check_square(Omega, "Omega")
    ratio, A = _neumann_ratio(Z, Omega, Z0)
    if ratio > max_ratio:
        raise ContractError(f"Neumann step too large: max|Omega| * ||A||_inf = {ratio:.3e} > {max_ratio}")
    return A - A @ Omega @ A


def linearized_cascade(Z, Omega, h_R, h_I, Z0=DEFAULT_Z0, exact=True, max_ratio=0.1):
    """Cascade channel at Z + Omega, linearized in Omega (matrix route).

    ``exact=True`` differentiates the full map Theta(Z); the
    reactance in the numerator then contributes a term alongside the
    perturbed inverse, and Theta(Z + Omega) ~ Theta(Z) + 2 Z0 A Omega A with
    A = (Z + Z0 I)^-1. ``exact=False`` perturbs only the inverse and keeps
    Z - Z0 I at its reference value.
    """
    Z = check_square(Z, "Z")
    Omega = check_square(Omega, "Omega")
    ratio, A = _neumann_ratio(Z, Omega, Z0)
    if ratio > max_ratio:
        raise ContractError(f"Neumann step too large: max|Omega| * ||A||_inf = {ratio:.3e} > {max_ratio}")
    eye = np.eye(Z.shape[0])
    if exact:
        theta = eye - 2 * Z0 * A
        theta_lin = theta + 2 * Z0 * A @ Omega @ A
    else:
        B = Z - Z0 * eye
        theta_lin = A @ (eye - Omega @ A) @ B
    return cascade_channel(theta_lin, h_R, h_I)


def linearization_terms(Z, h_R, h_I, Z0=DEFAULT_Z0, exact=True):
    """Vectorized route: returns (h0, f) with h(Z + Omega) ~ h0 - f^T halfvec(Omega).

    ``f`` has shape (..., M(M+1)/2) matching the leading shape of h_R.
    """
    Z = check_square(Z, "Z")
    eye = np.eye(Z.shape[0])
    A = np.linalg.inv(Z + Z0 * eye)
    h_R = np.asarray(h_R, dtype=complex)
    h_I = np.asarray(h_I, dtype=complex)
    if exact:
        Ah_R = h_R @ A.T
        Ah_I = h_I @ A.T
        theta = eye - 2 * Z0 * A
        h0 = cascade_channel(theta, h_R, h_I)
        # h_R^T A Omega A h_I = Tr(Omega (A h_I)(A h_R)^T)
        f = -2 * Z0 * fold_to_half(Ah_R[..., :, None] * Ah_I[..., None, :])
    else:
        B = Z - Z0 * eye
        a = h_R @ A
        b = h_I @ B.T
        h0 = np.einsum("...i,...i->...", a, b)
        Ab = b @ A.T
        f = fold_to_half(Ab[..., :, None] * a[..., None, :])
    return h0, f


# ---------------------------------------------------------------------------
# topology


@dataclass(frozen=True)
class Topology:
    """Connectivity of the impedance network as a mask over half-vector slots.

    ``free[k]`` is True when slot k may be non-zero; the complement is the
    zero-index set.
    """

    M: int
    free: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        if self.free.shape != (half_dim(self.M),):
            raise ContractError("topology mask has the wrong length")

    @property
    def zero_indices(self):
        return np.flatnonzero(~self.free)

    @classmethod
    def fully_connected(cls, M):
        return cls(M, np.ones(half_dim(M), dtype=bool), "fully-connected")

    @classmethod
    def diagonal(cls, M):
        rows, cols = half_index(M)
        return cls(M, rows == cols, "diagonal")

    @classmethod
    def group_connected(cls, M, group_size):
        if group_size < 1 or M % group_size:
            raise ContractError("group_size must divide M")
        rows, cols = half_index(M)
        return cls(M, rows // group_size == cols // group_size, f"group-{group_size}")

    @classmethod
    def from_name(cls, name, M, group_size=None):
        if name in ("fully-connected", "full"):
            return cls.fully_connected(M)
        if name == "diagonal":
            return cls.diagonal(M)
        if name.startswith("group"):
            return cls.group_connected(M, group_size or int(name.split("-")[-1]))
        raise ContractError(f"unknown topology {name!r}")


# ---------------------------------------------------------------------------
# Takagi factorization and feasibility mapping


def _takagi_svd(A, cluster_tol):
    U, s, Vh = np.linalg.svd(A)
    Vc = Vh.T  # conj(V)
    Q = np.empty_like(U)
    start = 0
    M = s.shape[0]
    while start < M:
        stop = start + 1
        while stop < M and s[start] - s[stop] <= cluster_tol * max(1.0, s[0]):
            stop += 1
        block = slice(start, stop)
        W = U[:, block].conj().T @ Vc[:, block]
        Q[:, block] = U[:, block] @ sla.sqrtm(W)
        start = stop
    return Q, s


def _takagi_eigh(A):
    M = A.shape[0]
    H = np.block([[A.real, A.imag], [A.imag, -A.real]])
    w, V = np.linalg.eigh(H)
    order = np.argsort(w)[::-1][:M]
    Q = V[:M, order] + 1j * V[M:, order]
    return Q, w[order]


def takagi(A, tol=1e-8):
    """Takagi factorization A = Q diag(sigma) Q^T of a complex symmetric matrix.

    The SVD is symmetrized block by block (clusters of equal singular
    values); if the result fails validation the real symmetric embedding
    [[Re A, Im A], [Im A, -Re A]] is diagonalized instead.
    """
    A = check_symmetric(A, "A", tol=1e-8)
    A = 0.5 * (A + A.T)
    scale = max(1.0, np.linalg.norm(A))
    for method in ("svd", "eigh"):
        try:
            if method == "svd":
                Q, s = _takagi_svd(A, cluster_tol=1e-9)
            else:
                Q, s = _takagi_eigh(A)
        except (np.linalg.LinAlgError, ValueError):
            continue
        err = np.linalg.norm((Q * s) @ Q.T - A)
        unit = np.linalg.norm(Q.conj().T @ Q - np.eye(A.shape[0]))
        if np.all(np.isfinite(Q)) and err <= tol * scale and unit <= 1e-8:
            return Q, s
    raise NumericalError("Takagi factorization failed validation")


def symmetric_unitary_projection(A):
    """Q Q^T from the Takagi factors: the phi = 0 candidate of the feasibility mapping."""
    Q, _ = takagi(A)
    theta = Q @ Q.T
    return 0.5 * (theta + theta.T)


def feasibility_map(theta_candidate, h_I, h_R, s, K=1000, seed=0, params=DEFAULT_RECTIFIER, h_D=None, return_info=False):
    """Map a relaxed scattering matrix to a symmetric unitary one.

    With Theta' = Q Sigma Q^T, candidates Q diag(exp(j phi)) Q^T are
    scored by the exact DC current under waveform ``s``. The candidate
    phi = 0 is always included alongside ``K`` random phase vectors.
    """
    h_I, h_R, h_D = check_channels(h_I, h_R, h_D)
    s = check_vector(s, "s", n=h_I.shape[0])
    if K < 0:
        raise ContractError("K must be non-negative")
    Q, _ = takagi(np.asarray(theta_candidate, dtype=complex))
    M = Q.shape[0]
    # h_n(phi) = sum_i exp(j phi_i) (Q^T h_R,n)_i (Q^T h_I,n)_i
    coeff = (h_R @ Q) * (h_I @ Q) * s[:, None]  # (N, M)
    direct = np.zeros(h_I.shape[0], dtype=complex) if h_D is None else s * h_D
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), 0x5EED])))
    best_val, best_phase = idc_from_products(coeff.sum(axis=1) + direct, params), np.zeros(M)
    chunk = 2048
    drawn = 0
    while drawn < K:
        b = min(chunk, K - drawn)
        phases = rng.uniform(0.0, 2 * np.pi, (b, M))
        Y = np.exp(1j * phases) @ coeff.T + direct  # (b, N)
        vals = _batched_idc(Y, params)
        j = int(np.argmax(vals))
        if vals[j] > best_val:
            best_val, best_phase = float(vals[j]), phases[j]
        drawn += b
    theta = (Q * np.exp(1j * best_phase)) @ Q.T
    theta = 0.5 * (theta + theta.T)
    if return_info:
        return theta, {"idc": best_val, "phases": best_phase, "Q": Q}
    return theta


def _batched_idc(Y, params):
    """Row-wise i_dc for a (B, N) batch of received phasors."""
    N = Y.shape[1]
    second = 0.5 * params.K2 * np.sum(np.abs(Y) ** 2, axis=1)
    conv = np.zeros((Y.shape[0], 2 * N - 1), dtype=complex)
    for a in range(N):
        conv[:, a : a + N] += Y[:, a : a + 1] * Y
    return second + 0.375 * params.K4 * np.sum(np.abs(conv) ** 2, axis=1)
