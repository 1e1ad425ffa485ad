"""Dense primal-dual interior-point solver for standard-form SDPs.

    minimize  <C, X>   subject to  <A_i, X> = b_i,  X >= 0,

with <U, V> = Re Tr(U V). Data may be real symmetric or complex
Hermitian; the iteration is written once and runs in whichever field the
data lives in. Search directions follow the HKM scaling with a Mehrotra
predictor-corrector and an infeasible starting point.

Constraints are supplied through a small map interface (``apply``,
``adjoint``, ``schur``) so that structured families such as the
unitarity conditions of a lifted scattering matrix can assemble the
Schur complement without touching each constraint matrix separately.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from ._validation import ContractError, check_hermitian


def herm(A):
    return 0.5 * (A + A.conj().T)


def inner(U, V):
    """Re Tr(U^H V) for matrices of equal shape."""
    return float(np.real(np.vdot(U, V)))


# ---------------------------------------------------------------------------
# constraint maps


class MatrixConstraints:
    """Constraints given as an explicit list of Hermitian (or symmetric) matrices."""

    def __init__(self, mats, n=None):
        if len(mats) == 0:
            raise ContractError("at least one constraint matrix is required")
        triplets = []
        for i, A in enumerate(mats):
            coo = sp.coo_matrix(A)
            if n is None:
                n = coo.shape[0]
            if coo.shape != (n, n):
                raise ContractError("constraint matrices must all be n x n")
            dense_check = coo.toarray()
            if np.linalg.norm(dense_check - dense_check.conj().T) > 1e-12 * max(1.0, np.linalg.norm(dense_check)):
                raise ContractError(f"constraint matrix {i} is not Hermitian")
            triplets.append((np.full(coo.nnz, i), coo.row, coo.col, coo.data))
        self.n = n
        self.m = len(mats)
        self.owner = np.concatenate([t[0] for t in triplets])
        self.rows = np.concatenate([t[1] for t in triplets]).astype(np.intp)
        self.cols = np.concatenate([t[2] for t in triplets]).astype(np.intp)
        self.vals = np.concatenate([t[3] for t in triplets])
        self.is_complex = np.iscomplexobj(self.vals)
        self._incidence = sp.csr_matrix((np.ones(self.owner.shape[0]), (np.arange(self.owner.shape[0]), self.owner)), shape=(self.owner.shape[0], self.m))

    def apply(self, X):
        # Tr(A X) = sum A[r, c] X[c, r]
        contrib = self.vals * X[self.cols, self.rows]
        out = np.zeros(self.m, dtype=contrib.dtype)
        np.add.at(out, self.owner, contrib)
        return np.real(out)

    def adjoint(self, y, dtype=None):
        dtype = dtype or (complex if self.is_complex else float)
        out = np.zeros((self.n, self.n), dtype=dtype)
        np.add.at(out, (self.rows, self.cols), self.vals * y[self.owner])
        return out

    def row_norms(self):
        sq = np.zeros(self.m)
        np.add.at(sq, self.owner, np.abs(self.vals) ** 2)
        return np.sqrt(sq)

    def products(self, X, Sinv):
        """Yield X A_j S^-1 for every constraint j."""
        for j in range(self.m):
            sel = self.owner == j
            r, c, v = self.rows[sel], self.cols[sel], self.vals[sel]
            yield (X[:, r] * v) @ Sinv[c, :]

    def schur(self, X, Sinv):
        T = self.owner.shape[0]
        if T <= 3000:
            # M_ij = Re sum_{s in i, t in j} a_s v_t X[c_s, r_t] Sinv[c_t, r_s]
            K = X[np.ix_(self.cols, self.rows)] * Sinv[np.ix_(self.cols, self.rows)].T
            K = (self.vals[:, None] * K) * self.vals[None, :]
            Msch = np.real(self._incidence.T @ (self._incidence.T @ K.T).T)
        else:
            Msch = np.empty((self.m, self.m))
            for j, Y in enumerate(self.products(X, Sinv)):
                Msch[:, j] = self.apply(Y)
        return 0.5 * (Msch + Msch.T)


class PartialTraceConstraints:
    """Unitarity of a lifted symmetric matrix: Ptr_c(L X L^T) = I_M.

    ``L`` gathers half-vector slots into Vec order (the P matrix, optionally
    padded with zero columns for auxiliary variables). The M x M Hermitian
    output is expressed in the real basis {E_rr; Re(r, r'); Im(r, r')},
    which gives M^2 real constraints.
    """

    def __init__(self, M, slots, n):
        self.M = M
        self.n = n
        self.slots = np.asarray(slots, dtype=np.intp)
        self.m = M * M
        self.is_complex = True
        L = np.zeros((M * M, n))
        L[np.arange(M * M), self.slots] = 1.0
        self.L = L
        basis = []
        for r in range(M):
            B = np.zeros((M, M), dtype=complex)
            B[r, r] = 1.0
            basis.append(B)
        for r in range(M):
            for q in range(r + 1, M):
                B = np.zeros((M, M), dtype=complex)
                B[q, r] = B[r, q] = 0.5
                basis.append(B)
                B = np.zeros((M, M), dtype=complex)
                B[q, r] = 0.5 / 1j
                B[r, q] = -0.5 / 1j
                basis.append(B)
        self.basis = np.array(basis)
        self._Bmat = self.basis.reshape(self.m, M * M).T  # column s = vec(B_s)
        self.target = np.concatenate([np.ones(M), np.zeros(self.m - M)])

    def _lift(self, X):
        return X[np.ix_(self.slots, self.slots)]

    def _partial_trace(self, Psi):
        M = self.M
        return np.einsum("crcs->rs", Psi.reshape(M, M, M, M))

    def apply(self, X):
        Y = self._partial_trace(self._lift(X))
        # Re Tr(B_s Y) = Re sum_ij B_s[j, i] Y[i, j]
        return np.real(np.einsum("sij,ji->s", self.basis, Y))

    def adjoint(self, y, dtype=complex):
        Ymat = np.tensordot(y, self.basis, axes=1)
        K = np.kron(np.eye(self.M), Ymat)
        return self.L.T @ K @ self.L

    def row_norms(self):
        return np.full(self.m, np.sqrt(self.M) * np.linalg.norm(self.basis[0]))

    def schur(self, X, Sinv):
        M = self.M
        X4 = self._lift(X).reshape(M, M, M, M)  # [c, r, l, a]
        S4 = self._lift(Sinv).reshape(M, M, M, M)  # [l, b, c, r']
        # T[r, r', a, b] = sum_{c, l} X4[c, r, l, a] S4[l, b, c, r']
        Xp = X4.transpose(1, 3, 0, 2).reshape(M * M, M * M)  # (r a), (c l)
        Sp = S4.transpose(2, 0, 1, 3).reshape(M * M, M * M)  # (c l), (b r')
        T = (Xp @ Sp).reshape(M, M, M, M).transpose(0, 3, 1, 2).reshape(M * M, M * M)
        Msch = np.real(self._Bmat.conj().T @ T @ self._Bmat)
        return 0.5 * (Msch + Msch.T)


class CompositeConstraints:
    """Stack of constraint maps; all but the first must be :class:`MatrixConstraints`."""

    def __init__(self, parts):
        self.parts = list(parts)
        self.n = self.parts[0].n
        self.m = sum(p.m for p in self.parts)
        self.is_complex = any(p.is_complex for p in self.parts)
        for p in self.parts[1:]:
            if not isinstance(p, MatrixConstraints):
                raise ContractError("secondary constraint blocks must be explicit matrices")

    def apply(self, X):
        return np.concatenate([p.apply(X) for p in self.parts])

    def adjoint(self, y, dtype=complex):
        out, start = None, 0
        for p in self.parts:
            term = p.adjoint(y[start : start + p.m], dtype=dtype)
            out = term if out is None else out + term
            start += p.m
        return out

    def row_norms(self):
        return np.concatenate([p.row_norms() for p in self.parts])

    def schur(self, X, Sinv):
        sizes = [p.m for p in self.parts]
        offs = np.concatenate([[0], np.cumsum(sizes)])
        Msch = np.zeros((self.m, self.m))
        for i, p in enumerate(self.parts):
            Msch[offs[i] : offs[i + 1], offs[i] : offs[i + 1]] = p.schur(X, Sinv)
        for j, p in enumerate(self.parts[1:], start=1):
            for jj, Y in enumerate(p.products(X, Sinv)):
                col = offs[j] + jj
                for i in range(j):
                    Msch[offs[i] : offs[i + 1], col] = self.parts[i].apply(Y)
                    Msch[col, offs[i] : offs[i + 1]] = Msch[offs[i] : offs[i + 1], col]
        return Msch


# ---------------------------------------------------------------------------
# problem / solution


@dataclass
class SdpProblem:
    """Standard-form SDP. ``A`` is a list of matrices or a constraint map."""

    C: np.ndarray
    A: object
    b: np.ndarray
    eps: float = 1e-7
    max_iters: int = 100

    def __post_init__(self):
        self.C = check_hermitian(self.C, "C", tol=1e-12) if np.iscomplexobj(self.C) else np.asarray(self.C, dtype=float)
        if not np.iscomplexobj(self.C) and np.linalg.norm(self.C - self.C.T) > 1e-12 * max(1.0, np.linalg.norm(self.C)):
            raise ContractError("C must be symmetric")
        if isinstance(self.A, (list, tuple)):
            self.A = MatrixConstraints(self.A, n=self.C.shape[0])
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        if self.A.n != self.C.shape[0]:
            raise ContractError("constraint dimension does not match C")
        if self.A.m != self.b.shape[0]:
            raise ContractError(f"expected {self.A.m} right-hand sides, got {self.b.shape[0]}")

    @property
    def n(self):
        return self.C.shape[0]

    @property
    def is_complex(self):
        return bool(np.iscomplexobj(self.C) or self.A.is_complex)


@dataclass
class SdpSolution:
    X: np.ndarray
    y: np.ndarray
    S: np.ndarray
    status: str
    primal_objective: float
    dual_objective: float
    primal_residual: float
    dual_residual: float
    gap: float
    iterations: int
    history: list = field(default_factory=list)

    @property
    def ok(self):
        return self.status in ("optimal", "near-optimal")


def _chol(A):
    return sla.cholesky(A, lower=True, check_finite=False)


def _max_step(L, D):
    """Largest alpha with L L^H + alpha D >= 0 (inf when D >= 0)."""
    G = sla.solve_triangular(L, D, lower=True, check_finite=False)
    G = sla.solve_triangular(L, G.conj().T, lower=True, check_finite=False)
    lam = sla.eigvalsh(herm(G), subset_by_index=[0, 0], check_finite=False)[0]
    return np.inf if lam >= 0 else -1.0 / lam


def solve(problem, verbose=False):
    """Solve ``problem`` and return an :class:`SdpSolution`.

    Status is one of ``optimal``, ``near-optimal``, ``infeasible``,
    ``unbounded`` or ``iteration-limit``.
    """
    op = problem.A
    n, eps = problem.n, problem.eps
    dtype = complex if problem.is_complex else float
    C_raw = problem.C.astype(dtype)
    b_raw = problem.b
    scale_C = max(1.0, np.linalg.norm(C_raw))
    scale_b = max(1.0, np.linalg.norm(b_raw))
    C = C_raw / scale_C
    b = b_raw / scale_b
    norms = op.row_norms()

    xi = max(10.0, np.sqrt(n), n * np.max((1 + np.abs(b)) / (1 + norms)))
    eta = max(10.0, np.sqrt(n), np.max(norms), np.linalg.norm(C))
    eye = np.eye(n, dtype=dtype)
    X = xi * eye
    S = eta * eye
    y = np.zeros(op.m)

    norm_b, norm_C = np.linalg.norm(b), np.linalg.norm(C)
    history = []
    status = "iteration-limit"
    frac = 0.95
    it = 0
    for it in range(1, problem.max_iters + 1):
        rp = b - op.apply(X)
        Rd = C - S - op.adjoint(y, dtype=dtype)
        pobj = inner(C, X)
        dobj = float(b @ y)
        mu = inner(X, S) / n
        relp = np.linalg.norm(rp) / (1 + norm_b)
        reld = np.linalg.norm(Rd) / (1 + norm_C)
        gap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
        history.append((pobj * scale_C * scale_b, dobj * scale_C * scale_b, relp, reld, gap))
        if verbose:
            print(f"{it:3d} p={pobj:+.6e} d={dobj:+.6e} rp={relp:.1e} rd={reld:.1e} gap={gap:.1e}")
        if relp <= eps and reld <= eps and gap <= eps:
            status = "optimal"
            break
        # infeasibility certificates on normalized rays
        ATy_S = op.adjoint(y, dtype=dtype) + S
        if dobj > 0 and np.linalg.norm(ATy_S) / dobj < 1e-9 and dobj > 1e6:
            status = "infeasible"
            break
        if pobj < 0 and np.linalg.norm(op.apply(X)) / -pobj < 1e-9 and -pobj > 1e6:
            status = "unbounded"
            break

        try:
            LS = _chol(S)
            LX = _chol(X)
        except np.linalg.LinAlgError:
            break
        Sinv = sla.cho_solve((LS, True), eye, check_finite=False)
        Sinv = herm(Sinv)
        Msch = op.schur(X, Sinv)
        try:
            fac = sla.cho_factor(Msch, lower=True, check_finite=False)
            lin_solve = lambda r: sla.cho_solve(fac, r, check_finite=False)  # noqa: E731
        except np.linalg.LinAlgError:
            lu = sla.lu_factor(Msch + 1e-14 * np.trace(Msch) / op.m * np.eye(op.m), check_finite=False)
            lin_solve = lambda r: sla.lu_solve(lu, r, check_finite=False)  # noqa: E731

        XRdS = X @ Rd @ Sinv

        def direction(target, corr):
            # Delta X = target - X - X Delta S S^-1 - corr, Delta S = Rd - A^T(dy)
            rhs = rp - op.apply(target - X - XRdS - corr)
            dy = lin_solve(rhs)
            dS = Rd - op.adjoint(dy, dtype=dtype)
            dX = herm(target - X - X @ dS @ Sinv - corr)
            return dX, dy, herm(dS)

        dXa, dya, dSa = direction(np.zeros_like(X), 0.0)
        ap = min(1.0, _max_step(LX, dXa))
        ad = min(1.0, _max_step(LS, dSa))
        mu_aff = inner(X + ap * dXa, S + ad * dSa) / n
        sigma = float(np.clip((mu_aff / mu) ** 3, 0.0, 1.0)) if mu > 0 else 0.0
        dX, dy, dS = direction(sigma * mu * Sinv, herm(dXa @ dSa @ Sinv))
        ap = min(1.0, frac * _max_step(LX, dX))
        ad = min(1.0, frac * _max_step(LS, dS))
        X = herm(X + ap * dX)
        y = y + ad * dy
        S = herm(S + ad * dS)
        frac = 0.98 if min(ap, ad) > 0.5 else 0.95

    rp = b - op.apply(X)
    Rd = C - S - op.adjoint(y, dtype=dtype)
    relp = np.linalg.norm(rp) / (1 + norm_b)
    reld = np.linalg.norm(Rd) / (1 + norm_C)
    pobj, dobj = inner(C, X), float(b @ y)
    gap = abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj))
    if status == "iteration-limit" and max(relp, reld, gap) <= 1e3 * eps:
        status = "near-optimal"
    return SdpSolution(
        X=X * scale_b,
        y=y * scale_C,
        S=S * scale_C,
        status=status,
        primal_objective=pobj * scale_C * scale_b,
        dual_objective=dobj * scale_C * scale_b,
        primal_residual=relp,
        dual_residual=reld,
        gap=gap,
        iterations=it,
        history=history,
    )


# ---------------------------------------------------------------------------
# real embedding of complex problems


def embed_matrix(A):
    """[[Re A, -Im A], [Im A, Re A]]."""
    A = np.asarray(A)
    return np.block([[A.real, -A.imag], [A.imag, A.real]])


def embed_hermitian(C, A_list, b, eps=1e-7, max_iters=100):
    """Real symmetric embedding of a complex Hermitian SDP.

    For Hermitian U, V: Tr(embed(U) embed(V)) = 2 Re Tr(U V). The embedded
    right-hand sides are therefore 2 b and the embedded objective is twice
    the complex one.
    """
    C = check_hermitian(C, "C")
    mats = [embed_matrix(check_hermitian(A, f"A[{i}]")) for i, A in enumerate(A_list)]
    return SdpProblem(embed_matrix(C), mats, 2 * np.asarray(b, dtype=float), eps=eps, max_iters=max_iters)


def recover_complex(X_real):
    """Inverse of the embedding for a (possibly unstructured) real solution."""
    X_real = np.asarray(X_real)
    n = X_real.shape[0] // 2
    Y11, Y12 = X_real[:n, :n], X_real[:n, n:]
    Y21, Y22 = X_real[n:, :n], X_real[n:, n:]
    return herm(0.5 * (Y11 + Y22) + 0.5j * (Y21 - Y12))


def dominance_ratio(X):
    """Largest eigenvalue over the eigenvalue sum of a PSD matrix (clipped at 0)."""
    w = np.clip(np.linalg.eigvalsh(herm(np.asarray(X))), 0.0, None)
    total = w.sum()
    return float(w[-1] / total) if total > 0 else 0.0
