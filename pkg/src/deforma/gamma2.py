"""Factorization (gamma_2) norm of a complex matrix by semidefinite programming.

The gamma_2 norm of ``K`` is ``min max_x ||P[x, :]|| * max_y ||Q[:, y]||`` over
factorizations ``K = P @ Q``. It equals the norm of ``K`` viewed as an element of
the Haagerup tensor product of two commutative ``ell^infty`` spaces, i.e. the
norm of ``K`` as a Schur multiplier. It is the optimal value of

    minimize t  subject to  [[X, K], [K^*, Y]] >= 0,  diag(X) <= t,  diag(Y) <= t.

The solver below is a dense primal-dual interior point method (HKM search
direction, Mehrotra predictor-corrector) working directly on Hermitian
matrices. All the linear constraints select single entries of the block
matrix, so the Schur complement is assembled by fancy indexing.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

__all__ = ["Gamma2Result", "Gamma2ConvergenceError", "gamma2_norm", "gamma2_solve"]


class Gamma2ConvergenceError(RuntimeError):
    """Raised when the interior point iteration stalls before reaching ``tol``."""

    def __init__(self, message: str, gap: float, iterations: int):
        super().__init__(message)
        self.gap = gap
        self.iterations = iterations


@dataclass(frozen=True)
class Gamma2Result:
    value: float
    primal: float
    dual: float
    gap: float
    primal_infeasibility: float
    dual_infeasibility: float
    iterations: int


class _Problem:
    """Standard-form data: x = (Z hermitian psd, v = (s, t) >= 0), A x = b."""

    def __init__(self, K: np.ndarray):
        n, m = K.shape
        N = n + m
        self.n, self.m, self.N = n, m, N
        rows, cols = np.meshgrid(np.arange(n), n + np.arange(m), indexing="ij")
        p = rows.ravel()
        q = cols.ravel()
        ne = p.size
        diag = np.arange(N)
        half = 0.5
        # Each constraint is Re tr(A_k Z) with A_k = sum of two terms g * e_a e_b^T.
        # Order: Re block entries, Im block entries, diagonal entries.
        self.a1 = np.concatenate([p, p, diag])
        self.b1 = np.concatenate([q, q, diag])
        self.g1 = np.concatenate([np.full(ne, half), np.full(ne, 0.5j), np.ones(N)]).astype(complex)
        self.a2 = np.concatenate([q, q, diag])
        self.b2 = np.concatenate([p, p, diag])
        self.g2 = np.concatenate([np.full(ne, half), np.full(ne, -0.5j), np.zeros(N)]).astype(complex)
        self.ne = ne
        self.ncon = 2 * ne + N
        self.b = np.concatenate([K.real.ravel(), K.imag.ravel(), np.zeros(N)])
        # LP block: v = (s_0..s_{N-1}, t); the diagonal rows read Z_aa + s_a - t.
        self.lp = np.zeros((self.ncon, N + 1))
        self.lp[2 * ne + diag, diag] = 1.0
        self.lp[2 * ne:, N] = -1.0
        self.c_lp = np.zeros(N + 1)
        self.c_lp[N] = 1.0

    def apply(self, Z: np.ndarray) -> np.ndarray:
        """A(Z) = (Re tr(A_k Z))_k; only the Hermitian part of Z contributes."""
        ne = self.ne
        Z = _herm(Z)
        out = np.empty(self.ncon)
        entries = Z[self.a1[:ne], self.b1[:ne]]
        out[:ne] = entries.real
        out[ne:2 * ne] = entries.imag
        out[2 * ne:] = np.diagonal(Z).real
        return out

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        """A^T(y) restricted to the PSD block."""
        ne, N = self.ne, self.N
        H = np.zeros((N, N), dtype=complex)
        w = 0.5 * (y[:ne] + 1j * y[ne:2 * ne])
        pp, qq = self.a1[:ne], self.b1[:ne]
        H[pp, qq] = w
        H[qq, pp] = np.conj(w)
        H[np.arange(N), np.arange(N)] = y[2 * ne:]
        return H

    def schur(self, X: np.ndarray, W: np.ndarray, ratio: np.ndarray) -> np.ndarray:
        """M_kl = Re tr(A_k X A_l W) plus the LP contribution lp diag(ratio) lp^T.

        For block constraints A = h E_ab + conj(h) E_ba (a a row, b a column index)
        the entry expands into four products of sub-blocks of X and W.
        """
        n, N, ne = self.n, self.N, self.ne
        X11, X12, X21, X22 = X[:n, :n], X[:n, n:], X[n:, :n], X[n:, n:]
        W11, W12, W21, W22 = W[:n, :n], W[:n, n:], W[n:, :n], W[n:, n:]
        # index order (a, b, c, d): k = (a, b), l = (c, d)
        T1 = np.einsum("bc,da->abcd", X21, W21).reshape(ne, ne)
        T2 = np.einsum("bd,ca->abcd", X22, W11).reshape(ne, ne)
        T3 = np.einsum("ac,db->abcd", X11, W22).reshape(ne, ne)
        T4 = np.einsum("ad,cb->abcd", X12, W12).reshape(ne, ne)
        M = np.empty((self.ncon, self.ncon))
        M[:ne, :ne] = 0.25 * (T1 + T2 + T3 + T4).real
        M[:ne, ne:2 * ne] = -0.25 * (T1 - T2 + T3 - T4).imag
        M[ne:2 * ne, :ne] = -0.25 * (T1 + T2 - T3 - T4).imag
        M[ne:2 * ne, ne:2 * ne] = 0.25 * (-T1 + T2 + T3 - T4).real
        # block rows against diagonal constraints E_ee: h X_be W_ea + conj(h) X_ae W_eb
        P = np.einsum("be,ea->abe", X[n:, :], W[:, :n]).reshape(ne, N)
        Q = np.einsum("ae,eb->abe", X[:n, :], W[:, n:]).reshape(ne, N)
        ED_re = 0.5 * (P + Q).real
        ED_im = -0.5 * (P - Q).imag
        M[:ne, 2 * ne:] = ED_re
        M[ne:2 * ne, 2 * ne:] = ED_im
        M[2 * ne:, :ne] = ED_re.T
        M[2 * ne:, ne:2 * ne] = ED_im.T
        M[2 * ne:, 2 * ne:] = (X * W.T).real
        M += (self.lp * ratio) @ self.lp.T
        return M


def _herm(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.conj().T)


def _max_step(X: np.ndarray, dX: np.ndarray) -> float:
    try:
        L = linalg.cholesky(X, lower=True)
    except linalg.LinAlgError:
        return 0.0
    Li = linalg.solve_triangular(L, np.eye(X.shape[0]), lower=True)
    lam = linalg.eigvalsh(_herm(Li @ dX @ Li.conj().T))[0]
    return np.inf if lam >= 0 else -1.0 / lam


def _max_step_lp(x: np.ndarray, dx: np.ndarray) -> float:
    neg = dx < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-x[neg] / dx[neg]))


def gamma2_solve(K, tol: float = 1e-7, max_iter: int = 500) -> Gamma2Result:
    """Solve the gamma_2 SDP for ``K`` and return primal/dual values and the gap.

    ``tol`` bounds the absolute duality gap and, relative to ``max|K|``, the
    primal and dual infeasibilities.
    """
    K = np.atleast_2d(np.asarray(K, dtype=complex))
    if K.ndim != 2:
        raise ValueError("kernel must be a matrix")
    if tol <= 0:
        raise ValueError("tol must be positive")
    scale = float(np.max(np.abs(K))) if K.size else 0.0
    if scale == 0.0:
        return Gamma2Result(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0)
    Kn = K / scale
    prob = _Problem(Kn)
    N = prob.N
    # tolerance on the normalized problem
    tol_n = tol / scale

    X = np.eye(N, dtype=complex) * (1.0 + np.sqrt(prob.n * prob.m))
    S = np.eye(N, dtype=complex)
    v = np.full(N + 1, 1.0)
    v[N] = 1.0 + np.sqrt(prob.n * prob.m)
    sv = np.full(N + 1, 1.0)
    y = np.zeros(prob.ncon)
    nu = 2 * N + 1
    bnorm = 1.0 + np.linalg.norm(prob.b)

    gap = np.inf
    for it in range(1, max_iter + 1):
        rp = prob.b - prob.apply(X) - prob.lp @ v
        Rd = -prob.adjoint(y) - S
        rd = prob.c_lp - prob.lp.T @ y - sv
        pobj = v[N]
        dobj = prob.b @ y
        gap = abs(pobj - dobj)
        pinf = np.linalg.norm(rp) / bnorm
        dinf = (np.linalg.norm(Rd) + np.linalg.norm(rd)) / 2.0
        mu = (np.real(np.vdot(X, S)) + v @ sv) / nu
        if gap <= 0.5 * tol_n and pinf <= 0.1 * tol_n and dinf <= 0.1 * tol_n:
            return Gamma2Result(
                value=float(0.5 * (pobj + dobj) * scale),
                primal=float(pobj * scale),
                dual=float(dobj * scale),
                gap=float(gap * scale),
                primal_infeasibility=float(pinf),
                dual_infeasibility=float(dinf),
                iterations=it,
            )

        try:
            W = linalg.inv(S)
        except linalg.LinAlgError:
            break
        W = _herm(W)
        ratio = v / sv
        M = prob.schur(X, W, ratio)
        M = 0.5 * (M + M.T)
        try:
            factor = linalg.cho_factor(M, lower=True, check_finite=False)
            solve = lambda r: linalg.cho_solve(factor, r, check_finite=False)  # noqa: E731
        except linalg.LinAlgError:
            reg = M + 1e-14 * np.trace(M) / M.shape[0] * np.eye(M.shape[0])
            lu = linalg.lu_factor(reg, check_finite=False)
            solve = lambda r: linalg.lu_solve(lu, r, check_finite=False)  # noqa: E731

        XRW = X @ Rd @ W

        def direction(sigma_mu, corr_psd=None, corr_lp=None):
            T_psd = sigma_mu * W - X - XRW
            t_lp = sigma_mu / sv - v - ratio * rd
            if corr_psd is not None:
                T_psd = T_psd - corr_psd
                t_lp = t_lp - corr_lp
            rhs = rp - prob.apply(T_psd) - prob.lp @ t_lp
            dy = solve(rhs)
            dS = Rd - prob.adjoint(dy)
            dsv = rd - prob.lp.T @ dy
            dX = _herm(T_psd + X @ prob.adjoint(dy) @ W)
            dv = t_lp + ratio * (prob.lp.T @ dy)
            return dX, dv, dy, dS, dsv

        # predictor
        dXa, dva, dya, dSa, dsva = direction(0.0)
        ap = min(1.0, _max_step(X, dXa), _max_step_lp(v, dva))
        ad = min(1.0, _max_step(S, dSa), _max_step_lp(sv, dsva))
        mu_aff = (np.real(np.vdot(X + ap * dXa, S + ad * dSa)) + (v + ap * dva) @ (sv + ad * dsva)) / nu
        sigma = min(1.0, (mu_aff / mu) ** 3) if mu > 0 else 0.0
        # corrector
        dX, dv, dy, dS, dsv = direction(sigma * mu, dXa @ dSa @ W, dva * dsva / sv)
        ap = min(1.0, 0.98 * _max_step(X, dX), 0.98 * _max_step_lp(v, dv))
        ad = min(1.0, 0.98 * _max_step(S, dS), 0.98 * _max_step_lp(sv, dsv))
        if ap < 1e-12 and ad < 1e-12:
            break
        X = _herm(X + ap * dX)
        v = v + ap * dv
        y = y + ad * dy
        S = _herm(S + ad * dS)
        sv = sv + ad * dsv

    raise Gamma2ConvergenceError(
        f"gamma_2 interior point did not converge (gap {gap * scale:.3e})",
        gap=float(gap * scale), iterations=it,
    )


def gamma2_norm(K, tol: float = 1e-7, max_iter: int = 500) -> float:
    """Return the gamma_2 (Schur multiplier) norm of ``K`` to duality gap ``tol``."""
    return gamma2_solve(K, tol=tol, max_iter=max_iter).value
