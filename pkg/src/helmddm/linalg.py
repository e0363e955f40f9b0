"""Dense complex factorizations, non-restarted GMRES with residual history,
and dense eigendecomposition.

GMRES is implemented here (modified Gram-Schmidt, Givens least squares, no
restart) so iteration-count semantics are fixed by this repo rather than by
a library default; factorizations and eigenvalues delegate to LAPACK.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla


class SingularOperatorError(np.linalg.LinAlgError):
    pass


class GmresStagnation(RuntimeError):
    def __init__(self, residual, max_iter):
        super().__init__(f"GMRES did not reach tolerance in {max_iter} iterations "
                         f"(relative residual {residual:.3e})")
        self.residual = residual
        self.max_iter = max_iter


@dataclass
class DenseOperator:
    """Linear action on C^n: dense matrix or callable."""

    action: object
    n: int

    @classmethod
    def from_matrix(cls, A):
        A = np.asarray(A)
        return cls(action=lambda x, A=A: A @ x, n=A.shape[0])

    def __call__(self, x):
        return self.action(x)


@dataclass
class LuFactorization:
    lu: np.ndarray
    piv: np.ndarray
    n: int
    rcond: float


def lu_factor(A, cond_warn=1e12):
    """LU-factor a square complex matrix; reports reciprocal condition.

    Raises SingularOperatorError when the 1-norm condition estimate exceeds
    1/eps, signalling a singular system to working precision.
    """
    A = np.ascontiguousarray(A, dtype=complex)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("lu_factor needs a square matrix")
    anorm = np.linalg.norm(A, 1)
    with warnings.catch_warnings():
        # exact singularity is reported through SingularOperatorError below
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A)
    gecon = sla.get_lapack_funcs("gecon", (lu,))
    rcond, _ = gecon(lu, anorm)
    if rcond == 0 or 1.0 / max(rcond, 1e-300) > 1.0 / np.finfo(float).eps:
        raise SingularOperatorError(
            f"matrix singular to working precision (rcond={rcond:.3e})")
    fact = LuFactorization(lu=lu, piv=piv, n=n, rcond=float(rcond))
    fact.ill_conditioned = rcond < 1.0 / cond_warn
    return fact


def lu_solve(fact, b):
    return sla.lu_solve((fact.lu, fact.piv), b)


def invert(A):
    """Dense inverse through the LU path (keeps the condition guard)."""
    fact = lu_factor(A)
    return lu_solve(fact, np.eye(fact.n, dtype=complex))


def gmres(A, b, tol=1e-4, max_iter=2000, x0=None):
    """Non-restarted GMRES with modified Gram-Schmidt.

    Returns (x, iterations, history) where history holds the Arnoldi
    least-squares relative residuals, one entry per iteration, monotone
    non-increasing.  Raises GmresStagnation past max_iter.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not isinstance(A, DenseOperator):
        A = DenseOperator.from_matrix(A)
    b = np.asarray(b, dtype=complex).ravel()
    n = A.n
    if len(b) != n:
        raise ValueError("dimension mismatch")
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return np.zeros(n, dtype=complex), 0, []

    x0 = np.zeros(n, dtype=complex) if x0 is None else np.asarray(x0, dtype=complex)
    r0 = b - A(x0) if np.any(x0) else b.copy()
    beta = np.linalg.norm(r0)
    if beta / bnorm <= tol:
        return x0, 0, []

    max_iter = min(max_iter, n)
    V = np.empty((max_iter + 1, n), dtype=complex)
    H = np.zeros((max_iter + 1, max_iter), dtype=complex)
    cs = np.zeros(max_iter, dtype=complex)
    sn = np.zeros(max_iter, dtype=complex)
    g = np.zeros(max_iter + 1, dtype=complex)
    V[0] = r0 / beta
    g[0] = beta
    history = []
    k_final = max_iter
    for k in range(max_iter):
        w = A(V[k])
        for i in range(k + 1):
            H[i, k] = np.vdot(V[i], w)
            w -= H[i, k] * V[i]
        H[k + 1, k] = np.linalg.norm(w)
        breakdown = H[k + 1, k] == 0
        if not breakdown:
            V[k + 1] = w / H[k + 1, k]
        # apply stored Givens rotations, then form the new one
        for i in range(k):
            t = cs[i] * H[i, k] + sn[i] * H[i + 1, k]
            H[i + 1, k] = -np.conj(sn[i]) * H[i, k] + np.conj(cs[i]) * H[i + 1, k]
            H[i, k] = t
        denom = np.sqrt(np.abs(H[k, k]) ** 2 + np.abs(H[k + 1, k]) ** 2)
        if denom == 0:
            cs[k], sn[k] = 1.0, 0.0
        else:
            cs[k] = np.conj(H[k, k]) / denom
            sn[k] = np.conj(H[k + 1, k]) / denom
        H[k, k] = cs[k] * H[k, k] + sn[k] * H[k + 1, k]
        H[k + 1, k] = 0.0
        g[k + 1] = -np.conj(sn[k]) * g[k]
        g[k] = cs[k] * g[k]
        rel = np.abs(g[k + 1]) / bnorm
        history.append(float(rel))
        if rel <= tol or breakdown:
            k_final = k + 1
            break
    else:
        k_final = max_iter

    m = k_final
    y = sla.solve_triangular(H[:m, :m], g[:m], lower=False)
    x = x0 + V[:m].T @ y
    if history and history[-1] > tol and m == max_iter:
        raise GmresStagnation(history[-1], max_iter)
    return x, m, history


def eig_dense(A):
    """Eigenvalues of a dense matrix (LAPACK, backward stable)."""
    return sla.eigvals(np.asarray(A, dtype=complex))


def operator_norm(A):
    """Spectral norm."""
    return float(sla.svdvals(np.asarray(A))[0])
