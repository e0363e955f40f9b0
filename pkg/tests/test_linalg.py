import numpy as np
import pytest

from helmddm import linalg


def test_lu_identity_and_residual(rng):
    fact = linalg.lu_factor(np.eye(5, dtype=complex))
    b = rng.standard_normal(5) + 0j
    assert np.allclose(linalg.lu_solve(fact, b), b)
    A = rng.standard_normal((50, 50)) + 1j * rng.standard_normal((50, 50))
    b = rng.standard_normal(50) + 1j * rng.standard_normal(50)
    x = linalg.lu_solve(linalg.lu_factor(A), b)
    assert np.linalg.norm(A @ x - b) / np.linalg.norm(b) < 1e-10


def test_lu_condition_guard():
    n = 10   # cond(H_10) ~ 1e13: flagged ill-conditioned but still factorable
    H = 1.0 / (np.arange(n)[:, None] + np.arange(n)[None, :] + 1.0)
    fact = linalg.lu_factor(H.astype(complex))
    assert fact.ill_conditioned
    S = np.zeros((3, 3), dtype=complex)
    S[0, 0] = 1.0
    with pytest.raises(linalg.SingularOperatorError):
        linalg.lu_factor(S)


def test_gmres_identity():
    b = np.arange(1.0, 5.0) + 0j
    x, its, hist = linalg.gmres(np.eye(4, dtype=complex), b, tol=1e-12)
    assert its == 1
    assert np.abs(x - b).max() < 1e-12


def test_gmres_three_eigenvalues(rng):
    # Krylov minimal polynomial: at most 3 iterations for 3 distinct eigenvalues
    Q, _ = np.linalg.qr(rng.standard_normal((30, 30)) + 1j * rng.standard_normal((30, 30)))
    lam = np.repeat([1.0, 2.5, 4.0], 10)
    A = (Q * lam) @ Q.conj().T
    b = rng.standard_normal(30) + 1j * rng.standard_normal(30)
    x, its, hist = linalg.gmres(A, b, tol=1e-12)
    assert its <= 3
    assert np.linalg.norm(A @ x - b) / np.linalg.norm(b) < 1e-10


def test_gmres_history_monotone_and_true_residual(rng):
    A = rng.standard_normal((40, 40)) + 1j * rng.standard_normal((40, 40)) + 8 * np.eye(40)
    b = rng.standard_normal(40) + 1j * rng.standard_normal(40)
    x, its, hist = linalg.gmres(A, b, tol=1e-10)
    assert all(hist[i + 1] <= hist[i] * (1 + 1e-12) for i in range(len(hist) - 1))
    true_rel = np.linalg.norm(b - A @ x) / np.linalg.norm(b)
    assert abs(true_rel - hist[-1]) < 1e-8 * max(1.0, true_rel / max(hist[-1], 1e-300))


def test_gmres_deterministic(rng):
    A = rng.standard_normal((25, 25)) + 1j * rng.standard_normal((25, 25)) + 6 * np.eye(25)
    b = rng.standard_normal(25) + 1j * rng.standard_normal(25)
    r1 = linalg.gmres(A, b, tol=1e-8)
    r2 = linalg.gmres(A, b, tol=1e-8)
    assert r1[1] == r2[1]
    assert np.array_equal(r1[0], r2[0])


def test_gmres_stagnation():
    A = np.diag(np.logspace(0, -14, 20)).astype(complex)
    b = np.ones(20, dtype=complex)
    with pytest.raises(linalg.GmresStagnation):
        linalg.gmres(A, b, tol=1e-13, max_iter=5)


def test_eig_dense(rng):
    assert np.allclose(sorted(linalg.eig_dense(np.diag([1.0, 2.0, 3.0])).real),
                       [1, 2, 3])
    th = 0.7
    R = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    lam = linalg.eig_dense(R)
    for target in (np.exp(1j * th), np.exp(-1j * th)):
        assert np.abs(lam - target).min() < 1e-12
    # companion-matrix oracle at n=6: match each root to its nearest eigenvalue
    A = rng.standard_normal((6, 6))
    roots = np.roots(np.poly(A))
    lam = linalg.eig_dense(A)
    for r in roots:
        assert np.abs(lam - r).min() < 1e-6


def test_linearity_spot_check(rng):
    A = rng.standard_normal((10, 10)) + 1j * rng.standard_normal((10, 10))
    op = linalg.DenseOperator.from_matrix(A)
    x = rng.standard_normal(10) + 0j
    y = rng.standard_normal(10) + 0j
    assert np.abs(op(x + y) - op(x) - op(y)).max() < 1e-12
