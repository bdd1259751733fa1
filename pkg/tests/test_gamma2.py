"""The gamma_2 solver against closed-form values of the Schur multiplier norm."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deforma.finite import builtin, cyclic, deformed_comult_kernel, delta, haar
from deforma.gamma2 import Gamma2ConvergenceError, gamma2_norm, gamma2_solve

TOL = 1e-7


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_trivial_values():
    assert gamma2_norm(np.zeros((3, 4))) == 0.0
    assert gamma2_norm([[2.5]]) == pytest.approx(2.5, abs=TOL)
    assert gamma2_norm(np.ones((5, 5))) == pytest.approx(1.0, abs=TOL)


def test_psd_is_max_diagonal():
    # for positive semidefinite K, gamma_2(K) = max_i K_ii
    rng = np.random.default_rng(0)
    for n in (2, 5, 9):
        A = crandn(rng, n, n)
        K = A @ A.conj().T
        assert gamma2_norm(K) == pytest.approx(np.real(np.diag(K)).max(), abs=TOL * 10)


def test_rank_one():
    rng = np.random.default_rng(1)
    u, v = crandn(rng, 6), crandn(rng, 4)
    assert gamma2_norm(np.outer(u, v)) == pytest.approx(np.abs(u).max() * np.abs(v).max(), abs=TOL * 10)


@pytest.mark.parametrize("n", [2, 4, 8])
def test_hadamard(n):
    H = np.array([[1.0]])
    while H.shape[0] < n:
        H = np.block([[H, H], [H, -H]])
    assert gamma2_norm(H) == pytest.approx(np.sqrt(n), abs=TOL)


@pytest.mark.parametrize("n", [3, 6, 10])
def test_abelian_hankel_is_fourier_l1(n):
    # K(x, y) = f(x + y) on Z_n has gamma_2 = sum_j |a_j| for f = sum_j a_j e_j
    rng = np.random.default_rng(n)
    a = crandn(rng, n)
    x = np.arange(n)
    E = np.exp(2j * np.pi * np.outer(x, x) / n)
    f = E @ a
    K = f[(x[:, None] + x[None, :]) % n]
    assert gamma2_norm(K) == pytest.approx(np.abs(a).sum(), abs=TOL * 10)


def test_envelope_and_certificates():
    rng = np.random.default_rng(2)
    for shape in [(3, 3), (4, 7), (9, 5)]:
        K = crandn(rng, *shape)
        r = gamma2_solve(K)
        assert np.abs(K).max() - TOL <= r.value <= np.linalg.norm(K, 2) + TOL
        assert r.gap <= TOL
        assert r.dual <= r.primal + TOL


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 7), st.integers(2, 7), st.integers(0, 2 ** 31))
def test_norm_axioms(n, m, seed):
    rng = np.random.default_rng(seed)
    A, B = crandn(rng, n, m), crandn(rng, n, m)
    gA, gB = gamma2_norm(A), gamma2_norm(B)
    s = complex(rng.standard_normal(), rng.standard_normal())
    assert gamma2_norm(s * A) == pytest.approx(abs(s) * gA, abs=TOL * (1 + abs(s)) * 10)
    assert gamma2_norm(A + B) <= gA + gB + 3 * TOL
    D1 = np.diag(np.exp(2j * np.pi * rng.random(n)))
    D2 = np.diag(np.exp(2j * np.pi * rng.random(m)))
    assert gamma2_norm(D1 @ A @ D2) == pytest.approx(gA, abs=3 * TOL)
    assert gamma2_norm(A.T) == pytest.approx(gA, abs=3 * TOL)


def test_deterministic():
    K = crandn(np.random.default_rng(3), 6, 6)
    assert gamma2_solve(K) == gamma2_solve(K)


def test_finite_examples():
    G = cyclic(5)
    assert gamma2_norm(deformed_comult_kernel(G, np.ones(5), haar(G))) == pytest.approx(1.0, abs=TOL)
    G4 = cyclic(4)
    f = np.exp(2j * np.pi * np.random.default_rng(4).random(4))
    K = deformed_comult_kernel(G4, f, delta(G4))
    assert gamma2_norm(K) <= 2 * np.abs(f).max() + TOL
    S3 = builtin("s3")
    rng = np.random.default_rng(5)
    for _ in range(50):
        f, mu = crandn(rng, 6), crandn(rng, 6)
        bound = np.abs(f).max() * np.sqrt(np.mean(np.abs(mu) ** 2))
        assert gamma2_norm(deformed_comult_kernel(S3, f, mu)) <= bound + TOL


def test_errors():
    with pytest.raises(ValueError):
        gamma2_solve(np.ones((2, 2)), tol=0)
    with pytest.raises(Gamma2ConvergenceError) as exc:
        gamma2_solve(crandn(np.random.default_rng(6), 5, 5), max_iter=2)
    assert exc.value.iterations == 2
