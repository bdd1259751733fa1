"""Group von Neumann norms and the bounds chain for the deformed comultiplication."""
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deforma.finite.groups import builtin, cyclic
from deforma.growth import Cyclic, Dihedral, Exponential, FreeAbelian, FreeGroup, Polynomial
from deforma.vn import (
    NonAbelianError,
    VNElement,
    ZeroWeightError,
    abelian_exact_eh,
    coefficient_witness_search,
    deformed_comult_vn,
    factorization_upper_bound,
    lam,
    pinch,
    sign_lower_bound,
    vn_norm,
    vn_norm_bounds,
    weights_on,
)

PHASES = [1, 1j, -1, -1j]


def random_element(G, rng, m=None):
    m = m or int(rng.integers(1, G.order + 1))
    sup = sorted(rng.choice(G.order, size=m, replace=False).tolist())
    return VNElement(sup, rng.standard_normal(m) + 1j * rng.standard_normal(m), G)


def irrep_norm(T):
    """max over irreps of ||sum a_g pi(g)||, independent of the regular representation."""
    G = T.group
    return max(
        np.linalg.norm(np.tensordot(T.coeffs, p.matrices[T.support], axes=1), 2) for p in G.irreps
    )


@pytest.mark.parametrize("name", ["z1", "z7", "s3", "d4", "q8", "s4"])
def test_lambda_g_has_norm_one(name):
    G = builtin(name)
    for g in range(G.order):
        assert vn_norm(lam(G, g)) == pytest.approx(1.0, abs=1e-12)
        assert vn_norm(lam(G, g, 2 - 1j)) == pytest.approx(math.sqrt(5), abs=1e-12)


@pytest.mark.parametrize("name", ["z12", "d5", "s3", "q8", "s4"])
def test_finite_norm_matches_irreps(name):
    G = builtin(name)
    rng = np.random.default_rng(1)
    for _ in range(20):
        T = random_element(G, rng)
        assert vn_norm(T) == pytest.approx(irrep_norm(T), rel=1e-10)


def test_cyclic_norm_is_fourier_sup():
    rng = np.random.default_rng(2)
    n = 11
    T = random_element(cyclic(n), rng, 6)
    x = np.exp(2j * np.pi * np.outer(np.arange(n), T.support) / n)
    assert vn_norm(T) == pytest.approx(np.max(np.abs(x @ T.coeffs)), rel=1e-12)
    # left translation is unitary
    assert vn_norm(T.left_translate(3)) == pytest.approx(vn_norm(T), rel=1e-12)


def test_left_translation_unitary_nonabelian():
    G = builtin("s4")
    rng = np.random.default_rng(3)
    T = random_element(G, rng, 9)
    for h in range(G.order):
        assert vn_norm(T.left_translate(h)) == pytest.approx(vn_norm(T), rel=1e-10)


def test_free_group_kesten():
    F = FreeGroup(2)
    T = VNElement(F.generators(), np.ones(4), F)
    b = vn_norm_bounds(T)
    assert not b.exact
    assert b.lower <= 2 * math.sqrt(3) <= b.upper
    assert b.lower > 3.2
    assert b.upper <= 4.0


def test_integers_symmetric_walk():
    Z = FreeAbelian(1)
    T = VNElement([(1,), (-1,)], [1.0, 1.0], Z)
    b = vn_norm_bounds(T)
    assert b.lower <= 2.0 <= b.upper
    assert b.lower > 1.99 and b.upper < 2.05


def test_finite_fg_groups_are_exact():
    T = VNElement([1, 2], [1.0, 1.0], Cyclic(6))
    b = vn_norm_bounds(T)
    assert b.exact
    x = np.exp(2j * np.pi * np.arange(6) / 6)
    assert b.lower == pytest.approx(np.max(np.abs(x + x ** 2)), rel=1e-10)
    assert vn_norm_bounds(lam(Dihedral(4), Dihedral(4).generators()[0])).lower == pytest.approx(1.0)


def test_empty_and_invalid_elements():
    G = builtin("s3")
    assert vn_norm(VNElement([], [], G)) == 0.0
    with pytest.raises(ValueError):
        VNElement([0, 0], [1, 1], G)
    with pytest.raises(ValueError):
        VNElement([6], [1], G)
    with pytest.raises(ValueError):
        VNElement([0, 1], [1], G)
    with pytest.raises(ValueError):
        VNElement([0], [np.nan], G)


def test_deformed_comult_linear_and_weighted():
    G = builtin("z8")
    rng = np.random.default_rng(4)
    T = random_element(G, rng, 5)
    w = Exponential(0.4)
    D = deformed_comult_vn(T, w)
    lengths = G.word_lengths()[T.support]
    assert np.allclose(D.coeffs, np.exp(-0.4 * lengths) * T.coeffs)
    D2 = deformed_comult_vn(T.scaled(2 - 1j), w)
    assert np.allclose(D2.coeffs, (2 - 1j) * D.coeffs)
    assert D.as_element().support == T.support


def test_comultiplication_is_multiplicative_on_lambdas():
    # Delta(lambda_g lambda_h) = Delta(lambda_g) Delta(lambda_h) for w == 1
    G = builtin("s3")
    for g, h in itertools.product(range(6), repeat=2):
        gh = int(G.mult_table[g, h])
        assert deformed_comult_vn(lam(G, gh), np.ones(1)).support == [gh]


def test_factorization_bound():
    G = builtin("z6")
    T = VNElement([0, 1, 3], [3, 4j, 0], G)
    f = factorization_upper_bound(T, [1.0, 0.5, 2.0])
    assert f.coeff_l2 == pytest.approx(5.0)
    assert f.w_l2 == pytest.approx(math.sqrt(5.25))
    assert f.value == pytest.approx(5 * math.sqrt(5.25))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(0, 10 ** 6))
def test_exhaustive_sign_matches_brute_force(m, seed):
    rng = np.random.default_rng(seed)
    G = cyclic(8)
    T = random_element(G, rng, m)
    w = rng.uniform(0.1, 1.0, m)
    z = w * T.coeffs
    brute = max(abs(np.dot(z, r)) for r in itertools.product(PHASES, repeat=m))
    sb = sign_lower_bound(T, w, strategy="exhaustive")
    assert sb.strategy_value == pytest.approx(brute / sb.norm, rel=1e-12)
    assert sb.aligned >= sb.strategy_value - 1e-12
    assert sb.value == pytest.approx(np.sum(np.abs(z)) / vn_norm(T), rel=1e-12)
    for strat in ("random", "greedy"):
        assert sign_lower_bound(T, w, strategy=strat).strategy_value <= sb.strategy_value + 1e-12


def test_sign_bound_errors():
    G = cyclic(4)
    with pytest.raises(ValueError):
        sign_lower_bound(lam(G, 0), [1.0], strategy="magic")
    with pytest.raises(ValueError):
        sign_lower_bound(lam(G, 0), [1.0], strategy="random", samples=0)
    with pytest.raises(ZeroWeightError):
        sign_lower_bound(lam(G, 0), [0.0])
    with pytest.raises(ValueError):
        weights_on([1.0, 2.0], lam(G, 0))


@pytest.mark.parametrize("seed", range(8))
def test_abelian_exact_equals_weighted_l1(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 13))
    T = random_element(cyclic(n), rng)
    w = rng.uniform(0.05, 1.0, len(T.support))
    ex = abelian_exact_eh(T, w)
    assert ex == pytest.approx(np.sum(np.abs(w * T.coeffs)), rel=1e-6)
    lower = sign_lower_bound(T, w).value * vn_norm(T)
    upper = factorization_upper_bound(T, w).value
    assert lower <= ex + 1e-7 and ex <= upper + 1e-7


def test_abelian_exact_on_integers_and_identity():
    assert abelian_exact_eh(lam(cyclic(5), 0), [1.0]) == pytest.approx(1.0, abs=1e-7)
    Z = FreeAbelian(1)
    T = VNElement([(0,), (2,), (-3,)], [1.0, -0.5j, 0.25], Z)
    w = Polynomial(1.0)
    want = 1 + 0.5 / 3 + 0.25 / 4
    assert abelian_exact_eh(T, w) == pytest.approx(want, rel=1e-6)
    assert abelian_exact_eh(T, w, quotient_order=17) == pytest.approx(want, rel=1e-6)
    with pytest.raises(ValueError):
        abelian_exact_eh(T, w, quotient_order=3)


def test_abelian_exact_rejects_nonabelian():
    with pytest.raises(NonAbelianError):
        abelian_exact_eh(lam(builtin("s3"), 1), [1.0])
    with pytest.raises(NonAbelianError):
        abelian_exact_eh(VNElement([(1,)], [1.0], FreeGroup(2)), [1.0])


def test_witness_search():
    G = cyclic(16)
    c = VNElement(range(16), np.full(16, 0.25), G)
    wit = coefficient_witness_search(c, budget=300, seed=1)
    assert np.allclose(np.abs(wit.T.coeffs), 0.25)
    assert wit.K_emp == pytest.approx(vn_norm(wit.T))
    # the trivial phases give norm 4, a chirp gets near the flat value 1
    assert wit.K_emp <= 2.0
    assert wit.K_emp >= 1.0 - 1e-12  # ||T|| >= ||T||_2 = 1
    with pytest.raises(ValueError):
        coefficient_witness_search(VNElement([0, 1], [1.0, 1.0], G))


@pytest.mark.parametrize("n", [2, 5, 9, 16])
def test_pinch_cyclic(n):
    r = pinch(cyclic(n), Polynomial(1.0), seed=0)
    w = np.array([1 / (1 + min(k, n - k)) for k in range(n)])
    assert r["w_l2"] == pytest.approx(np.linalg.norm(w))
    assert r["upper"] == r["w_l2"]
    assert r["lower"] >= r["w_l2"] / r["K_emp"] - 1e-12
    assert r["lower"] <= r["exact"] + 1e-7 <= r["upper"] + 2e-7
    assert r["pinch_ratio"] == pytest.approx(r["w_l2"] / r["lower"])
    assert r["K_emp"] <= 2


def test_pinch_nonabelian_has_no_exact():
    r = pinch(builtin("s3"), Exponential(0.5), budget=200)
    assert r["exact"] is None
    assert r["lower"] <= r["upper"] + 1e-12
