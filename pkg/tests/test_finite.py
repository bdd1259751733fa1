"""Finite-group models and harmonic analysis, against brute-force oracles."""
import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deforma.finite import (
    BUILTIN_NAMES,
    FiniteGroupModel,
    GroupModelError,
    Irrep,
    InvalidDeformationError,
    NonCentralMeasureError,
    builtin,
    central_density,
    central_scalars,
    comult_coefficient_formula,
    convolve,
    cyclic,
    deformed_comult_kernel,
    deformed_norm,
    deformed_product,
    delta,
    dihedral,
    eh_upper_bound,
    fourier_transform,
    haar,
    helgason_lower_bound,
    inverse_fourier,
    is_valid_deformation_finite,
    l1_norm,
    l2_norm,
    load_model,
    pairing,
    parseval_residual,
    probe_cb_lower_bound,
    quaternion,
    reflect,
    save_model,
    singular_irreps,
    symmetric,
    transfer_unitary,
)

GROUPS = ["z1", "z2", "z12", "d3", "d4", "d5", "s3", "s4", "q8"]


@pytest.fixture(scope="module", params=GROUPS)
def G(request):
    return builtin(request.param)


def crandn(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def element_orders(G):
    t = G.mult_table
    out = []
    for g in range(G.order):
        k, x = 1, g
        while x != 0:
            x = t[x, g]
            k += 1
        out.append(k)
    return Counter(out)


def conjugacy_classes(G):
    t, inv = G.mult_table, G.inverse_table
    seen, classes = set(), 0
    for g in range(G.order):
        if g in seen:
            continue
        classes += 1
        seen |= {int(t[t[h, g], inv[h]]) for h in range(G.order)}
    return classes


def perm_group_orders(n):
    """Element-order distribution of S_n built independently from itertools."""
    out = Counter()
    ident = tuple(range(n))
    for p in itertools.permutations(range(n)):
        k, x = 1, p
        while x != ident:
            x = tuple(p[i] for i in x)
            k += 1
        out[k] += 1
    return out


# ---------------------------------------------------------------- models


def test_builtin_structure():
    assert symmetric(3).order == 6 and symmetric(4).order == 24
    assert element_orders(symmetric(3)) == perm_group_orders(3)
    assert element_orders(symmetric(4)) == perm_group_orders(4)
    assert element_orders(quaternion()) == Counter({1: 1, 2: 1, 4: 6})
    assert element_orders(dihedral(4)) == Counter({1: 1, 2: 5, 4: 2})
    assert element_orders(cyclic(12))[12] == 4
    assert all(builtin(name).order > 0 for name in BUILTIN_NAMES if "n" not in name)
    assert not builtin("s3").is_abelian and builtin("z:7").is_abelian


def test_irrep_count_equals_classes(G):
    assert len(G.irreps) == conjugacy_classes(G)
    assert sum(p.dim ** 2 for p in G.irreps) == G.order


def test_word_lengths(G):
    wl = G.word_lengths()
    assert wl[0] == 0 and (wl > 0).sum() == G.order - 1
    assert set(wl[G.generators].tolist()) <= {1}


def test_model_validation_errors():
    Z3 = cyclic(3)
    t = Z3.mult_table.copy()
    t[1, 1], t[1, 2] = t[1, 2], t[1, 1]
    with pytest.raises(GroupModelError):
        FiniteGroupModel(t, Z3.irreps)
    with pytest.raises(GroupModelError):
        FiniteGroupModel(Z3.mult_table, Z3.irreps[:2])
    bad = [Irrep(p.matrices * (1.0 if k else 1.1)) for k, p in enumerate(Z3.irreps)]
    with pytest.raises(GroupModelError):
        FiniteGroupModel(Z3.mult_table, bad)
    dup = [Z3.irreps[0], Z3.irreps[1], Z3.irreps[1]]
    with pytest.raises(GroupModelError):
        FiniteGroupModel(Z3.mult_table, dup)
    with pytest.raises(GroupModelError):
        builtin("a5")
    with pytest.raises(GroupModelError):
        cyclic(65)


def test_save_load_roundtrip(tmp_path, G):
    save_model(G, tmp_path / "g.table", tmp_path / "g.irreps")
    H = load_model(tmp_path / "g.table", tmp_path / "g.irreps")
    assert np.array_equal(H.mult_table, G.mult_table)
    for p, q in zip(G.irreps, H.irreps):
        assert np.array_equal(p.matrices, q.matrices)


def test_load_malformed(tmp_path):
    (tmp_path / "t").write_text("3\n0 1 2\n1 2 0\n")
    (tmp_path / "i").write_text("1\n1\n1\n1\n1\n")
    with pytest.raises(GroupModelError):
        load_model(tmp_path / "t", tmp_path / "i")
    (tmp_path / "t").write_text("2\n0 1\n1 0\n")
    (tmp_path / "i").write_text("2\n1\n(1+0j)\n(1+0j)\n1\n(1+0j)\nfoo\n")
    with pytest.raises(GroupModelError):
        load_model(tmp_path / "t", tmp_path / "i")


# ---------------------------------------------------------------- Fourier calculus


def brute_convolve(G, f, g):
    n = G.order
    out = np.zeros(n, dtype=complex)
    for x in range(n):
        for y in range(n):
            out[x] += f[y] * g[G.mult_table[G.inverse_table[y], x]]
    return out / n


def test_cyclic_fourier_matches_fft():
    rng = np.random.default_rng(1)
    for n in (1, 5, 12, 64):
        G = cyclic(n)
        f = crandn(rng, n)
        F = np.array([c[0, 0] for c in fourier_transform(G, f)])
        assert np.allclose(F, np.fft.fft(f) / n, atol=1e-13)


def test_fourier_identities(G):
    rng = np.random.default_rng(2)
    for _ in range(5):
        f, g = crandn(rng, G.order), crandn(rng, G.order)
        assert np.abs(inverse_fourier(G, fourier_transform(G, f)) - f).max() < 1e-12
        assert parseval_residual(G, f) < 1e-12
        fg = convolve(G, f, g)
        assert np.abs(fg - brute_convolve(G, f, g)).max() < 1e-12
        for a, b, c in zip(fourier_transform(G, fg), fourier_transform(G, f), fourier_transform(G, g)):
            assert np.abs(a - b @ c).max() < 1e-12


def test_delta_haar(G):
    rng = np.random.default_rng(3)
    f = crandn(rng, G.order)
    assert np.allclose(convolve(G, delta(G), f), f)
    assert np.allclose(convolve(G, haar(G), f), np.mean(f))
    assert l1_norm(delta(G)) == pytest.approx(1.0)
    assert l2_norm(delta(G)) == pytest.approx(np.sqrt(G.order))


def test_duality(G):
    rng = np.random.default_rng(4)
    for _ in range(10):
        mu, f, g = (crandn(rng, G.order) for _ in range(3))
        lhs = pairing(convolve(G, mu, f), g)
        rhs = pairing(f, convolve(G, reflect(G, mu), g))
        assert abs(lhs - rhs) < 1e-12


# ---------------------------------------------------------------- deformation


def test_deformed_product_and_axioms(G):
    rng = np.random.default_rng(5)
    for _ in range(10):
        mu = crandn(rng, G.order)
        mu /= l1_norm(mu)
        f, g, h = (crandn(rng, G.order) for _ in range(3))
        want = brute_convolve(G, brute_convolve(G, f, mu), g)
        assert np.abs(deformed_product(G, f, mu, g) - want).max() < 1e-12
        a = deformed_product(G, deformed_product(G, f, mu, g), mu, h)
        b = deformed_product(G, f, mu, deformed_product(G, g, mu, h))
        assert np.abs(a - b).max() < 1e-10
        # the identity realizing L1_mu: (mu*f)*(mu*g) = mu*(f *_mu g)
        iso = convolve(G, convolve(G, mu, f), convolve(G, mu, g)) - convolve(G, mu, deformed_product(G, f, mu, g))
        assert np.abs(iso).max() < 1e-12
        assert l1_norm(deformed_product(G, f, mu, g)) <= l1_norm(f) * l1_norm(g) + 1e-12


def test_deformed_norm_oracle(G):
    rng = np.random.default_rng(6)
    n = G.order
    mu = crandn(rng, n)
    L = np.array([brute_convolve(G, mu, e) for e in np.eye(n)]).T  # x -> mu * x
    h = crandn(rng, n)
    assert deformed_norm(G, h, mu) == pytest.approx(l1_norm(np.linalg.solve(L, h)), rel=1e-10)
    x = crandn(rng, n)
    assert deformed_norm(G, convolve(G, mu, x), mu) == pytest.approx(l1_norm(x), rel=1e-10)


def test_invalid_deformation():
    G = builtin("s3")
    assert singular_irreps(G, haar(G)) == [1, 2]
    assert not is_valid_deformation_finite(G, haar(G))
    assert is_valid_deformation_finite(G, delta(G))
    with pytest.raises(InvalidDeformationError, match="sign"):
        deformed_product(G, delta(G), haar(G), delta(G))


def brute_kernel(G, f, mu):
    n, t = G.order, G.mult_table
    K = np.zeros((n, n), dtype=complex)
    for x in range(n):
        for y in range(n):
            K[x, y] = sum(f[t[t[x, z], y]] * mu[z] for z in range(n)) / n
    return K


def test_comult_kernel_and_formula(G):
    rng = np.random.default_rng(7)
    mu = crandn(rng, G.order)
    f = crandn(rng, G.order)
    assert np.abs(deformed_comult_kernel(G, f, mu) - brute_kernel(G, f, mu)).max() < 1e-12
    for k, p in enumerate(G.irreps):
        for i in range(p.dim):
            for j in range(p.dim):
                K = deformed_comult_kernel(G, G.matrix_coefficient(k, i, j), mu)
                assert np.abs(K - comult_coefficient_formula(G, mu, k, i, j)).max() < 1e-10


def test_eh_upper_bound_examples():
    G = cyclic(4)
    rng = np.random.default_rng(8)
    f = crandn(rng, 4)
    assert eh_upper_bound(G, f, delta(G)) == pytest.approx(2 * np.abs(f).max())
    assert eh_upper_bound(G, np.ones(4), haar(G)) == pytest.approx(1.0)


# ---------------------------------------------------------------- Helgason side


def test_central_scalars(G):
    rng = np.random.default_rng(9)
    c = rng.uniform(0.1, 1, len(G.irreps))
    assert np.allclose(central_scalars(G, central_density(G, c)), c)
    if not G.is_abelian:
        with pytest.raises(NonCentralMeasureError):
            central_scalars(G, crandn(rng, G.order))


def test_helgason_examples():
    for name in GROUPS:
        G = builtin(name)
        assert helgason_lower_bound(G, haar(G), samples=4).value == pytest.approx(1.0)
    for n in (2, 5, 9):
        G = cyclic(n)
        assert helgason_lower_bound(G, delta(G), samples=4).value >= 1 - 1e-12
    G = builtin("s3")
    c = np.array([1.0, 1 / 2, 1 / 4])
    mu = central_density(G, c)
    dims = np.array([p.dim for p in G.irreps])
    assert helgason_lower_bound(G, mu, samples=32).value >= np.sqrt(np.sum(dims ** 2 * c ** 2)) / np.sqrt(G.order)


def test_helgason_witness_certifies():
    from deforma.gamma2 import gamma2_norm

    for name in ("s3", "q8", "z6"):
        G = builtin(name)
        c = np.linspace(1, 0.2, len(G.irreps))
        mu = central_density(G, c)
        hb = helgason_lower_bound(G, mu, samples=16, seed=1)
        assert np.allclose(np.abs(hb.witness), 1)
        assert gamma2_norm(deformed_comult_kernel(G, hb.witness, mu)) >= hb.value - 1e-7


def test_sandwich():
    for name in ("z6", "s3", "d4", "q8"):
        G = builtin(name)
        c = 1.0 / (1.0 + np.arange(len(G.irreps)))
        mu = central_density(G, c)
        hb = helgason_lower_bound(G, mu, samples=16, seed=2)
        pb = probe_cb_lower_bound(G, mu, probes=30, seed=2, helgason_samples=16)
        assert hb.value <= pb.value + 1e-7
        assert pb.value <= l2_norm(mu) + 1e-7
        assert pb.kinds[0] == "helgason-witness"


def test_transfer_unitary(G):
    rng = np.random.default_rng(10)
    from deforma.finite.harmonic import _haar_unitary

    U = [_haar_unitary(rng, p.dim) for p in G.irreps]
    V = transfer_unitary(G, U)
    # unitary for the normalized inner product, i.e. plain unitary on C^n
    assert np.abs(V.conj().T @ V - np.eye(G.order)).max() < 1e-10


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["z5", "s3", "q8", "d4"]), st.integers(0, 2 ** 31))
def test_contractivity_property(name, seed):
    G = builtin(name)
    rng = np.random.default_rng(seed)
    mu = crandn(rng, G.order)
    mu /= l1_norm(mu)
    F, H = crandn(rng, G.order), crandn(rng, G.order)
    assert deformed_norm(G, convolve(G, F, H), mu) <= deformed_norm(G, F, mu) * deformed_norm(G, H, mu) * (1 + 1e-12)
