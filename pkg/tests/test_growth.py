"""Word growth: closed forms, automata and normal forms against independent BFS oracles."""
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deforma.growth import (
    BallTable,
    Cyclic,
    Dihedral,
    EnumerationCapError,
    Exponential,
    FreeAbelian,
    FreeGroup,
    Polynomial,
    RightAngledCoxeter,
    ball_elements,
    ball_sizes,
    eval_deformation,
    exp_rate,
    exp_rate_profile,
    growth_summability_verdict,
    l2_tail_sum,
    parse_deformation,
    parse_family,
    poly_order_fit,
    read_adjacency_list,
    summation_by_parts_check,
)
from deforma.summability import Verdict


def lattice_spheres(n, N):
    out = [0] * (N + 1)
    for p in itertools.product(range(-N, N + 1), repeat=n):
        r = sum(map(abs, p))
        if r <= N:
            out[r] += 1
    return out


def matrix_bfs(gens, N):
    """Sphere counts of the group generated by integer matrices (exact BFS on the matrices)."""
    key = lambda M: M.tobytes()  # noqa: E731
    ident = np.eye(gens[0].shape[0], dtype=np.int64)
    seen = {key(ident)}
    layer, out = [ident], [1]
    for _ in range(N):
        nxt = []
        for M in layer:
            for S in gens:
                P = M @ S
                k = key(P)
                if k not in seen:
                    seen.add(k)
                    nxt.append(P)
        out.append(len(nxt))
        layer = nxt
    return out


def tits_generators(n, edges):
    """Tits representation of the right-angled Coxeter group: B(e_i, e_j) = 0 on edges, -1 otherwise."""
    B = -np.ones((n, n), dtype=np.int64)
    for a, b in edges:
        B[a, b] = B[b, a] = 0
    np.fill_diagonal(B, 1)
    gens = []
    for i in range(n):
        S = np.eye(n, dtype=np.int64)
        S[i, :] -= 2 * B[i, :]  # sigma_i(v) = v - 2 B(e_i, v) e_i, acting on coordinates
        gens.append(S.T)
    return gens


def rotation_dihedral_bfs(m, N):
    """D_m as the plane isometries generated by reflections in lines at angle 0 and pi/m."""
    def refl(theta):
        c, s_ = math.cos(2 * theta), math.sin(2 * theta)
        return np.array([[c, s_], [s_, -c]])

    key = lambda M: tuple(np.round(M, 9).ravel() + 0.0)  # noqa: E731
    gens = (refl(0.0), refl(math.pi / m))
    ident = np.eye(2)
    seen, layer, out = {key(ident)}, [ident], [1]
    for _ in range(N):
        nxt = []
        for M in layer:
            for S in gens:
                P = M @ S
                if key(P) not in seen:
                    seen.add(key(P))
                    nxt.append(P)
        out.append(len(nxt))
        layer = nxt
    return out


@pytest.mark.parametrize("n,N", [(1, 20), (2, 20), (3, 12)])
def test_free_abelian_closed_vs_lattice(n, N):
    assert FreeAbelian(n).closed_spheres(N) == lattice_spheres(n, N)
    assert ball_sizes(FreeAbelian(n), N, method="enumerate").spheres == lattice_spheres(n, N)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_free_group_counts(k):
    want = [1] + [2 * k * (2 * k - 1) ** (n - 1) for n in range(1, 21)]
    G = FreeGroup(k)
    assert G.closed_spheres(20) == want
    assert ball_sizes(G, 20, method="automaton").spheres == want
    depth = {1: 20, 2: 10, 3: 7}[k]
    assert ball_sizes(G, depth, method="enumerate").spheres == want[: depth + 1]


def test_free_group_normal_forms_reduced():
    G = FreeGroup(2)
    for sphere in ball_elements(G, 6):
        for w in sphere:
            assert all(a != -b for a, b in zip(w, w[1:]))
            assert G.length(w) == len(w)
            assert G.mul(w, G.inv(w)) == G.identity


@pytest.mark.parametrize("m", [2, 3, 4, 5, 8, 13])
def test_dihedral_finite(m):
    G = Dihedral(m)
    assert G.closed_spheres(20) == rotation_dihedral_bfs(m, 20)
    assert ball_sizes(G, 20, method="enumerate").spheres == rotation_dihedral_bfs(m, 20)
    assert ball_sizes(G, 20).balls[-1] == 2 * m


def test_dihedral_infinite():
    G = Dihedral(None)
    assert ball_sizes(G, 20, method="enumerate").spheres == [1] + [2] * 20
    # Tits representation of the edgeless 2-vertex graph is D_inf
    assert matrix_bfs(tits_generators(2, []), 20) == [1] + [2] * 20
    for sphere_n, sphere in enumerate(ball_elements(G, 8)):
        assert all(G.length(g) == sphere_n for g in sphere)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 12, 25])
def test_cyclic(n):
    want = [1] + [2 if 2 * j < n else (1 if 2 * j == n else 0) for j in range(1, 21)]
    if n == 1:
        want = [1] + [0] * 20
    assert Cyclic(n).closed_spheres(20) == want
    assert ball_sizes(Cyclic(n), 20, method="enumerate").spheres == want


@pytest.mark.parametrize(
    "n,edges",
    [
        (5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]),  # pentagon
        (4, [(0, 1), (1, 2), (2, 3), (3, 0)]),  # square: D_inf x D_inf
        (4, [(0, 1), (1, 2), (2, 3)]),  # path
        (4, [(0, 1), (0, 2), (0, 3)]),  # star
        (3, []),
        (3, [(0, 1), (1, 2), (0, 2)]),
    ],
)
def test_racg_against_tits_representation(n, edges):
    G = RightAngledCoxeter(n, frozenset(frozenset(e) for e in edges))
    N = 9
    oracle = matrix_bfs(tits_generators(n, edges), N)
    assert G.closed_spheres(N) == oracle
    assert ball_sizes(G, N, method="automaton").spheres == oracle
    assert ball_sizes(G, N, method="enumerate").spheres == oracle


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_racg_complete_and_edgeless(k):
    complete = RightAngledCoxeter(k, frozenset(frozenset(e) for e in itertools.combinations(range(k), 2)))
    t = ball_sizes(complete, 10)
    assert t.balls[-1] == 2 ** k
    assert t.spheres[: k + 1] == [math.comb(k, j) for j in range(k + 1)]
    assert complete.growth_kind()[0] == "finite"
    # normal forms of (Z/2)^k are the increasing subsets
    elems = {w for sp in ball_elements(complete, k + 1) for w in sp}
    assert elems == {c for r in range(k + 1) for c in itertools.combinations(range(k), r)}
    edgeless = RightAngledCoxeter(k)
    assert ball_sizes(edgeless, 10).spheres[1:] == [k * (k - 1) ** (n - 1) for n in range(1, 11)]


def test_racg_growth_kind():
    pent = read_adjacency_list("0: 1 4\n1: 2\n2: 3\n3: 4\n")
    kind, lam = pent.growth_kind()
    assert kind == "exponential" and lam == pytest.approx((3 + math.sqrt(5)) / 2, rel=1e-9)
    square = read_adjacency_list("a b d\nb c\nc d\n")
    assert square.growth_kind() == ("polynomial", 2.0)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 4), max_size=14), st.lists(st.integers(0, 4), max_size=14))
def test_racg_normal_form_is_a_homomorphism(u, v):
    edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]
    G = RightAngledCoxeter(5, frozenset(frozenset(e) for e in edges))
    gens = tits_generators(5, edges)

    def rep(word):
        M = np.eye(5, dtype=np.int64)
        for s in word:
            M = M @ gens[s]
        return M

    a, b = G.normal_form(u), G.normal_form(v)
    assert np.array_equal(rep(G.mul(a, b)), rep(u) @ rep(v))
    # same element iff same normal form
    assert (a == b) == np.array_equal(rep(u), rep(v))
    assert G.normal_form(a) == a


def test_adjacency_parsing(tmp_path):
    f = tmp_path / "g.txt"
    f.write_text("# a triangle plus a pendant\nx: y z\ny z\n\nw: x  # comment\n")
    G = read_adjacency_list(f)
    assert G.n_vertices == 4 and len(G.edges) == 4
    assert G.vertex_names == ("x", "y", "z", "w")
    assert parse_family("racg", graph=str(f)).edges == G.edges
    assert parse_family(f"racg:{f}").edges == G.edges
    with pytest.raises(ValueError):
        read_adjacency_list("a: a\n")
    with pytest.raises(ValueError):
        read_adjacency_list("# nothing\n")


def test_parse_family():
    assert parse_family("free:3") == FreeGroup(3)
    assert parse_family("abelian:2") == FreeAbelian(2)
    assert parse_family("zn:3") == FreeAbelian(3)
    assert parse_family("cyclic:5") == Cyclic(5)
    assert parse_family("dihedral:inf") == Dihedral(None)
    assert parse_family("dihedral:6") == Dihedral(6)
    for bad in ("free:x", "klein", "cyclic:0"):
        with pytest.raises(ValueError):
            parse_family(bad)


def test_cyclic_saturation_example():
    t = ball_sizes(Cyclic(5), 10)
    assert t.balls[2:] == [5] * 9


def test_ball_table_validation():
    with pytest.raises(ValueError):
        BallTable([2, 3])
    with pytest.raises(ValueError):
        BallTable([1, 2], [1, 4])
    assert BallTable([1, 4, 12]).balls == [1, 5, 17]
    with pytest.raises(EnumerationCapError):
        ball_sizes(FreeGroup(2), 20, method="enumerate", cap=1000)
    with pytest.raises(ValueError):
        ball_sizes(FreeAbelian(2), 5, method="automaton")


def test_fits():
    assert poly_order_fit(ball_sizes(FreeAbelian(2), 200)) == pytest.approx(2.0, abs=0.05)
    assert poly_order_fit(ball_sizes(FreeAbelian(3), 200)) == pytest.approx(3.0, abs=0.08)
    assert round(poly_order_fit(ball_sizes(Dihedral(None), 200))) == 1
    assert exp_rate(ball_sizes(FreeGroup(2), 20)) == pytest.approx(3.0, rel=1e-5)
    assert exp_rate(ball_sizes(FreeGroup(3), 15)) == pytest.approx(5.0, rel=1e-5)
    prof = exp_rate_profile(ball_sizes(FreeGroup(2), 20))
    assert all(b <= a for a, b in zip(prof.fekete_profile, prof.fekete_profile[1:]))
    assert prof.fekete_profile[-1] >= 3.0
    with pytest.raises(ValueError):
        poly_order_fit(ball_sizes(FreeAbelian(1), 5))


def test_deformations():
    assert eval_deformation(Exponential(0.5), 0) == 1.0
    assert eval_deformation(Polynomial(1.2), 3) == pytest.approx(4 ** -1.2)
    assert eval_deformation(Polynomial(1.0, 2.0), 0) == 0.5
    assert parse_deformation("exp:0.6") == Exponential(0.6)
    assert parse_deformation("poly:1.2:3") == Polynomial(1.2, 3.0)
    for bad in ("exp:-1", "poly:", "gauss:1", "poly:1:0.5"):
        with pytest.raises(ValueError):
            parse_deformation(bad)
    with pytest.raises(ValueError):
        eval_deformation(Exponential(1.0), -1)
    for n in range(50):
        assert 0 < eval_deformation(Exponential(0.3), n) <= 1
        assert 0 < eval_deformation(Polynomial(0.3), n) <= 1


def test_l2_tail_sum():
    w = Polynomial(1.0)
    sums = l2_tail_sum(FreeAbelian(1), w, 50)
    want = 1 + 2 * sum((1 + n) ** -2.0 for n in range(1, 51))
    assert sums[-1] == (50, pytest.approx(want, rel=1e-14))
    assert l2_tail_sum(Cyclic(5), Exponential(1.0), 8)[-1][1] == pytest.approx(1 + 2 * math.exp(-2) + 2 * math.exp(-4))


def test_summation_by_parts_examples():
    assert summation_by_parts_check(ball_sizes(Cyclic(7), 5), 0.7, 0) == 0.0
    assert summation_by_parts_check(ball_sizes(FreeAbelian(2), 10_000), 1.0, 10_000) <= 1e-9
    assert summation_by_parts_check(ball_sizes(FreeGroup(2), 30), 0.5, 30) <= 1e-9
    with pytest.raises(ValueError):
        summation_by_parts_check(ball_sizes(FreeGroup(2), 5), 0.5, 6)


POLY = [(FreeAbelian(1), 0.5), (FreeAbelian(2), 1.0), (FreeAbelian(3), 1.5), (Dihedral(None), 0.5)]


@pytest.mark.parametrize("group,threshold", POLY, ids=lambda x: getattr(x, "name", str(x)))
def test_verdicts_polynomial_growth(group, threshold):
    N = 2 ** 12
    lo = growth_summability_verdict(group, Polynomial(threshold - 0.2), N)
    hi = growth_summability_verdict(group, Polynomial(threshold + 0.2), N)
    assert lo.verdict == Verdict.DIVERGES and hi.verdict == Verdict.CONVERGES
    assert lo.threshold == threshold


EXP = [(FreeGroup(2), 40), (FreeGroup(3), 30), (read_adjacency_list("0: 1 4\n1: 2\n2: 3\n3: 4\n"), 40)]


@pytest.mark.parametrize("group,N", EXP, ids=lambda x: getattr(x, "name", str(x)))
def test_verdicts_exponential_growth(group, N):
    lam = group.growth_kind()[1]
    t0 = math.log(lam) / 2
    for off, want in ((-0.2, Verdict.DIVERGES), (0.2, Verdict.CONVERGES), (-0.05, Verdict.DIVERGES),
                      (0.05, Verdict.CONVERGES)):
        assert growth_summability_verdict(group, Exponential(t0 + off), N).verdict == want
    v = growth_summability_verdict(group, Exponential(t0), N)
    assert v.threshold == pytest.approx(t0, rel=1e-3)


def test_boundaries_inconclusive():
    assert growth_summability_verdict(FreeAbelian(2), Polynomial(1.0), 2 ** 12).verdict == Verdict.INCONCLUSIVE
    t0 = math.log(3) / 2
    assert growth_summability_verdict(FreeGroup(2), Exponential(t0), 40).verdict == Verdict.INCONCLUSIVE


def test_finite_groups_always_converge():
    for w in (Polynomial(0.1), Exponential(0.01)):
        v = growth_summability_verdict(Cyclic(5), w, 32)
        assert v.verdict == Verdict.CONVERGES and v.threshold == 0.0
    v = growth_summability_verdict(FreeGroup(2), Polynomial(5.0), 32)
    assert v.threshold == math.inf
    with pytest.raises(ValueError):
        growth_summability_verdict(FreeGroup(2), Polynomial(5.0), 8)
