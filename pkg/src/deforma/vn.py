"""Finitely supported elements of group von Neumann algebras and bounds for ``m_w``.

An element ``T ~ sum_g alpha_g lambda_g`` lives either on a finite group model
(elements are indices) or on a finitely generated group (elements are normal
forms).  Norms on finite groups are exact; on infinite groups they come from the
compression of the left-regular operator to a word-length ball, which is a
certified lower bound, together with an explicit upper envelope.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg

from .finite.groups import FiniteGroupModel, cyclic
from .gamma2 import gamma2_solve
from .growth import (
    Cyclic,
    FGGroupSpec,
    FreeAbelian,
    FreeGroup,
    Exponential,
    Polynomial,
    ball_elements,
)

__all__ = [
    "VNElement",
    "DiagonalTensor",
    "NormBounds",
    "FactorizationBound",
    "SignBound",
    "CoefficientWitness",
    "NonAbelianError",
    "ZeroWeightError",
    "lam",
    "vn_norm",
    "vn_norm_bounds",
    "word_lengths",
    "weights_on",
    "deformed_comult_vn",
    "factorization_upper_bound",
    "sign_lower_bound",
    "coefficient_witness_search",
    "abelian_exact_eh",
    "abelian_kernel",
    "pinch",
]

PHASES4 = np.array([1, 1j, -1, -1j])


class NonAbelianError(ValueError):
    pass


class ZeroWeightError(ValueError):
    pass


Group = FiniteGroupModel | FGGroupSpec


@dataclass
class VNElement:
    support: list
    coeffs: np.ndarray
    group: Group

    def __post_init__(self):
        self.support = list(self.support)
        self.coeffs = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if len(self.support) != self.coeffs.shape[0]:
            raise ValueError("support and coefficients differ in length")
        if len(set(self.support)) != len(self.support):
            raise ValueError("support has duplicate elements")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("coefficients must be finite")
        if isinstance(self.group, FiniteGroupModel):
            if any(not (0 <= int(g) < self.group.order) for g in self.support):
                raise ValueError("support element outside the group")
            self.support = [int(g) for g in self.support]

    def scaled(self, s: complex) -> "VNElement":
        return VNElement(self.support, self.coeffs * s, self.group)

    def left_translate(self, h) -> "VNElement":
        """``lambda_h T``."""
        mul = _mul(self.group)
        return VNElement([mul(h, g) for g in self.support], self.coeffs, self.group)

    def dense(self) -> np.ndarray:
        """Coefficient vector over all elements of a finite model."""
        if not isinstance(self.group, FiniteGroupModel):
            raise TypeError("dense() needs a finite group model")
        out = np.zeros(self.group.order, dtype=complex)
        out[self.support] = self.coeffs
        return out


def lam(group: Group, g, coeff: complex = 1.0) -> VNElement:
    return VNElement([g], [coeff], group)


def _mul(group: Group) -> Callable:
    if isinstance(group, FiniteGroupModel):
        t = group.mult_table
        return lambda a, b: int(t[a, b])
    return group.mul


def word_lengths(group: Group, support: Sequence) -> np.ndarray:
    if isinstance(group, FiniteGroupModel):
        return group.word_lengths()[np.asarray(support, dtype=int)]
    return np.array([group.length(g) for g in support])


def weights_on(w, T: VNElement) -> np.ndarray:
    """Values of ``w`` on ``T.support``: a deformation function, a mapping, or a sequence aligned with the support."""
    if isinstance(w, (Exponential, Polynomial)):
        vals = w(word_lengths(T.group, T.support))
    elif isinstance(w, Mapping):
        vals = [w[g] for g in T.support]
    elif callable(w):
        vals = [w(g) for g in T.support]
    else:
        vals = w
    vals = np.asarray(vals, dtype=complex).reshape(-1)
    if vals.shape[0] != len(T.support):
        raise ValueError("weights do not match the support")
    if np.any(vals == 0):
        raise ZeroWeightError("deformation function has a zero value on the support")
    return vals


# ---------------------------------------------------------------- norms


@dataclass
class NormBounds:
    lower: float
    upper: float
    exact: bool
    radius: int | None = None
    ball_size: int | None = None


def _characters(G: FiniteGroupModel) -> np.ndarray:
    return np.array([p.matrices[:, 0, 0] for p in G.irreps])  # [chi, g]


def _finite_norm(T: VNElement) -> float:
    G = T.group
    if not T.support:
        return 0.0
    if G.is_abelian:
        X = _characters(G)
        return float(np.max(np.abs(X[:, T.support] @ T.coeffs)))
    n = G.order
    L = np.zeros((n, n), dtype=complex)
    cols = np.arange(n)
    for g, a in zip(T.support, T.coeffs):
        L[G.mult_table[g], cols] += a
    return float(np.linalg.norm(L, 2))


def _is_finite_fg(group: FGGroupSpec) -> bool:
    return group.growth_kind()[0] == "finite"


def _ball_pattern(group: FGGroupSpec, support: Sequence, radius: int, cap: int):
    """Sparsity pattern of the compressed left-regular operator: (rows, cols, support index, size)."""
    spheres = ball_elements(group, radius, cap)
    elems = [g for sp in spheres for g in sp]
    index = {g: i for i, g in enumerate(elems)}
    rows, cols, which = [], [], []
    for j, x in enumerate(elems):
        for k, g in enumerate(support):
            i = index.get(group.mul(g, x))
            if i is not None:
                rows.append(i)
                cols.append(j)
                which.append(k)
    return np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64), np.array(which, dtype=np.int64), len(elems)


def _ball_operator(T: VNElement, radius: int, cap: int):
    rows, cols, which, n = _ball_pattern(T.group, T.support, radius, cap)
    return sparse.csr_matrix((T.coeffs[which], (rows, cols)), shape=(n, n)), n


def _spectral_norm(A) -> float:
    """``||A||`` (dense up to 1500 rows), else ``max ||A v||`` over Krylov unit vectors, a certified lower bound."""
    n = A.shape[0]
    if n <= 1500:
        return float(np.linalg.norm(A.toarray(), 2))
    ncv = min(n - 1, 64)
    vecs = []
    if abs(A - A.conj().T).max() < 1e-14:
        # the two ends separately: "LM" stalls on spectra symmetric about 0
        for which in ("LA", "SA"):
            try:
                vecs.append(splinalg.eigsh(A, k=1, which=which, tol=1e-10, ncv=ncv, maxiter=20 * n)[1][:, 0])
            except splinalg.ArpackNoConvergence as e:
                vecs.extend(e.eigenvectors.T)
    else:
        try:
            vecs.append(splinalg.svds(A, k=1, tol=1e-10, ncv=ncv, maxiter=20 * n)[2][0].conj())
        except splinalg.ArpackNoConvergence as e:
            vecs.extend(e.eigenvectors.T)
    if not vecs:
        vecs = [np.ones(n) / math.sqrt(n)]
    return float(max(np.linalg.norm(A @ v) / np.linalg.norm(v) for v in vecs))


def _upper_envelope(T: VNElement) -> float:
    l1 = float(np.sum(np.abs(T.coeffs)))
    group = T.group
    best = l1
    if isinstance(group, FreeGroup):
        # Haagerup inequality on each sphere: ||lambda(f_n)|| <= (n + 1) ||f_n||_2
        by_len: dict[int, float] = {}
        for g, a in zip(T.support, T.coeffs):
            by_len[len(g)] = by_len.get(len(g), 0.0) + abs(a) ** 2
        best = min(best, sum((n + 1) * math.sqrt(s) for n, s in by_len.items()))
    if isinstance(group, FreeAbelian):
        best = min(best, _torus_sup_upper(T))
    return best


def _torus_sup_upper(T: VNElement, grid: int = 256) -> float:
    n = T.group.n
    if n > 2:
        return float(np.sum(np.abs(T.coeffs)))
    pts = np.array(T.support, dtype=float)  # (m, n)
    axes = [np.arange(grid) * 2 * np.pi / grid] * n
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    vals = np.abs(np.exp(1j * mesh @ pts.T) @ T.coeffs)
    lip = float(np.sum(np.abs(T.coeffs) * np.abs(pts).sum(axis=1)))
    return float(vals.max() + lip * (np.pi / grid) * math.sqrt(n))


def vn_norm_bounds(
    T: VNElement, radius: int | None = None, cap: int = 200_000, target: int = 20_000
) -> NormBounds:
    """Two-sided bounds on ``||sum alpha_g lambda_g||``; exact on finite groups."""
    group = T.group
    if not T.support:
        return NormBounds(0.0, 0.0, True)
    if isinstance(group, FiniteGroupModel):
        v = _finite_norm(T)
        return NormBounds(v, v, True)
    if _is_finite_fg(group):
        spheres = ball_elements(group, 10 ** 6, cap, stop_when_empty=True)
        R = len(spheres) - 1
        A, n = _ball_operator(T, R, cap)
        v = _spectral_norm(A)
        return NormBounds(v, v, True, R, n)
    if radius is None:
        radius = _auto_radius(group, target)
    A, n = _ball_operator(T, radius, cap)
    lo = _spectral_norm(A)
    return NormBounds(lo, max(lo, _upper_envelope(T)), False, radius, n)


def _auto_radius(group: FGGroupSpec, target: int, max_radius: int = 400) -> int:
    spheres = group.closed_spheres(max_radius)
    if spheres is None:
        return 8
    total = 0
    for R, c in enumerate(spheres):
        total += c
        if total > target:
            return max(R - 1, 1)
    return max_radius


def vn_norm(T: VNElement, radius: int | None = None) -> float:
    """Operator norm (finite groups) or certified truncated lower bound (infinite groups)."""
    return vn_norm_bounds(T, radius).lower


# ---------------------------------------------------------------- m_w


@dataclass
class DiagonalTensor:
    """Formal element ``sum_g beta_g lambda_g (x) lambda_g``."""

    support: list
    coeffs: np.ndarray
    group: Group

    def as_element(self) -> VNElement:
        return VNElement(self.support, self.coeffs, self.group)


def deformed_comult_vn(T: VNElement, w) -> DiagonalTensor:
    """``sum_g w(g) alpha_g lambda_g (x) lambda_g``."""
    return DiagonalTensor(list(T.support), weights_on(w, T) * T.coeffs, T.group)


@dataclass
class FactorizationBound:
    value: float
    coeff_l2: float
    w_l2: float


def factorization_upper_bound(T: VNElement, w) -> FactorizationBound:
    """``(sum |alpha_g|^2)^(1/2) (sum |w(g)|^2)^(1/2)`` over the support; ``w_l2`` bounds the cb-norm of ``m_w``."""
    wv = weights_on(w, T)
    a = float(np.sqrt(np.sum(np.abs(T.coeffs) ** 2)))
    b = float(np.sqrt(np.sum(np.abs(wv) ** 2)))
    return FactorizationBound(a * b, a, b)


@dataclass
class SignBound:
    value: float
    phases: np.ndarray
    aligned: float
    strategy_value: float
    strategy: str
    norm: float


def _arc_sweep(z: np.ndarray) -> tuple[float, np.ndarray]:
    """Exact ``max |sum z_g r_g|`` over ``r_g in {1, i, -1, -i}``."""
    nz = np.abs(z) > 0
    if not nz.any():
        return 0.0, np.ones(len(z), dtype=complex)
    args = np.angle(z[nz])
    # the best phase for g changes where th - arg z_g crosses pi/4 + k pi/2
    cuts = np.sort(np.mod(np.concatenate([args + np.pi / 4 + k * np.pi / 2 for k in range(4)]), 2 * np.pi))
    mids = (cuts + np.append(cuts[1:], cuts[0] + 2 * np.pi)) / 2
    best, best_r = -1.0, None
    for th in mids:
        # per g, the alphabet phase maximizing Re(e^{-i th} z r)
        k = np.mod(np.round((th - np.angle(z)) / (np.pi / 2)), 4).astype(int)
        r = PHASES4[k]
        val = abs(np.sum(z * r))
        if val > best:
            best, best_r = val, r
    return float(best), best_r


def sign_lower_bound(
    T: VNElement,
    w,
    strategy: str = "exhaustive",
    samples: int = 256,
    seed: int = 0,
    norm: float | None = None,
) -> SignBound:
    """``max_r |sum w(g) alpha_g r_g| / ||T||`` over unimodular ``r``.

    ``exhaustive`` is exact over the alphabet {1, i, -1, -i}; ``random`` and
    ``greedy`` search the same alphabet.  The aligned choice
    ``r_g = conj(phase(w(g) alpha_g))`` is the optimum over all unimodular ``r``
    and is always applied as a floor.
    """
    z = weights_on(w, T) * T.coeffs
    nT = vn_norm(T) if norm is None else norm
    if not nT > 0:
        raise ValueError("vn_norm(T) must be positive")
    if strategy == "exhaustive":
        sval, r = _arc_sweep(z)
    elif strategy == "random":
        if samples < 1:
            raise ValueError("samples must be positive")
        rng = np.random.default_rng(seed)
        R = PHASES4[rng.integers(0, 4, size=(samples, len(z)))]
        vals = np.abs(R @ z)
        k = int(np.argmax(vals))
        sval, r = float(vals[k]), R[k]
    elif strategy == "greedy":
        r = np.ones(len(z), dtype=complex)
        for _ in range(4 * len(z) + 1):
            improved = False
            for g in range(len(z)):
                cur = abs(np.sum(z * r))
                for p in PHASES4:
                    old = r[g]
                    r[g] = p
                    if abs(np.sum(z * r)) > cur + 1e-15:
                        cur = abs(np.sum(z * r))
                        improved = True
                    else:
                        r[g] = old
            if not improved:
                break
        sval = float(abs(np.sum(z * r)))
    elif strategy == "aligned":
        sval, r = float(np.sum(np.abs(z))), None
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    aligned = float(np.sum(np.abs(z)))
    ph = np.where(np.abs(z) > 0, np.conj(z) / np.where(np.abs(z) > 0, np.abs(z), 1.0), 1.0)
    return SignBound(aligned / nT, ph, aligned / nT, sval / nT, strategy, nT)


# ---------------------------------------------------------------- witnesses


@dataclass
class CoefficientWitness:
    T: VNElement
    K_emp: float
    K_upper: float
    start: str
    evaluations: int


def _norm_evaluator(c: VNElement) -> Callable[[np.ndarray], float]:
    group = c.group
    if isinstance(group, FiniteGroupModel) and group.is_abelian:
        X = _characters(group)[:, c.support]
        return lambda a: float(np.max(np.abs(X @ a)))
    if isinstance(group, FiniteGroupModel):
        return lambda a: _finite_norm(VNElement(c.support, a, group))
    if _is_finite_fg(group):
        return lambda a: vn_norm_bounds(VNElement(c.support, a, group)).lower
    rows, cols, which, n = _ball_pattern(group, c.support, _auto_radius(group, 4000), 200_000)
    return lambda a: _spectral_norm(sparse.csr_matrix((a[which], (rows, cols)), shape=(n, n)))


def _chirp(m: int) -> np.ndarray:
    k = np.arange(m)
    if m % 2 == 0:
        return np.exp(1j * np.pi * k ** 2 / m)
    return np.exp(1j * np.pi * (m + 1) * k ** 2 / m)


def coefficient_witness_search(
    c: VNElement, budget: int = 2000, seed: int = 0, restarts: int = 4
) -> CoefficientWitness:
    """Find ``T`` with ``|alpha_g| = |c_g|`` on the support and small ``||T||``.

    Starts from the trivial phases, a quadratic chirp (in support order) and
    ``restarts`` random phase vectors, then improves the best start by single
    phase moves; ``budget`` bounds the number of moves tried.
    """
    if np.sum(np.abs(c.coeffs) ** 2) > 1 + 1e-12:
        raise ValueError("coefficient family must satisfy sum |c_g|^2 <= 1")
    rng = np.random.default_rng(seed)
    mags = c.coeffs.copy()
    norm = _norm_evaluator(c)
    m = len(mags)
    starts = [("trivial", np.ones(m, dtype=complex)), ("chirp", _chirp(m))]
    for i in range(restarts):
        starts.append((f"random{i}", np.exp(2j * np.pi * rng.random(m))))
    scored = [(norm(mags * u), name, u) for name, u in starts]
    evals = len(scored)
    best_val, best_name, u = min(scored, key=lambda s: s[0])
    u = u.copy()
    alphabet = np.exp(2j * np.pi * np.arange(16) / 16)
    for step in range(budget):
        if m == 0:
            break
        g = int(rng.integers(m))
        cand = alphabet[rng.integers(16)] if step % 2 == 0 else np.exp(2j * np.pi * rng.random())
        old = u[g]
        u[g] = cand
        val = norm(mags * u)
        evals += 1
        if val < best_val - 1e-15:
            best_val = val
        else:
            u[g] = old
    T = VNElement(c.support, mags * u, c.group)
    bounds = vn_norm_bounds(T)
    return CoefficientWitness(T, float(bounds.lower), float(bounds.upper), best_name, evals)


# ---------------------------------------------------------------- abelian exact


def _abelian_model(T: VNElement, quotient_order: int | None) -> tuple[FiniteGroupModel, list[int]]:
    group = T.group
    if isinstance(group, FiniteGroupModel):
        if not group.is_abelian:
            raise NonAbelianError(f"{group.name} is not abelian")
        return group, list(T.support)
    if isinstance(group, Cyclic):
        return cyclic(group.n), [int(g) for g in T.support]
    if isinstance(group, FreeAbelian) and group.n == 1:
        span = max(abs(g[0]) for g in T.support)
        n = quotient_order or (2 * span + 1)
        if n < 2 * span + 1:
            raise ValueError("quotient order too small to separate the support")
        return cyclic(n), [g[0] % n for g in T.support]
    raise NonAbelianError(f"abelian_exact_eh needs a finite abelian context, got {getattr(group, 'name', group)}")


def abelian_kernel(T: VNElement, w, quotient_order: int | None = None) -> np.ndarray:
    """``K(chi, psi) = sum_g w(g) alpha_g chi(g) psi(g)`` on the dual group."""
    z = weights_on(w, T) * T.coeffs
    G, sup = _abelian_model(T, quotient_order)
    X = _characters(G)[:, sup]
    return (X * z[None, :]) @ X.T


def abelian_exact_eh(T: VNElement, w, tol: float = 1e-7, quotient_order: int | None = None) -> float:
    """Extended-Haagerup norm of ``sum w(g) alpha_g lambda_g (x) lambda_g`` as a gamma_2 norm."""
    return gamma2_solve(abelian_kernel(T, w, quotient_order), tol=tol).value


def pinch(G: FiniteGroupModel, w, seed: int = 0, budget: int = 2000) -> dict:
    """Two-sided estimate of ``||w||_2`` on a finite group from the witness for ``c = w / ||w||_2``.

    ``exact`` (the normalized extended-Haagerup norm) is ``None`` on nonabelian groups.
    """
    support = list(range(G.order))
    wv = weights_on(w, VNElement(support, np.ones(G.order), G)).real
    w_l2 = float(np.sqrt(np.sum(wv ** 2)))
    c = VNElement(support, wv / w_l2, G)
    wit = coefficient_witness_search(c, budget=budget, seed=seed)
    T = wit.T
    lower = sign_lower_bound(T, wv, norm=wit.K_emp)
    exact = abelian_exact_eh(T, wv) / wit.K_emp if G.is_abelian else None
    return {
        "group": G.name,
        "support": support,
        "w": wv.tolist(),
        "w_l2": w_l2,
        "lower": lower.value,
        "upper": w_l2,
        "K_emp": wit.K_emp,
        "exact": exact,
        "pinch_ratio": w_l2 / lower.value,
    }
