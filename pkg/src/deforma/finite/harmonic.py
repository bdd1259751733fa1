"""Fourier calculus and deformed convolution on finite groups.

Haar measure is normalized counting measure and measures are densities, so

    fourier:      f_hat(pi) = (1/|G|) sum_g f(g) pi(g^-1)^T
    inverse:      f(x) = sum_pi d_pi Tr(f_hat(pi) pi(x)^T)
    convolution:  (f * g)(x) = (1/|G|) sum_y f(y) g(y^-1 x),   (f * g)^ = f_hat g_hat

The delta density ``|G| 1_e`` is the unit of convolution.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..gamma2 import gamma2_solve
from .groups import FiniteGroupModel

__all__ = [
    "central_density",
    "InvalidDeformationError",
    "NonCentralMeasureError",
    "delta",
    "haar",
    "check_function",
    "convolve",
    "fourier_transform",
    "inverse_fourier",
    "parseval_residual",
    "l1_norm",
    "l2_norm",
    "sup_norm",
    "pairing",
    "reflect",
    "singular_irreps",
    "is_valid_deformation_finite",
    "deformed_product",
    "deformed_norm",
    "deformed_comult_kernel",
    "comult_coefficient_formula",
    "conjugate_coefficient",
    "eh_upper_bound",
    "HelgasonBound",
    "central_scalars",
    "helgason_probe",
    "helgason_lower_bound",
    "transfer_unitary",
    "ProbeBound",
    "probe_cb_lower_bound",
]


class InvalidDeformationError(ValueError):
    pass


class NonCentralMeasureError(ValueError):
    pass


def check_function(G: FiniteGroupModel, f) -> np.ndarray:
    f = np.asarray(f, dtype=complex)
    if f.shape != (G.order,):
        raise ValueError(f"function has shape {f.shape}, expected ({G.order},)")
    return f


def delta(G: FiniteGroupModel) -> np.ndarray:
    d = np.zeros(G.order, dtype=complex)
    d[0] = G.order
    return d


def haar(G: FiniteGroupModel) -> np.ndarray:
    return np.ones(G.order, dtype=complex)


def convolve(G: FiniteGroupModel, f, g) -> np.ndarray:
    f = check_function(G, f)
    g = check_function(G, g)
    # idx[y, x] = y^-1 x
    idx = G.mult_table[G.inverse_table]
    return f @ g[idx] / G.order


def fourier_transform(G: FiniteGroupModel, f) -> list[np.ndarray]:
    f = check_function(G, f)
    # pi(g^-1)^T = conj(pi(g)) for unitary pi
    return [np.einsum("g,gij->ij", f, p.matrices.conj()) / G.order for p in G.irreps]


def inverse_fourier(G: FiniteGroupModel, coeffs) -> np.ndarray:
    out = np.zeros(G.order, dtype=complex)
    for p, F in zip(G.irreps, coeffs):
        out += p.dim * np.einsum("ij,gij->g", np.asarray(F, dtype=complex), p.matrices)
    return out


def parseval_residual(G: FiniteGroupModel, f) -> float:
    f = check_function(G, f)
    lhs = sum(p.dim * np.sum(np.abs(F) ** 2) for p, F in zip(G.irreps, fourier_transform(G, f)))
    return float(abs(lhs - np.mean(np.abs(f) ** 2)))


def l1_norm(f) -> float:
    return float(np.mean(np.abs(f)))


def l2_norm(f) -> float:
    return float(np.sqrt(np.mean(np.abs(f) ** 2)))


def sup_norm(f) -> float:
    return float(np.max(np.abs(f)))


def pairing(f, g) -> complex:
    """Bilinear pairing ``int f g`` under normalized Haar."""
    return complex(np.mean(np.asarray(f) * np.asarray(g)))


def reflect(G: FiniteGroupModel, mu) -> np.ndarray:
    """``mu_check(x) = mu(x^-1)``."""
    return check_function(G, mu)[G.inverse_table]


def singular_irreps(G: FiniteGroupModel, mu, rtol: float = 1e-12) -> list[int]:
    out = []
    for k, M in enumerate(fourier_transform(G, mu)):
        s = np.linalg.svd(M, compute_uv=False)
        if s[-1] <= rtol * max(1.0, s[0]):
            out.append(k)
    return out


def is_valid_deformation_finite(G: FiniteGroupModel, mu, rtol: float = 1e-12) -> bool:
    """True iff every Fourier coefficient of ``mu`` is invertible."""
    return not singular_irreps(G, mu, rtol)


def _require_valid(G, mu):
    bad = singular_irreps(G, mu)
    if bad:
        k = bad[0]
        name = G.irreps[k].name or f"#{k}"
        raise InvalidDeformationError(
            f"Fourier coefficient of the deformation is singular at irrep {name} "
            f"(index {k}, dimension {G.irreps[k].dim})"
        )


def deformed_product(G: FiniteGroupModel, f, mu, g) -> np.ndarray:
    """``f *_mu g = f * mu * g``."""
    _require_valid(G, mu)
    return convolve(G, convolve(G, f, mu), g)


def deformed_norm(G: FiniteGroupModel, h, mu) -> float:
    """``||h||_mu = ||x||_1`` where ``mu * x = h``."""
    _require_valid(G, mu)
    h = check_function(G, h)
    mh = fourier_transform(G, mu)
    hh = fourier_transform(G, h)
    # (mu * x)^ = mu_hat x_hat
    x = inverse_fourier(G, [np.linalg.solve(M, H) for M, H in zip(mh, hh)])
    return l1_norm(x)


def deformed_comult_kernel(G: FiniteGroupModel, f, mu) -> np.ndarray:
    """``K(x, y) = (1/|G|) sum_z f(x z y) mu(z)``."""
    f = check_function(G, f)
    mu = check_function(G, mu)
    t = G.mult_table
    xzy = t[t]  # xzy[x, z, y] = (x z) y
    return np.einsum("xzy,z->xy", f[xzy], mu) / G.order


def conjugate_coefficient(G: FiniteGroupModel, mu, k: int) -> np.ndarray:
    """``mu_hat(conj pi) = (1/|G|) sum_z mu(z) pi(z)`` for irrep ``k``."""
    mu = check_function(G, mu)
    return np.einsum("z,zij->ij", mu, G.irreps[k].matrices) / G.order


def comult_coefficient_formula(G: FiniteGroupModel, mu, k: int, i: int, j: int) -> np.ndarray:
    """Kernel of ``pi_ij`` from the matrix identity ``sum_l pi_il(x) [mu_hat(conj pi) pi(y)]_lj``."""
    P = G.irreps[k].matrices
    M = conjugate_coefficient(G, mu, k)
    right = np.einsum("lm,ym->yl", M, P[:, :, j])
    return np.einsum("xl,yl->xy", P[:, i, :], right)


def eh_upper_bound(G: FiniteGroupModel, f, mu) -> float:
    """``||f||_inf * ||mu||_L2``."""
    return sup_norm(check_function(G, f)) * l2_norm(check_function(G, mu))


def central_scalars(G: FiniteGroupModel, mu, tol: float = 1e-10) -> np.ndarray:
    """Scalars ``c`` with ``mu_hat(conj pi) = c I``; raises if ``mu`` is not central."""
    out = []
    for k, p in enumerate(G.irreps):
        M = conjugate_coefficient(G, mu, k)
        c = np.trace(M) / p.dim
        if np.abs(M - c * np.eye(p.dim)).max() > tol * max(1.0, abs(c)):
            raise NonCentralMeasureError(f"measure is not central (irrep index {k})")
        out.append(complex(c))
    return np.array(out)


def central_density(G: FiniteGroupModel, scalars) -> np.ndarray:
    """Central ``mu`` with ``mu_hat(conj pi) = c_pi I``, namely ``sum_pi c_pi d_pi conj(chi_pi)``."""
    scalars = np.asarray(scalars, dtype=complex)
    if scalars.shape != (len(G.irreps),):
        raise ValueError("need one scalar per irrep")
    mu = np.zeros(G.order, dtype=complex)
    for p, c in zip(G.irreps, scalars):
        mu += c * p.dim * np.conj(np.einsum("xii->x", p.matrices))
    return mu


def helgason_probe(G: FiniteGroupModel, scalars, unitaries) -> np.ndarray:
    """``h_U(x) = sum_pi c_pi d_pi Tr(U_pi^T pi(x)^T)``."""
    h = np.zeros(G.order, dtype=complex)
    for p, c, U in zip(G.irreps, scalars, unitaries):
        h += c * p.dim * np.einsum("xij,ji->x", p.matrices, U)
    return h


def _haar_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


@dataclass
class HelgasonBound:
    value: float
    unitaries: list[np.ndarray]
    witness: np.ndarray
    n_probes: int


def helgason_lower_bound(G: FiniteGroupModel, mu_central, samples: int = 64, seed: int = 0) -> HelgasonBound:
    """Max of the total-variation norm of ``h_U`` over sign tuples and Haar-random unitary tuples.

    The reported ``witness`` is the unimodular function ``f`` with
    ``gamma2(K_f) >= value``, namely ``f(x) = conj(phase(h_U(x^-1)))`` for the best ``U``.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    c = central_scalars(G, mu_central)
    rng = np.random.default_rng(seed)
    dims = [p.dim for p in G.irreps]
    families = []
    r = len(dims)
    if r <= 12:
        for bits in range(2 ** r):
            families.append([(-1.0 if bits >> k & 1 else 1.0) * np.eye(d) for k, d in enumerate(dims)])
    else:
        for _ in range(samples):
            families.append([rng.choice((-1.0, 1.0)) * np.eye(d) for d in dims])
    for _ in range(samples):
        families.append([_haar_unitary(rng, d) for d in dims])
    best = None
    for U in families:
        val = l1_norm(helgason_probe(G, c, U))
        if best is None or val > best[0] + 1e-15:
            best = (val, U)
    val, U = best
    h = helgason_probe(G, c, U)
    hinv = h[G.inverse_table]
    witness = np.where(np.abs(hinv) > 0, np.conj(hinv) / np.where(np.abs(hinv) > 0, np.abs(hinv), 1.0), 1.0)
    return HelgasonBound(val, U, witness, len(families))


def transfer_unitary(G: FiniteGroupModel, unitaries) -> np.ndarray:
    """Matrix of the unitary on L2(G) sending ``pi_ij`` to ``[pi^* U_pi]_ij``."""
    src, dst = [], []
    for p, U in zip(G.irreps, unitaries):
        P = p.matrices
        src.append(P.reshape(G.order, -1))
        dst.append(np.einsum("xri,rj->xij", P.conj(), U).reshape(G.order, -1))
    S = np.concatenate(src, axis=1)
    D = np.concatenate(dst, axis=1)
    return D @ np.linalg.inv(S)


@dataclass
class ProbeBound:
    value: float
    best_index: int
    values: np.ndarray
    kinds: list[str]


def _probe_family(G: FiniteGroupModel, mu, probes: int, seed: int, helgason_samples: int):
    rng = np.random.default_rng(seed)
    out = []
    try:
        hb = helgason_lower_bound(G, mu, samples=helgason_samples, seed=seed)
        out.append(("helgason-witness", hb.witness))
    except NonCentralMeasureError:
        pass
    for k, p in enumerate(G.irreps):
        for i in range(p.dim):
            for j in range(p.dim):
                out.append((f"coefficient[{k}]({i},{j})", G.matrix_coefficient(k, i, j)))
    while len(out) < probes:
        coeffs = [
            (rng.standard_normal((p.dim, p.dim)) + 1j * rng.standard_normal((p.dim, p.dim)))
            * (rng.random() < 0.7)
            for p in G.irreps
        ]
        f = inverse_fourier(G, coeffs)
        if sup_norm(f) > 0:
            out.append(("trig-poly", f))
    return out[:probes]


def probe_cb_lower_bound(
    G: FiniteGroupModel,
    mu,
    probes: int = 200,
    seed: int = 0,
    tol: float = 1e-7,
    helgason_samples: int = 64,
) -> ProbeBound:
    """``max_f gamma2(K_f) / ||f||_inf`` over a fixed probe family (a lower bound for the cb-norm).

    The family is, in order: the Helgason witness for ``(helgason_samples, seed)``
    when ``mu`` is central, every matrix coefficient, then random trigonometric
    polynomials, truncated to ``probes`` members.
    """
    mu = check_function(G, mu)
    fam = _probe_family(G, mu, probes, seed, helgason_samples)
    vals = np.array([gamma2_solve(deformed_comult_kernel(G, f, mu), tol=tol).value / sup_norm(f) for _, f in fam])
    k = int(np.argmax(vals))
    return ProbeBound(float(vals[k]), k, vals, [kind for kind, _ in fam])
