"""Seeded self-check of every finite-group identity and inequality on one model."""
from __future__ import annotations

import numpy as np

from ..gamma2 import gamma2_solve
from ..report import Check
from .groups import FiniteGroupModel
from .harmonic import (
    central_density,
    comult_coefficient_formula,
    convolve,
    deformed_comult_kernel,
    deformed_norm,
    deformed_product,
    eh_upper_bound,
    fourier_transform,
    helgason_lower_bound,
    inverse_fourier,
    l1_norm,
    l2_norm,
    pairing,
    parseval_residual,
    probe_cb_lower_bound,
    reflect,
    sup_norm,
)

__all__ = ["verify_model"]


def _crandn(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def verify_model(
    G: FiniteGroupModel,
    trials: int = 50,
    seed: int = 0,
    tol: float = 1e-10,
    gamma_tol: float = 1e-7,
    probes: int = 40,
    sdp_trials: int | None = None,
) -> tuple[list[Check], dict]:
    """Run the algebraic checks (tolerance ``tol``) and the gamma_2 checks (``gamma_tol``).

    Random functions are normalized (sup norm 1 for symbols, L1 norm 1 for
    measures) so absolute residuals are meaningful.  ``sdp_trials`` defaults to
    ``trials``.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    rng = np.random.default_rng(seed)
    n = G.order
    sdp_trials = trials if sdp_trials is None else sdp_trials
    r = {k: 0.0 for k in ("roundtrip", "parseval", "convolution", "comult", "assoc", "submult", "duality")}
    for _ in range(trials):
        f, g, h = (x / l1_norm(x) for x in (_crandn(rng, n) for _ in range(3)))
        mu = _crandn(rng, n)
        mu = mu / l1_norm(mu)
        r["roundtrip"] = max(r["roundtrip"], float(np.max(np.abs(inverse_fourier(G, fourier_transform(G, f)) - f))))
        r["parseval"] = max(r["parseval"], parseval_residual(G, f))
        lhs = fourier_transform(G, convolve(G, f, g))
        rhs = [a @ b for a, b in zip(fourier_transform(G, f), fourier_transform(G, g))]
        r["convolution"] = max(r["convolution"], max(float(np.max(np.abs(a - b))) for a, b in zip(lhs, rhs)))
        for k, p in enumerate(G.irreps):
            for i in range(p.dim):
                for j in range(p.dim):
                    K = deformed_comult_kernel(G, G.matrix_coefficient(k, i, j), mu)
                    r["comult"] = max(r["comult"], float(np.max(np.abs(K - comult_coefficient_formula(G, mu, k, i, j)))))
        a = deformed_product(G, deformed_product(G, f, mu, g), mu, h)
        b = deformed_product(G, f, mu, deformed_product(G, g, mu, h))
        r["assoc"] = max(r["assoc"], float(np.max(np.abs(a - b))))
        r["submult"] = max(r["submult"], l1_norm(deformed_product(G, f, mu, g)) - l1_norm(f) * l1_norm(g))
        F, H = convolve(G, mu, f), convolve(G, mu, g)
        r["submult"] = max(r["submult"], deformed_norm(G, convolve(G, F, H), mu) - deformed_norm(G, F, mu) * deformed_norm(G, H, mu))
        r["duality"] = max(r["duality"], abs(pairing(convolve(G, mu, f), g) - pairing(f, convolve(G, reflect(G, mu), g))))

    excess, gap = 0.0, 0.0
    for _ in range(sdp_trials):
        f = _crandn(rng, n)
        f = f / sup_norm(f)
        mu = _crandn(rng, n)
        mu = mu / l1_norm(mu)
        res = gamma2_solve(deformed_comult_kernel(G, f, mu), tol=gamma_tol)
        excess = max(excess, res.value - eh_upper_bound(G, f, mu))
        gap = max(gap, res.gap)

    # sandwich on a random central measure with c_trivial = 1
    c = np.concatenate([[1.0], rng.uniform(0.05, 1.0, len(G.irreps) - 1)])
    mu_c = central_density(G, c)
    hb = helgason_lower_bound(G, mu_c, samples=16, seed=seed)
    pb = probe_cb_lower_bound(G, mu_c, probes=probes, seed=seed, tol=gamma_tol, helgason_samples=16)
    l2 = l2_norm(mu_c)
    sandwich = max(hb.value - pb.value, pb.value - l2, 0.0)

    dual_tol = min(tol, 1e-12)
    checks = [
        Check.residual("fourier_roundtrip", r["roundtrip"], tol),
        Check.residual("parseval", r["parseval"], tol),
        Check.residual("convolution_theorem", r["convolution"], tol),
        Check.residual("comultiplication_formula", r["comult"], tol),
        Check.residual("deformed_associativity", r["assoc"], tol),
        Check.residual("deformed_submultiplicativity", max(r["submult"], 0.0), tol),
        Check.residual("duality", r["duality"], dual_tol),
        Check.residual("gamma2_upper_bound", max(excess, 0.0), gamma_tol),
        Check.residual("gamma2_duality_gap", gap, gamma_tol),
        Check.residual("helgason_sandwich", sandwich, gamma_tol),
    ]
    outputs = {
        "group": G.name,
        "order": n,
        "irrep_dims": [p.dim for p in G.irreps],
        "trials": trials,
        "sdp_trials": sdp_trials,
        "sandwich": {"central_scalars": c.tolist(), "helgason_lower": hb.value, "probe_lower": pb.value,
                     "probe_best": pb.kinds[pb.best_index], "l2_upper": l2},
    }
    return checks, outputs
