"""The acceptance suite: ten seeded, self-contained criteria with pinned tolerances."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .finite import (
    builtin,
    comult_coefficient_formula,
    convolve,
    deformed_comult_kernel,
    deformed_norm,
    deformed_product,
    eh_upper_bound,
    l1_norm,
    pairing,
    reflect,
    sup_norm,
)
from .gamma2 import gamma2_solve
from .growth import (
    Cyclic,
    Dihedral,
    Exponential,
    FreeAbelian,
    FreeGroup,
    Polynomial,
    ball_sizes,
    growth_summability_verdict,
    summation_by_parts_check,
)
from .lie import SU2, Torus
from .measures import QuadratureParams, dual_summability_verdict, l2_limit_estimate, poly_coefficients, subordination_check
from .parallel import pmap
from .summability import Verdict
from .vn import VNElement, abelian_exact_eh, factorization_upper_bound, pinch, sign_lower_bound, vn_norm

__all__ = ["CriterionResult", "CRITERIA", "FINITE_GROUPS", "run_criterion", "run_all", "payload"]

FINITE_GROUPS = ("z12", "s3", "s4", "d4", "q8")


@dataclass
class CriterionResult:
    id: int
    name: str
    passed: bool
    max_residual: float | None
    tolerance: float | None
    runtime_s: float
    budget_s: float
    details: dict = field(default_factory=dict)
    error: str | None = None
    checks_passed: bool = False
    timing: dict = field(default_factory=dict)

    def numerical(self) -> dict:
        """Everything except timing, for determinism comparisons.

        ``passed`` also requires the runtime budgets, so the timing-free
        ``checks_passed`` stands in for it.
        """
        return {
            "id": self.id,
            "name": self.name,
            "checks_passed": self.checks_passed,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
            "budget_s": self.budget_s,
            "details": self.details,
            "error": self.error,
        }


def _rng(seed: int, cid: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), cid])


def _crandn(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def _tol(default: float, override: float | None) -> float:
    return default if override is None else float(override)


# Each criterion returns (ok, max_residual, tolerance, details); ``ok`` covers
# properties that have no residual (verdicts, runtime caps of sub-cases).


def c1_dual_threshold(seed: int, tol: float | None):
    cases = [(SU2(), 1.4, Verdict.DIVERGES), (SU2(), 1.6, Verdict.CONVERGES)]
    for n in (1, 2):
        cases += [(Torus(n), n / 2 - 0.2, Verdict.DIVERGES), (Torus(n), n / 2 + 0.2, Verdict.CONVERGES)]
    rows, wrong, slowest = [], 0, 0.0
    for group, alpha, want in cases:
        t0 = time.perf_counter()
        v = dual_summability_verdict(group, alpha, 2 ** 14)
        slowest = max(slowest, time.perf_counter() - t0)
        wrong += v.verdict != want
        rows.append({"group": group.name, "alpha": round(alpha, 12), "verdict": v.verdict.value,
                     "expected": want.value, "threshold": v.threshold})
    timing = {"slowest_case_s": slowest, "per_case_budget_ok": slowest < 10.0}
    return wrong == 0, float(wrong), 0.0, {"cases": rows, "timing": timing}


def c2_closed_form(seed: int, tol: float | None):
    tol = _tol(1e-6, tol)
    m = poly_coefficients(SU2(), 2.0, 100_000)
    raw, extrapolated = l2_limit_estimate(m)
    exact = math.pi ** 2 / 6
    rel = abs(extrapolated - exact) / exact
    return rel <= tol, rel, tol, {"raw": raw, "extrapolated": extrapolated, "exact": exact,
                                  "raw_relative_error": abs(raw - exact) / exact}


def c3_subordination(seed: int, tol: float | None):
    tol = _tol(1e-8, tol)
    rng = _rng(seed, 3)
    alphas = rng.uniform(0.5, 5.0, 100)
    kappas = rng.uniform(0.0, 50.0, 100)
    q = QuadratureParams()
    res = [subordination_check(float(a), float(k), q) for a, k in zip(alphas, kappas)]
    worst = float(max(res))
    return worst <= tol, worst, tol, {"samples": 100, "worst_alpha": float(alphas[int(np.argmax(res))]),
                                      "worst_kappa": float(kappas[int(np.argmax(res))])}


def c4_comultiplication(seed: int, tol: float | None):
    tol = _tol(1e-10, tol)
    rng = _rng(seed, 4)
    per_group = {}
    for name in FINITE_GROUPS:
        G = builtin(name)
        worst = 0.0
        for _ in range(20):
            mu = _crandn(rng, G.order)
            for k, p in enumerate(G.irreps):
                for i in range(p.dim):
                    for j in range(p.dim):
                        K = deformed_comult_kernel(G, G.matrix_coefficient(k, i, j), mu)
                        F = comult_coefficient_formula(G, mu, k, i, j)
                        worst = max(worst, float(np.max(np.abs(K - F))))
        per_group[G.name] = worst
    worst = max(per_group.values())
    return worst <= tol, worst, tol, {"per_group": per_group, "measures_per_group": 20}


def _c5_case(args):
    G, f, mu = args
    r = gamma2_solve(deformed_comult_kernel(G, f, mu), tol=1e-7)
    return r.value, eh_upper_bound(G, f, mu), r.gap


def c5_upper_bound(seed: int, tol: float | None):
    tol = _tol(1e-7, tol)
    rng = _rng(seed, 5)
    per_group, worst_excess, worst_gap = {}, 0.0, 0.0
    for name in FINITE_GROUPS:
        G = builtin(name)
        cases = []
        for _ in range(50):
            f = _crandn(rng, G.order)
            mu = _crandn(rng, G.order)
            cases.append((G, f / sup_norm(f), mu / l1_norm(mu)))
        out = pmap(_c5_case, cases)
        excess = max(g - b for g, b, _ in out)
        gap = max(gp for _, _, gp in out)
        per_group[G.name] = {"max_excess": excess, "max_gap": gap,
                             "max_ratio": max(g / b for g, b, _ in out)}
        worst_excess = max(worst_excess, excess)
        worst_gap = max(worst_gap, gap)
    worst = max(worst_excess, worst_gap)
    return worst <= tol, worst, tol, {"per_group": per_group, "max_excess": worst_excess, "max_gap": worst_gap}


def c6_axioms(seed: int, tol: float | None):
    dual_tol = _tol(1e-12, tol)
    tol = _tol(1e-10, tol)
    rng = _rng(seed, 6)
    per_group, assoc_w, sub_w, dual_w = {}, 0.0, 0.0, 0.0
    for name in FINITE_GROUPS:
        G = builtin(name)
        a = s = d = 0.0
        for _ in range(50):
            mu = _crandn(rng, G.order)
            mu = mu / l1_norm(mu)
            f, g, h = (x / l1_norm(x) for x in (_crandn(rng, G.order) for _ in range(3)))
            lhs = deformed_product(G, deformed_product(G, f, mu, g), mu, h)
            rhs = deformed_product(G, f, mu, deformed_product(G, g, mu, h))
            a = max(a, float(np.max(np.abs(lhs - rhs))))
            # contractivity on L1 with the deformed product, then on L1_mu = mu * L1
            s = max(s, l1_norm(deformed_product(G, f, mu, g)) - l1_norm(f) * l1_norm(g))
            F, H = convolve(G, mu, f), convolve(G, mu, g)
            s = max(s, deformed_norm(G, convolve(G, F, H), mu) - deformed_norm(G, F, mu) * deformed_norm(G, H, mu))
            d = max(d, abs(pairing(convolve(G, mu, f), g) - pairing(f, convolve(G, reflect(G, mu), g))))
        per_group[G.name] = {"associativity": a, "submultiplicativity": max(s, 0.0), "duality": d}
        assoc_w, sub_w, dual_w = max(assoc_w, a), max(sub_w, s), max(dual_w, d)
    sub_w = max(sub_w, 0.0)
    worst = max(assoc_w, sub_w)
    ok = worst <= tol and dual_w <= dual_tol
    return ok, worst, tol, {"per_group": per_group, "duality": dual_w, "duality_tolerance": dual_tol}


# explicit BFS is run up to this many elements per family
_BFS_CAP = 300_000


def c7_growth_exactness(seed: int, tol: float | None):
    tol = _tol(1e-9, tol)
    families = [FreeAbelian(n) for n in (1, 2, 3)] + [FreeGroup(k) for k in (1, 2, 3)]
    families += [Dihedral(None)] + [Dihedral(m) for m in (2, 3, 4, 5, 8)] + [Cyclic(n) for n in (1, 2, 5, 12, 25)]
    rows, mismatches = [], 0
    for grp in families:
        closed = grp.closed_spheres(20)
        depth = max(n for n in range(21) if sum(closed[: n + 1]) <= _BFS_CAP)
        bfs = ball_sizes(grp, depth, method="enumerate", cap=_BFS_CAP).spheres
        bad = sum(a != b for a, b in zip(bfs, closed))
        row = {"family": grp.name, "bfs_depth": depth}
        if grp.automaton() is not None:
            auto = ball_sizes(grp, 20, method="automaton").spheres
            bad += sum(a != b for a, b in zip(auto, closed))
            row["automaton_depth"] = 20
        mismatches += bad
        row["mismatches"] = bad
        rows.append(row)
    z2 = ball_sizes(FreeAbelian(2), 10_000)
    sbp = [summation_by_parts_check(z2, 1.0, 10_000),
           summation_by_parts_check(ball_sizes(FreeGroup(2), 30), 0.5, 30)]
    worst = max(sbp)
    return mismatches == 0 and worst <= tol, worst, tol, {"families": rows, "mismatches": mismatches,
                                                          "summation_by_parts": sbp}


def c8_discrete_thresholds(seed: int, tol: float | None):
    z2, f2 = FreeAbelian(2), FreeGroup(2)
    t0 = math.log(3) / 2
    cases = [
        (z2, Polynomial(0.8), 2 ** 12, Verdict.DIVERGES),
        (z2, Polynomial(1.2), 2 ** 12, Verdict.CONVERGES),
        (z2, Polynomial(1.0), 2 ** 12, Verdict.INCONCLUSIVE),
        (f2, Exponential(t0 - 0.05), 40, Verdict.DIVERGES),
        (f2, Exponential(t0 + 0.05), 40, Verdict.CONVERGES),
        (f2, Exponential(t0), 40, Verdict.INCONCLUSIVE),
    ]
    rows, wrong = [], 0
    for grp, w, N, want in cases:
        v = growth_summability_verdict(grp, w, N)
        wrong += v.verdict != want
        rows.append({"family": grp.name, "deformation": repr(w), "N": N, "verdict": v.verdict.value,
                     "expected": want.value, "threshold": v.threshold})
    return wrong == 0, float(wrong), 0.0, {"cases": rows}


def c9_fourier_pinch(seed: int, tol: float | None):
    tol = _tol(1e-7, tol)
    rng = _rng(seed, 9)
    from .finite import cyclic

    chain_worst, rows = 0.0, []
    for _ in range(50):
        n = int(rng.integers(2, 17))
        G = cyclic(n)
        m = int(rng.integers(1, n + 1))
        support = sorted(int(x) for x in rng.choice(n, size=m, replace=False))
        T = VNElement(support, _crandn(rng, m), G)
        T = T.scaled(1.0 / vn_norm(T))
        w = rng.uniform(0.05, 1.0, m)
        lower = sign_lower_bound(T, w).value
        exact = abelian_exact_eh(T, w)
        upper = factorization_upper_bound(T, w).value
        chain_worst = max(chain_worst, lower - exact, exact - upper)
    witness_ok, k_max, pinch_worst = True, 0.0, 0.0
    for n in range(2, 17):
        p = pinch(cyclic(n), Polynomial(1.0), seed=int(rng.integers(2 ** 31)), budget=2000)
        k_max = max(k_max, p["K_emp"])
        # lower >= w_l2 / K_emp and both bounds sandwich the exact value
        pinch_worst = max(pinch_worst, p["w_l2"] / p["K_emp"] - p["lower"], p["lower"] - p["exact"],
                          p["exact"] - p["upper"])
        witness_ok &= p["K_emp"] <= 2.0 and p["upper"] == p["w_l2"]
        rows.append({"n": n, "K_emp": p["K_emp"], "lower": p["lower"], "exact": p["exact"], "upper": p["upper"]})
    worst = max(chain_worst, pinch_worst, 0.0)
    return worst <= tol and witness_ok, worst, tol, {"random_cases": 50, "chain_worst": chain_worst,
                                                     "pinch_worst": pinch_worst, "K_emp_max": k_max,
                                                     "witness": rows}


_REPEATED = (3, 4, 6)


def c10_determinism(seed: int, tol: float | None):
    """Re-run the seeded randomized criteria and compare numerical payloads."""
    same = []
    for cid in _REPEATED:
        a = run_criterion(cid, seed, tol).numerical()
        b = run_criterion(cid, seed, tol).numerical()
        same.append(a == b)
    bad = float(sum(not s for s in same))
    return bad == 0, bad, 0.0, {"rerun_criteria": list(_REPEATED), "identical": same}


CRITERIA: dict[int, tuple[str, float, Callable]] = {
    1: ("dual threshold", 40.0, c1_dual_threshold),
    2: ("closed-form sum", 5.0, c2_closed_form),
    3: ("subordination identity", 5.0, c3_subordination),
    4: ("finite co-multiplication", 30.0, c4_comultiplication),
    5: ("upper-bound echo", 120.0, c5_upper_bound),
    6: ("deformed-algebra axioms", 60.0, c6_axioms),
    7: ("growth exactness", 60.0, c7_growth_exactness),
    8: ("discrete thresholds", 20.0, c8_discrete_thresholds),
    9: ("Fourier pinch", 120.0, c9_fourier_pinch),
    10: ("determinism", 120.0, c10_determinism),
}


def run_criterion(cid: int, seed: int = 7, tol: float | None = None) -> CriterionResult:
    """Run one criterion; failures and exceptions are recorded, never raised."""
    name, budget, fn = CRITERIA[cid]
    t0 = time.perf_counter()
    try:
        ok, resid, used_tol, details = fn(seed, tol)
        err = None
    except Exception as exc:  # recorded in the report
        ok, resid, used_tol, details, err = False, None, tol, {}, f"{type(exc).__name__}: {exc}"
    runtime = time.perf_counter() - t0
    timing = {**details.pop("timing", {}), "within_budget": runtime <= budget}
    on_time = all(v for k, v in timing.items() if k.endswith("_ok") or k == "within_budget")
    return CriterionResult(cid, name, bool(ok and on_time), resid, used_tol, runtime, budget,
                           details, err, bool(ok), timing)


def run_all(seed: int = 7, tol: float | None = None, only: list[int] | None = None) -> list[CriterionResult]:
    ids = sorted(CRITERIA) if only is None else list(only)
    return [run_criterion(cid, seed, tol) for cid in ids]


def payload(results: list[CriterionResult]) -> list[dict]:
    return [r.numerical() for r in results]
