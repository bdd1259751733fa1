"""Central deformation measures on compact Lie groups (Fourier side only).

A central measure is stored through its scalar Fourier coefficients ``c_pi``
(``mu_hat(pi) = c_pi * I``) on the finite range ``enumerate_dual(group, cutoff)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import integrate, special

from .lie import IrrepData, IrrepLabel, LieGroupSpec, enumerate_dual, shell_dim_squares
from .summability import (
    SummabilityVerdict,
    dyadic_schedule,
    fit_verdict,
    partial_sums_at,
)

__all__ = [
    "Heat",
    "Poly",
    "Custom",
    "CentralMeasure",
    "QuadratureParams",
    "QuadratureError",
    "heat_coefficients",
    "poly_coefficients",
    "custom_measure",
    "haar_measure",
    "subordination_check",
    "l2_partial_sums",
    "l2_limit_estimate",
    "dual_summability_verdict",
    "is_valid_deformation",
]


@dataclass(frozen=True)
class Heat:
    t: float


@dataclass(frozen=True)
class Poly:
    alpha: float


@dataclass(frozen=True)
class Custom:
    name: str = "custom"


@dataclass
class CentralMeasure:
    """Central measure given by scalar coefficients on the irreps of norm <= cutoff."""

    group: LieGroupSpec
    coefficients: dict[IrrepLabel, complex]
    cutoff: int
    kind: Heat | Poly | Custom
    irreps: list[IrrepData] = field(default_factory=list, repr=False)

    def __post_init__(self):
        if not self.irreps:
            self.irreps = enumerate_dual(self.group, self.cutoff)
        labels = {irr.label for irr in self.irreps}
        if set(self.coefficients) != labels:
            raise ValueError("coefficients must be defined exactly on enumerate_dual(group, cutoff)")
        if not isinstance(self.kind, Custom):
            for irr in self.irreps:
                c = self.coefficients[irr.label]
                if abs(c) > 1 + 1e-15:
                    raise ValueError(f"|c| > 1 at {irr.label}")
                if irr.label.is_trivial and not (0 < c.real <= 1 and c.imag == 0):
                    raise ValueError("trivial coefficient must lie in (0, 1]")

    def coefficient(self, label: IrrepLabel) -> complex:
        return self.coefficients[label]


def _build(group, cutoff, kind, fn) -> CentralMeasure:
    irreps = enumerate_dual(group, cutoff)
    coeffs = {irr.label: complex(fn(irr)) for irr in irreps}
    return CentralMeasure(group, coeffs, cutoff, kind, irreps)


def heat_coefficients(group: LieGroupSpec, t: float, cutoff: int) -> CentralMeasure:
    """Heat semigroup measure: ``c_pi = exp(-t * casimir)``."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    return _build(group, cutoff, Heat(float(t)), lambda irr: math.exp(-t * float(irr.casimir)))


def poly_coefficients(group: LieGroupSpec, alpha: float, cutoff: int) -> CentralMeasure:
    """Subordinated measure ``nu_alpha`` with ``c_pi = (1 + casimir) ** (-alpha / 2)``."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return _build(
        group, cutoff, Poly(float(alpha)), lambda irr: (1.0 + float(irr.casimir)) ** (-alpha / 2.0)
    )


def custom_measure(
    group: LieGroupSpec, cutoff: int, coefficients: Mapping[IrrepLabel, complex], name: str = "custom"
) -> CentralMeasure:
    irreps = enumerate_dual(group, cutoff)
    return CentralMeasure(group, {k: complex(v) for k, v in coefficients.items()}, cutoff, Custom(name), irreps)


def haar_measure(group: LieGroupSpec, cutoff: int) -> CentralMeasure:
    irreps = enumerate_dual(group, cutoff)
    coeffs = {irr.label: (1.0 + 0j if irr.label.is_trivial else 0j) for irr in irreps}
    return CentralMeasure(group, coeffs, cutoff, Custom("haar"), irreps)


def is_valid_deformation(measure: CentralMeasure) -> bool:
    """True iff no Fourier coefficient vanishes on the enumerated range."""
    return all(c != 0 for c in measure.coefficients.values())


@dataclass(frozen=True)
class QuadratureParams:
    tol: float = 1e-10
    limit: int = 200


class QuadratureError(RuntimeError):
    def __init__(self, message: str, bracket: float):
        super().__init__(f"{message} (last error estimate {bracket:.3e})")
        self.bracket = bracket


def _gamma_integral(alpha: float, kappa: float, q: QuadratureParams) -> tuple[float, float]:
    """``int_0^inf t^(alpha/2 - 1) exp(-(1 + kappa) t) dt`` by adaptive quadrature."""
    a = alpha / 2.0
    rate = 1.0 + kappa
    if a < 1.0:
        # u = t^a removes the endpoint singularity: dt t^(a-1) = du / a
        def integrand(u):
            try:
                return math.exp(-rate * u ** (1.0 / a)) / a
            except OverflowError:  # u ** (1/a) beyond float range: the integrand is 0
                return 0.0
        cuts = [(c / rate) ** a for c in (1.0, 8.0, 40.0 + 4.0 * a)]
    else:
        integrand = lambda t: t ** (a - 1.0) * math.exp(-rate * t)
        cuts = [c / rate for c in (max(a - 1.0, 1.0), 8.0 * a, 40.0 + 4.0 * a)]
    # break points on the scale 1/rate keep the peak and the bulk of the tail finite
    edges = [0.0, *cuts, math.inf]
    total = 0.0
    err = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        for lo, hi in zip(edges, edges[1:]):
            try:
                val, e = integrate.quad(integrand, lo, hi, epsabs=q.tol * 1e-2, epsrel=q.tol, limit=q.limit)
            except integrate.IntegrationWarning as exc:
                raise QuadratureError(f"quadrature did not converge: {exc}", float("inf")) from None
            total += val
            err += e
    if err > q.tol * max(1.0, abs(total)):
        raise QuadratureError("quadrature error estimate above tolerance", err)
    return total, err


def subordination_check(alpha: float, kappa: float, quadrature: QuadratureParams = QuadratureParams()) -> float:
    """Residual of ``(1 + kappa)^(-alpha/2) = Gamma(alpha/2)^-1 int t^(alpha/2-1) e^-t e^(-t kappa) dt``."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    if not quadrature.tol > 0:
        raise ValueError("quadrature tolerance must be positive")
    integral, _ = _gamma_integral(alpha, kappa, quadrature)
    return abs((1.0 + kappa) ** (-alpha / 2.0) - integral / special.gamma(alpha / 2.0))


def _sorted_terms(measure: CentralMeasure) -> tuple[np.ndarray, np.ndarray]:
    norms = np.array([irr.one_norm for irr in measure.irreps])
    terms = np.array(
        [irr.dim ** 2 * abs(measure.coefficients[irr.label]) ** 2 for irr in measure.irreps]
    )
    return norms, terms


def _shell_terms(measure: CentralMeasure) -> np.ndarray:
    norms, terms = _sorted_terms(measure)
    shells = np.zeros(measure.cutoff + 1)
    # group terms by shell; within a shell sum exactly
    order = np.argsort(norms, kind="stable")
    norms, terms = norms[order], terms[order]
    bounds = np.searchsorted(norms, np.arange(measure.cutoff + 2))
    for k in range(measure.cutoff + 1):
        shells[k] = math.fsum(terms[bounds[k]:bounds[k + 1]].tolist())
    return shells


def l2_partial_sums(measure: CentralMeasure, cutoffs: Sequence[int]) -> list[tuple[int, float]]:
    """``S(N) = sum over norm <= N of d^2 |c|^2`` for each requested N."""
    cutoffs = list(cutoffs)
    if any(b < a for a, b in zip(cutoffs, cutoffs[1:])):
        raise ValueError("cutoffs must be sorted ascending")
    if cutoffs and (cutoffs[-1] > measure.cutoff or cutoffs[0] < 0):
        raise ValueError(f"cutoff exceeds the enumerated range 0..{measure.cutoff}")
    shells = _shell_terms(measure)
    return list(zip(cutoffs, partial_sums_at(shells, cutoffs)))


def l2_limit_estimate(measure: CentralMeasure) -> tuple[float, float]:
    """(raw S(cutoff), Aitken extrapolation from cutoffs N/4, N/2, N)."""
    n = measure.cutoff
    sums = [s for _, s in l2_partial_sums(measure, [n // 4, n // 2, n])]
    d1, d2 = sums[1] - sums[0], sums[2] - sums[1]
    if d1 <= 0 or d2 <= 0 or d2 >= d1:
        return sums[-1], sums[-1]
    r = d2 / d1
    return sums[-1], sums[-1] + d2 * r / (1.0 - r)


def dual_summability_verdict(group: LieGroupSpec, alpha: float, max_cutoff: int) -> SummabilityVerdict:
    """Decide convergence of ``sum_pi d_pi^2 (1 + |pi|_1)^(-2 alpha)`` from dyadic partial sums."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if max_cutoff < 16:
        raise ValueError("max_cutoff must be at least 16")
    k = np.arange(max_cutoff + 1, dtype=float)
    terms = shell_dim_squares(group, max_cutoff) * (1.0 + k) ** (-2.0 * alpha)
    sched = dyadic_schedule(max_cutoff)
    sums = partial_sums_at(terms, sched)
    verdict, ratios, slope, limit = fit_verdict(sched, sums)
    return SummabilityVerdict(
        partial_sums=list(zip(sched, sums)),
        verdict=verdict,
        threshold=group.real_dimension / 2.0,
        alpha=float(alpha),
        increment_ratios=ratios,
        slope=slope,
        limit_estimate=limit,
    )
