"""Compensated partial sums and the convergence verdict shared by the dual and growth labs.

The verdict looks at the increments ``D_k = S(N_{k+1}) - S(N_k)`` of the partial
sums on a cutoff schedule:

* ``Converges`` when the relative increments at the two largest levels are below
  ``rel_tol`` (the increments have died out), or when the last two increment
  ratios are both at most ``1 - band`` (geometric decay of the dyadic blocks,
  which is what a convergent power-law or exponential tail looks like);
* ``Diverges`` when the last two increment ratios are both at least ``1 + band``
  and ``log S`` grows against ``log N`` with slope above ``min_slope``;
* ``Inconclusive`` otherwise.  Block ratios that stay near one are the signature
  of a logarithmic (boundary) series.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Verdict",
    "SummabilityVerdict",
    "neumaier_cumsum",
    "partial_sums_at",
    "fit_verdict",
    "dyadic_schedule",
    "arithmetic_schedule",
]


class Verdict(str, Enum):
    CONVERGES = "Converges"
    DIVERGES = "Diverges"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class SummabilityVerdict:
    partial_sums: list[tuple[int, float]]
    verdict: Verdict
    threshold: float
    alpha: float
    increment_ratios: list[float] = field(default_factory=list)
    slope: float = float("nan")
    limit_estimate: float | None = None

    def __post_init__(self):
        vals = [s for _, s in self.partial_sums]
        if any(b < a for a, b in zip(vals, vals[1:])):
            raise ValueError("partial sums must be nondecreasing")

    def to_dict(self) -> dict:
        return {
            "threshold": _finite_or_none(self.threshold),
            "alpha": self.alpha,
            "cutoffs": [int(n) for n, _ in self.partial_sums],
            "partial_sums": [float(s) for _, s in self.partial_sums],
            "verdict": self.verdict.value,
            "increment_ratios": [_finite_or_none(r) for r in self.increment_ratios],
            "slope": _finite_or_none(self.slope),
            "limit_estimate": _finite_or_none(self.limit_estimate),
        }


def _finite_or_none(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def neumaier_cumsum(terms: Iterable[float]) -> np.ndarray:
    """Running sums with Neumaier compensation (order-robust to ~1 ulp of the total)."""
    terms = np.asarray(list(terms) if not isinstance(terms, np.ndarray) else terms, dtype=float)
    out = np.empty(terms.shape[0])
    s = 0.0
    c = 0.0
    for i, x in enumerate(terms.tolist()):
        t = s + x
        if abs(s) >= abs(x):
            c += (s - t) + x
        else:
            c += (x - t) + s
        s = t
        out[i] = s + c
    return out


def partial_sums_at(terms: np.ndarray, cutoffs: Sequence[int]) -> list[float]:
    """``S(N) = sum(terms[: N + 1])`` for each cutoff, with exactly rounded block sums."""
    out = []
    blocks = []
    prev = 0
    for n in cutoffs:
        if n + 1 > len(terms):
            raise ValueError(f"cutoff {n} exceeds the available range {len(terms) - 1}")
        blocks.append(math.fsum(terms[prev:n + 1].tolist()))
        prev = n + 1
        out.append(math.fsum(blocks))
    return out


def dyadic_schedule(max_cutoff: int, start: int = 16, min_levels: int = 4) -> list[int]:
    sched = []
    n = start
    while n <= max_cutoff:
        sched.append(n)
        n *= 2
    if not sched or sched[-1] != max_cutoff:
        sched.append(max_cutoff)
    n = start // 2
    while len(sched) < min_levels and n >= 1:
        sched.insert(0, n)
        n //= 2
    return sched


def arithmetic_schedule(max_cutoff: int, levels: int = 8) -> list[int]:
    pts = sorted({int(round(max_cutoff * j / levels)) for j in range(1, levels + 1)})
    return [p for p in pts if p >= 1]


def fit_verdict(
    cutoffs: Sequence[int],
    sums: Sequence[float],
    rel_tol: float = 1e-3,
    band: float = 0.05,
    min_slope: float = 0.05,
) -> tuple[Verdict, list[float], float, float | None]:
    """Classify a schedule of partial sums. Returns (verdict, ratios, slope, limit estimate)."""
    cutoffs = list(cutoffs)
    sums = [float(s) for s in sums]
    if len(sums) < 3:
        return Verdict.INCONCLUSIVE, [], float("nan"), None
    inc = [b - a for a, b in zip(sums, sums[1:])]
    ratios = []
    for a, b in zip(inc, inc[1:]):
        ratios.append(b / a if a > 0 else (0.0 if b <= 0 else math.inf))

    pos = [(n, s) for n, s in zip(cutoffs, sums) if n > 0 and s > 0]
    if len(pos) >= 2:
        x = np.log([n for n, _ in pos])
        y = np.log([s for _, s in pos])
        slope = float(np.polyfit(x, y, 1)[0])
    else:
        slope = float("nan")

    limit = None
    flat = all(inc[-k] <= rel_tol * sums[-k - 1] for k in (1, 2)) if len(inc) >= 2 else False
    last = ratios[-2:]
    if flat or (len(last) == 2 and all(r <= 1 - band for r in last)):
        r = ratios[-1] if ratios else 0.0
        limit = sums[-1] + (inc[-1] * r / (1 - r) if 0 < r < 1 else 0.0)
        return Verdict.CONVERGES, ratios, slope, limit
    if len(last) == 2 and all(r >= 1 + band for r in last) and slope > min_slope:
        return Verdict.DIVERGES, ratios, slope, None
    return Verdict.INCONCLUSIVE, ratios, slope, None
