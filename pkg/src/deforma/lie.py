"""Unitary duals of a few compact connected Lie groups.

Irreducible representations are labelled by highest weights, written as an
integer "central" part (characters of the torus factor) and a nonnegative
"dominant" part (coordinates in the fundamental weights of the semisimple
factor). Dimensions and Casimir eigenvalues are exact (``int``/``Fraction``).

Casimir normalizations::

    Torus(n)  sum m_i^2
    SU2       b (b + 2)
    SO3       4 b (b + 1)   (the SU2 value at highest weight 2b)
    SU3       p^2 + q^2 + pq + 3p + 3q
    Product   sum over the factors
"""
from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "LieGroupSpec",
    "Torus",
    "SU2",
    "SU3",
    "SO3",
    "Product",
    "IrrepLabel",
    "IrrepData",
    "UnsupportedGroupError",
    "parse_lie_group",
    "enumerate_dual",
    "weyl_dimension",
    "casimir_eigenvalue",
    "one_norm",
    "equivalence_constants",
    "shell_dim_squares",
    "dual_to_csv",
    "dual_to_json",
]


class UnsupportedGroupError(ValueError):
    pass


@dataclass(frozen=True)
class IrrepLabel:
    central_part: tuple[int, ...] = ()
    dominant_part: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "central_part", tuple(int(a) for a in self.central_part))
        object.__setattr__(self, "dominant_part", tuple(int(b) for b in self.dominant_part))
        if any(b < 0 for b in self.dominant_part):
            raise ValueError(f"dominant part must be nonnegative, got {self.dominant_part}")

    @property
    def is_trivial(self) -> bool:
        return not any(self.central_part) and not any(self.dominant_part)

    def __str__(self):
        return f"({','.join(map(str, self.central_part))};{','.join(map(str, self.dominant_part))})"


@dataclass(frozen=True)
class IrrepData:
    label: IrrepLabel
    dim: int
    casimir: Fraction
    one_norm: int


class LieGroupSpec:
    """Base class. ``rank`` is (central rank r, semisimple rank l)."""

    real_dimension: int
    rank: tuple[int, int]

    def factors(self) -> tuple["LieGroupSpec", ...]:
        return (self,)

    @property
    def name(self) -> str:
        return {"SU2": "SU(2)", "SO3": "SO(3)", "SU3": "SU(3)"}[type(self).__name__]


@dataclass(frozen=True)
class Torus(LieGroupSpec):
    n: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("torus dimension must be positive")

    @property
    def real_dimension(self):
        return self.n

    @property
    def name(self):
        return f"Torus({self.n})"

    @property
    def rank(self):
        return (self.n, 0)


@dataclass(frozen=True)
class SU2(LieGroupSpec):
    real_dimension = 3
    rank = (0, 1)


@dataclass(frozen=True)
class SO3(LieGroupSpec):
    real_dimension = 3
    rank = (0, 1)


@dataclass(frozen=True)
class SU3(LieGroupSpec):
    real_dimension = 8
    rank = (0, 2)


@dataclass(frozen=True)
class Product(LieGroupSpec):
    parts: tuple[LieGroupSpec, ...]

    def __post_init__(self):
        flat: list[LieGroupSpec] = []
        for p in self.parts:
            if not isinstance(p, LieGroupSpec):
                raise UnsupportedGroupError(f"unsupported group {p!r}")
            flat.extend(p.factors())
        if not flat:
            raise ValueError("empty product")
        object.__setattr__(self, "parts", tuple(flat))

    def factors(self):
        return self.parts

    @property
    def name(self):
        return " x ".join(p.name for p in self.parts)

    @property
    def real_dimension(self):
        return sum(p.real_dimension for p in self.parts)

    @property
    def rank(self):
        return (sum(p.rank[0] for p in self.parts), sum(p.rank[1] for p in self.parts))


_SIMPLE = (Torus, SU2, SO3, SU3)


def parse_lie_group(text: str) -> LieGroupSpec:
    """Parse ``su2``, ``so3``, ``su3``, ``torus:2`` / ``t2``, or ``su2*torus:1``."""
    parts = [p.strip().lower() for p in text.split("*") if p.strip()]
    if not parts:
        raise UnsupportedGroupError(f"unsupported group {text!r}")
    groups = []
    for p in parts:
        if p == "su2":
            groups.append(SU2())
        elif p == "so3":
            groups.append(SO3())
        elif p == "su3":
            groups.append(SU3())
        elif p.startswith("torus") or p.startswith("t"):
            digits = p.split(":", 1)[1] if ":" in p else p.lstrip("torus") or "1"
            try:
                groups.append(Torus(int(digits)))
            except ValueError:
                raise UnsupportedGroupError(f"unsupported group {text!r}") from None
        else:
            raise UnsupportedGroupError(f"unsupported group {text!r}")
    return groups[0] if len(groups) == 1 else Product(tuple(groups))


def _check_group(group) -> None:
    if isinstance(group, Product):
        return
    if not isinstance(group, _SIMPLE):
        raise UnsupportedGroupError(f"unsupported group {group!r}")


def _check_label(group: LieGroupSpec, label: IrrepLabel) -> None:
    r, l = group.rank
    if len(label.central_part) != r or len(label.dominant_part) != l:
        raise ValueError(
            f"label {label} has shape ({len(label.central_part)}, {len(label.dominant_part)}),"
            f" expected ({r}, {l}) for {group}"
        )


def _split(group: Product, label: IrrepLabel) -> Iterator[tuple[LieGroupSpec, IrrepLabel]]:
    ci = di = 0
    for f in group.parts:
        r, l = f.rank
        yield f, IrrepLabel(label.central_part[ci:ci + r], label.dominant_part[di:di + l])
        ci += r
        di += l


def one_norm(label: IrrepLabel) -> int:
    return sum(abs(a) for a in label.central_part) + sum(label.dominant_part)


def weyl_dimension(group: LieGroupSpec, label: IrrepLabel) -> int:
    _check_group(group)
    _check_label(group, label)
    if isinstance(group, Product):
        d = 1
        for f, lab in _split(group, label):
            d *= weyl_dimension(f, lab)
        return d
    if isinstance(group, Torus):
        return 1
    if isinstance(group, SU2):
        return label.dominant_part[0] + 1
    if isinstance(group, SO3):
        return 2 * label.dominant_part[0] + 1
    p, q = label.dominant_part
    return (p + 1) * (q + 1) * (p + q + 2) // 2


def casimir_eigenvalue(group: LieGroupSpec, label: IrrepLabel) -> Fraction:
    _check_group(group)
    _check_label(group, label)
    if isinstance(group, Product):
        return sum((casimir_eigenvalue(f, lab) for f, lab in _split(group, label)), Fraction(0))
    if isinstance(group, Torus):
        return Fraction(sum(a * a for a in label.central_part))
    if isinstance(group, SU2):
        b = label.dominant_part[0]
        return Fraction(b * (b + 2))
    if isinstance(group, SO3):
        b = 2 * label.dominant_part[0]
        return Fraction(b * (b + 2))
    p, q = label.dominant_part
    return Fraction(p * p + q * q + p * q + 3 * p + 3 * q)


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Nonnegative integer vectors of length ``parts`` summing to ``total``."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _labels_with_norm(r: int, l: int, n: int) -> Iterator[IrrepLabel]:
    lo = n if l == 0 else 0
    hi = 0 if r == 0 else n
    for split in range(lo, hi + 1):
        # |a|_1 = split, |b|_1 = n - split
        for absa in _compositions(split, r):
            nz = [i for i, a in enumerate(absa) if a]
            for signs in itertools.product((1, -1), repeat=len(nz)):
                a = list(absa)
                for i, s in zip(nz, signs):
                    a[i] *= s
                for b in _compositions(n - split, l):
                    yield IrrepLabel(tuple(a), b)


def enumerate_dual(group: LieGroupSpec, cutoff: int) -> list[IrrepData]:
    """All irreducible representations with ``one_norm <= cutoff``, by increasing norm."""
    _check_group(group)
    if cutoff < 0:
        raise ValueError("cutoff must be nonnegative")
    r, l = group.rank
    out = []
    for n in range(cutoff + 1):
        for lab in _labels_with_norm(r, l, n):
            out.append(IrrepData(lab, weyl_dimension(group, lab), casimir_eigenvalue(group, lab), n))
    return out


def equivalence_constants(group: LieGroupSpec, cutoff: int) -> tuple[Fraction, Fraction]:
    """Empirical extremes of ``casimir / one_norm**2`` over nontrivial irreps up to ``cutoff``."""
    if cutoff < 1:
        raise ValueError("cutoff must be at least 1 (no nontrivial irreps otherwise)")
    lo = hi = None
    for irr in enumerate_dual(group, cutoff):
        if irr.one_norm == 0:
            continue
        ratio = irr.casimir / (irr.one_norm ** 2)
        lo = ratio if lo is None or ratio < lo else lo
        hi = ratio if hi is None or ratio > hi else hi
    return lo, hi


def _torus_shell(n: int, cutoff: int) -> np.ndarray:
    # number of points of Z^n with l1-norm k: sum_j 2^j C(n, j) C(k-1, j-1)
    out = np.zeros(cutoff + 1)
    out[0] = 1.0
    for k in range(1, cutoff + 1):
        out[k] = float(sum(2 ** j * comb(n, j) * comb(k - 1, j - 1) for j in range(1, min(n, k) + 1)))
    return out


def shell_dim_squares(group: LieGroupSpec, cutoff: int) -> np.ndarray:
    """``out[k] = sum of dim(pi)^2 over irreps with one_norm == k``, for k <= cutoff.

    Computed factor by factor (closed forms) and combined by convolution, so
    large cutoffs never enumerate labels.
    """
    _check_group(group)
    k = np.arange(cutoff + 1, dtype=float)
    result = None
    for f in group.factors():
        if isinstance(f, Torus):
            shell = _torus_shell(f.n, cutoff)
        elif isinstance(f, SU2):
            shell = (k + 1) ** 2
        elif isinstance(f, SO3):
            shell = (2 * k + 1) ** 2
        elif isinstance(f, SU3):
            # sum over p + q = k of ((p+1)(q+1)(k+2)/2)^2
            sq = (k + 1) ** 2
            conv = np.convolve(sq, sq)[: cutoff + 1]
            shell = conv * (k + 2) ** 2 / 4.0
        else:
            raise UnsupportedGroupError(f"unsupported group {f!r}")
        result = shell if result is None else np.convolve(result, shell)[: cutoff + 1]
    return result


def dual_to_csv(irreps: Sequence[IrrepData]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label", "dim", "casimir", "one_norm"])
    for irr in irreps:
        w.writerow([str(irr.label), irr.dim, str(irr.casimir), irr.one_norm])
    return buf.getvalue()


def dual_to_json(irreps: Sequence[IrrepData]) -> str:
    rows = [
        {
            "central_part": list(irr.label.central_part),
            "dominant_part": list(irr.label.dominant_part),
            "dim": irr.dim,
            "casimir": str(irr.casimir),
            "one_norm": irr.one_norm,
        }
        for irr in irreps
    ]
    return json.dumps(rows)
