"""Word growth of finitely generated groups and radial deformation functions.

Sphere counts come from one of three independent sources:

* ``closed``: closed forms (free abelian, cyclic, dihedral, free groups, and the
  rational growth series of a right-angled Coxeter group);
* ``automaton``: a layered count over the finite automaton accepting the
  normal forms (reduced words for free groups, shortlex words for right-angled
  Coxeter groups), which is exact at depths where the balls cannot be stored;
* ``enumerate``: breadth-first search over explicit normal forms, capped at
  ``10**7`` stored elements.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Hashable, Iterable

import numpy as np

from .summability import (
    SummabilityVerdict,
    arithmetic_schedule,
    dyadic_schedule,
    fit_verdict,
    neumaier_cumsum,
)

__all__ = [
    "FGGroupSpec",
    "FreeAbelian",
    "FreeGroup",
    "Dihedral",
    "RightAngledCoxeter",
    "Cyclic",
    "BallTable",
    "EnumerationCapError",
    "Exponential",
    "Polynomial",
    "DeformationFunction",
    "parse_family",
    "parse_deformation",
    "read_adjacency_list",
    "ball_sizes",
    "ball_elements",
    "poly_order_fit",
    "exp_rate",
    "ExpRateProfile",
    "exp_rate_profile",
    "eval_deformation",
    "l2_tail_sum",
    "growth_summability_verdict",
    "summation_by_parts_check",
    "DEFAULT_CAP",
]

DEFAULT_CAP = 10 ** 7


class EnumerationCapError(RuntimeError):
    def __init__(self, cap: int, needed: int | None = None):
        msg = f"ball enumeration exceeds the feasibility cap of {cap} elements"
        if needed is not None:
            msg += f" (needs {needed})"
        super().__init__(msg)
        self.cap = cap


# ---------------------------------------------------------------- families


class FGGroupSpec:
    """Finitely generated group with a symmetric generating set and exact normal forms."""

    name: str = "group"

    @property
    def identity(self) -> Hashable:
        raise NotImplementedError

    def generators(self) -> list:
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def length(self, a) -> int:
        raise NotImplementedError

    def closed_spheres(self, N: int) -> list[int] | None:
        return None

    def automaton(self):
        """(start state, transition function state -> iterable of next states) or None."""
        return None

    # growth classification: ("finite" | "polynomial" | "exponential", degree or rate)
    def growth_kind(self) -> tuple[str, float]:
        raise NotImplementedError

    @property
    def is_abelian(self) -> bool:
        return False


@dataclass(frozen=True)
class FreeAbelian(FGGroupSpec):
    n: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("rank must be positive")

    @property
    def name(self):
        return f"Z^{self.n}"

    @property
    def identity(self):
        return (0,) * self.n

    def generators(self):
        out = []
        for i in range(self.n):
            for s in (1, -1):
                e = [0] * self.n
                e[i] = s
                out.append(tuple(e))
        return out

    def mul(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def inv(self, a):
        return tuple(-x for x in a)

    def length(self, a):
        return sum(abs(x) for x in a)

    def closed_spheres(self, N):
        out = [1]
        for k in range(1, N + 1):
            out.append(sum(2 ** j * math.comb(self.n, j) * math.comb(k - 1, j - 1) for j in range(1, min(self.n, k) + 1)))
        return out

    def growth_kind(self):
        return ("polynomial", float(self.n))

    @property
    def is_abelian(self):
        return True


@dataclass(frozen=True)
class FreeGroup(FGGroupSpec):
    """Free group on ``k`` letters; words are tuples of nonzero ints (``-i`` is the inverse of ``i``)."""

    k: int = 2

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("rank must be positive")

    @property
    def name(self):
        return f"F{self.k}"

    @property
    def identity(self):
        return ()

    def generators(self):
        return [(s * i,) for i in range(1, self.k + 1) for s in (1, -1)]

    def mul(self, a, b):
        w = list(a)
        for x in b:
            if w and w[-1] == -x:
                w.pop()
            else:
                w.append(x)
        return tuple(w)

    def inv(self, a):
        return tuple(-x for x in reversed(a))

    def length(self, a):
        return len(a)

    def closed_spheres(self, N):
        k = self.k
        return [1] + [2 * k * (2 * k - 1) ** (n - 1) for n in range(1, N + 1)]

    def automaton(self):
        letters = list(range(1, self.k + 1)) + [-i for i in range(1, self.k + 1)]

        def step(state):
            return [x for x in letters if state is None or x != -state]

        return None, step

    def growth_kind(self):
        if self.k == 1:
            return ("polynomial", 1.0)
        return ("exponential", float(2 * self.k - 1))

    @property
    def is_abelian(self):
        return self.k == 1


@dataclass(frozen=True)
class Cyclic(FGGroupSpec):
    n: int = 2

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("order must be positive")

    @property
    def name(self):
        return f"Z{self.n}"

    @property
    def identity(self):
        return 0

    def generators(self):
        return sorted({1, self.n - 1}) if self.n > 1 else []

    def mul(self, a, b):
        return (a + b) % self.n

    def inv(self, a):
        return (-a) % self.n

    def length(self, a):
        return min(a % self.n, (-a) % self.n)

    def closed_spheres(self, N):
        n = self.n
        out = [1]
        for j in range(1, N + 1):
            if 2 * j < n:
                out.append(2)
            elif 2 * j == n:
                out.append(1)
            else:
                out.append(0)
        return out

    def growth_kind(self):
        return ("finite", 0.0)

    @property
    def is_abelian(self):
        return True


@dataclass(frozen=True)
class Dihedral(FGGroupSpec):
    """Dihedral Coxeter group ``<s, t | s^2, t^2, (st)^m>``; ``m=None`` is the infinite one.

    Elements are affine maps ``x -> eps x + k`` (``k`` mod ``m`` when finite),
    with ``s = (-1, 0)`` and ``t = (-1, 1)``.
    """

    m: int | None = None

    def __post_init__(self):
        if self.m is not None and self.m < 2:
            raise ValueError("dihedral order parameter must be >= 2")

    @property
    def name(self):
        return "D_inf" if self.m is None else f"D{self.m}"

    def _red(self, k):
        return k if self.m is None else k % self.m

    @property
    def identity(self):
        return (1, 0)

    def generators(self):
        return [(-1, 0), (-1, self._red(1))]

    def mul(self, a, b):
        (e1, k1), (e2, k2) = a, b
        return (e1 * e2, self._red(e1 * k2 + k1))

    def inv(self, a):
        e, k = a
        return (e, self._red(-e * k))

    @cached_property
    def _finite_lengths(self):
        return _bfs_lengths(self)

    def length(self, a):
        if self.m is None:
            e, k = a
            return 2 * abs(k) if e == 1 else abs(2 * k - 1)
        return self._finite_lengths[a]

    def closed_spheres(self, N):
        out = [1]
        for n in range(1, N + 1):
            if self.m is None or n < self.m:
                out.append(2)
            elif n == self.m:
                out.append(1)
            else:
                out.append(0)
        return out

    def growth_kind(self):
        return ("polynomial", 1.0) if self.m is None else ("finite", 0.0)

    @property
    def is_abelian(self):
        return self.m == 2


def _bfs_lengths(group: FGGroupSpec) -> dict:
    dist = {group.identity: 0}
    frontier = [group.identity]
    while frontier:
        nxt = []
        for g in frontier:
            for s in group.generators():
                h = group.mul(g, s)
                if h not in dist:
                    dist[h] = dist[g] + 1
                    nxt.append(h)
        frontier = nxt
    return dist


@dataclass(frozen=True)
class RightAngledCoxeter(FGGroupSpec):
    """Right-angled Coxeter group of a simple graph on vertices ``0..n-1``.

    Generators are involutions; adjacent ones commute.  Elements are shortlex
    normal forms (tuples of vertex indices).
    """

    n_vertices: int
    edges: frozenset = frozenset()
    vertex_names: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.n_vertices < 1:
            raise ValueError("graph must have at least one vertex")
        es = set()
        for e in self.edges:
            a, b = tuple(e) if len(tuple(e)) == 2 else (None, None)
            if a is None or a == b:
                raise ValueError(f"graph must be simple and loop-free (bad edge {e!r})")
            if not (0 <= a < self.n_vertices and 0 <= b < self.n_vertices):
                raise ValueError(f"edge {e!r} references a missing vertex")
            es.add(frozenset((a, b)))
        object.__setattr__(self, "edges", frozenset(es))

    @property
    def name(self):
        return f"RACG({self.n_vertices}, {len(self.edges)} edges)"

    @cached_property
    def _adj(self) -> list[set[int]]:
        adj = [set() for _ in range(self.n_vertices)]
        for e in self.edges:
            a, b = tuple(e)
            adj[a].add(b)
            adj[b].add(a)
        return adj

    @property
    def identity(self):
        return ()

    def generators(self):
        return [(v,) for v in range(self.n_vertices)]

    def append(self, word: tuple[int, ...], s: int) -> tuple[int, ...]:
        """Normal form of ``word * s`` for a normal-form ``word``."""
        adj = self._adj[s]
        j = len(word)
        while j > 0 and word[j - 1] in adj:
            j -= 1
        # word[j:] commutes with s; a copy of s just before it cancels
        if j > 0 and word[j - 1] == s:
            return word[: j - 1] + word[j:]
        for q in range(j, len(word)):
            if word[q] > s:
                return word[:q] + (s,) + word[q:]
        return word + (s,)

    def mul(self, a, b):
        w = tuple(a)
        for s in b:
            w = self.append(w, s)
        return w

    def inv(self, a):
        return self.mul((), tuple(reversed(a)))

    def normal_form(self, letters: Iterable[int]) -> tuple[int, ...]:
        return self.mul((), tuple(letters))

    def length(self, a):
        return len(a)

    @cached_property
    def cliques(self) -> list[tuple[int, ...]]:
        out = [()]

        def grow(clique, candidates):
            for i, v in enumerate(candidates):
                c = clique + (v,)
                out.append(c)
                grow(c, [u for u in candidates[i + 1:] if u in self._adj[v]])

        grow((), list(range(self.n_vertices)))
        return out

    @cached_property
    def _series(self) -> tuple[list[int], list[int]]:
        # W(t) = (1+t)^w / sum_C (-t)^|C| (1+t)^(w-|C|), w = clique number
        w = max(len(c) for c in self.cliques)
        num = [math.comb(w, i) for i in range(w + 1)]
        den = [0] * (w + 1)
        for c in self.cliques:
            k = len(c)
            for i in range(w - k + 1):
                den[k + i] += (-1) ** k * math.comb(w - k, i)
        return num, den

    def closed_spheres(self, N):
        num, den = self._series
        out = []
        for n in range(N + 1):
            acc = num[n] if n < len(num) else 0
            for i in range(1, min(n, len(den) - 1) + 1):
                acc -= den[i] * out[n - i]
            out.append(acc)  # den[0] == 1
        return out

    def automaton(self):
        keep = [0] * self.n_vertices
        setm = [0] * self.n_vertices
        for x in range(self.n_vertices):
            star = self._adj[x] | {x}
            keep[x] = sum(1 << a for a in star)
            setm[x] = (1 << x) | sum(1 << a for a in self._adj[x] if a < x)

        def step(flags):
            return [(flags & keep[x]) | setm[x] for x in range(self.n_vertices) if not flags >> x & 1]

        return 0, step

    def growth_kind(self):
        num, den = self._series
        roots = np.roots(den[::-1]) if len(den) > 1 and any(den[1:]) else np.array([])
        if roots.size == 0:
            return ("finite", 0.0)
        rmin = float(np.min(np.abs(roots)))
        if rmin < 1 - 1e-9:
            return ("exponential", 1.0 / rmin)
        # finite iff the series is a polynomial: pole order at t = 1 gives the degree
        close = np.sum(np.abs(roots - 1.0) < 1e-6)
        if close == 0 and rmin > 1 + 1e-9:
            return ("finite", 0.0)
        return ("polynomial", float(close))

    @property
    def is_abelian(self):
        return len(self.edges) == self.n_vertices * (self.n_vertices - 1) // 2


def read_adjacency_list(path_or_text: str | Path) -> RightAngledCoxeter:
    """Parse a graph in adjacency-list form.

    One vertex per line: ``name: neighbour neighbour ...`` (the colon is
    optional; the first token names the vertex).  Blank lines and ``#``
    comments are ignored; edges may be listed from either end.
    """
    if isinstance(path_or_text, Path) or ("\n" not in path_or_text and Path(path_or_text).is_file()):
        text = Path(path_or_text).read_text()
    else:
        text = str(path_or_text)
    names: list[str] = []
    pairs = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" in line:
            head, _, rest = line.partition(":")
            v, nbrs = head.strip(), rest.split()
        else:
            v, *nbrs = line.split()
        for name in [v] + nbrs:
            if name not in names:
                names.append(name)
        for u in nbrs:
            if u == v:
                raise ValueError(f"loop at vertex {v!r}")
            pairs.append((names.index(v), names.index(u)))
    if not names:
        raise ValueError("empty graph")
    return RightAngledCoxeter(len(names), frozenset(frozenset(e) for e in pairs), tuple(names))


def parse_family(text: str, graph: str | Path | None = None) -> FGGroupSpec:
    """``free:2``, ``abelian:3`` (alias ``zn:3``), ``cyclic:5``, ``dihedral:inf``/``dihedral:6``, ``racg:<file>``."""
    kind, _, arg = text.strip().lower().partition(":")
    try:
        if kind == "free":
            return FreeGroup(int(arg or 2))
        if kind in ("abelian", "zn", "z"):
            return FreeAbelian(int(arg or 1))
        if kind == "cyclic":
            return Cyclic(int(arg))
        if kind == "dihedral":
            return Dihedral(None if arg in ("", "inf", "infinite") else int(arg))
        if kind == "racg":
            src = graph if graph is not None else text.strip().partition(":")[2]
            return read_adjacency_list(Path(src))
    except (TypeError, ValueError) as exc:
        raise ValueError(f"bad group family {text!r}: {exc}") from None
    raise ValueError(f"unknown group family {text!r}")


# ---------------------------------------------------------------- balls


@dataclass
class BallTable:
    spheres: list[int]
    balls: list[int] = field(default_factory=list)

    def __post_init__(self):
        self.spheres = [int(c) for c in self.spheres]
        if not self.spheres or self.spheres[0] != 1:
            raise ValueError("c_0 must be 1")
        if any(c < 0 for c in self.spheres):
            raise ValueError("sphere counts must be nonnegative")
        acc, balls = 0, []
        for c in self.spheres:
            acc += c
            balls.append(acc)
        if self.balls and [int(b) for b in self.balls] != balls:
            raise ValueError("balls must be cumulative sums of spheres")
        self.balls = balls

    @property
    def depth(self) -> int:
        return len(self.spheres) - 1


def _automaton_counts(group: FGGroupSpec, N: int) -> list[int]:
    start, step = group.automaton()
    layer = {start: 1}
    out = [1]
    for _ in range(N):
        nxt: dict = {}
        for state, cnt in layer.items():
            for s2 in step(state):
                nxt[s2] = nxt.get(s2, 0) + cnt
        layer = nxt
        out.append(sum(layer.values()))
    return out


def ball_elements(
    group: FGGroupSpec, N: int, cap: int = DEFAULT_CAP, stop_when_empty: bool = False
) -> list[list]:
    """Breadth-first spheres of explicit normal forms, ``out[n]`` = elements of length ``n``.

    With ``stop_when_empty`` the list ends at the last nonempty sphere.
    """
    seen = {group.identity}
    spheres = [[group.identity]]
    gens = group.generators()
    for _ in range(N):
        nxt = []
        for g in spheres[-1]:
            for s in gens:
                h = group.mul(g, s)
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
                    if len(seen) > cap:
                        raise EnumerationCapError(cap)
        if not nxt and stop_when_empty:
            break
        spheres.append(nxt)
    return spheres


def ball_sizes(group: FGGroupSpec, N: int, method: str = "auto", cap: int = DEFAULT_CAP) -> BallTable:
    """Exact sphere and ball counts up to length ``N``."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    if method == "auto":
        method = "automaton" if group.automaton() is not None else "closed"
    if method == "closed":
        spheres = group.closed_spheres(N)
        if spheres is None:
            raise ValueError(f"no closed form for {group.name}")
    elif method == "automaton":
        if group.automaton() is None:
            raise ValueError(f"no normal-form automaton for {group.name}")
        spheres = _automaton_counts(group, N)
    elif method == "enumerate":
        est = group.closed_spheres(N)
        if est is not None and sum(est) > cap:
            raise EnumerationCapError(cap, sum(est))
        spheres = [len(s) for s in ball_elements(group, N, cap)]
    else:
        raise ValueError(f"unknown method {method!r}")
    return BallTable(spheres)


def _check_points(table: BallTable):
    if len(table.spheres) < 8:
        raise ValueError("need at least 8 data points (depth >= 7)")


def poly_order_fit(table: BallTable) -> float:
    """Least-squares slope of ``log b_n`` against ``log n`` over the upper half of ``n``."""
    _check_points(table)
    N = table.depth
    ns = np.arange(max(1, (N + 1) // 2), N + 1)
    y = np.log(np.array([table.balls[n] for n in ns], dtype=float))
    return float(np.polyfit(np.log(ns), y, 1)[0])


@dataclass
class ExpRateProfile:
    rate: float
    terminal_root: float
    fekete_profile: list[float]


def exp_rate_profile(table: BallTable) -> ExpRateProfile:
    """Growth-rate estimates.

    ``rate`` is the block root ``(b_N / b_M)^(1/(N-M))`` with ``M = ceil(N/2)``;
    ``terminal_root`` is ``b_N^(1/N)``; ``fekete_profile`` is the running minimum
    of ``b_n^(1/n)``, an upper bound for the limit by submultiplicativity.
    """
    _check_points(table)
    N = table.depth
    M = (N + 1) // 2
    logs = [math.log(b) for b in table.balls]
    roots = [math.exp(logs[n] / n) for n in range(1, N + 1)]
    profile = list(np.minimum.accumulate(roots))
    rate = math.exp((logs[N] - logs[M]) / (N - M))
    return ExpRateProfile(rate, roots[-1], [float(x) for x in profile])


def exp_rate(table: BallTable) -> float:
    return exp_rate_profile(table).rate


# ---------------------------------------------------------------- deformations


@dataclass(frozen=True)
class Exponential:
    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError("t must be positive")

    def __call__(self, length):
        return np.exp(-self.t * np.asarray(length, dtype=float))


@dataclass(frozen=True)
class Polynomial:
    alpha: float
    M: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.M >= 1:
            raise ValueError("M must be at least 1")

    def __call__(self, length):
        return 1.0 / (self.M * (1.0 + np.asarray(length, dtype=float)) ** self.alpha)


DeformationFunction = Exponential | Polynomial


def parse_deformation(text: str) -> DeformationFunction:
    """``exp:0.6`` or ``poly:1.2`` (optionally ``poly:1.2:M``)."""
    kind, _, rest = text.strip().lower().partition(":")
    try:
        vals = [float(x) for x in rest.split(":") if x]
        if kind in ("exp", "exponential") and len(vals) == 1:
            return Exponential(vals[0])
        if kind in ("poly", "polynomial") and len(vals) in (1, 2):
            return Polynomial(*vals)
    except ValueError as exc:
        raise ValueError(f"bad deformation {text!r}: {exc}") from None
    raise ValueError(f"bad deformation {text!r}; expected exp:<t> or poly:<alpha>")


def eval_deformation(w: DeformationFunction, length: int) -> float:
    if length < 0:
        raise ValueError("length must be nonnegative")
    return float(w(length))


def l2_tail_sum(group: FGGroupSpec, w: DeformationFunction, N: int, table: BallTable | None = None) -> list[tuple[int, float]]:
    """Partial sums ``sum_{|g| <= n} w(g)^2`` for ``n = 0..N`` (radial ``w``)."""
    table = table if table is not None and table.depth >= N else ball_sizes(group, N)
    c = np.array([float(x) for x in table.spheres[: N + 1]])
    terms = c * w(np.arange(N + 1)) ** 2
    return list(zip(range(N + 1), neumaier_cumsum(terms).tolist()))


def growth_summability_verdict(group: FGGroupSpec, w: DeformationFunction, N: int) -> SummabilityVerdict:
    """Same cut rules as the dual verdict; schedule dyadic for polynomial ``w``, arithmetic for exponential."""
    if N < 16:
        raise ValueError("N must be at least 16")
    table = ball_sizes(group, N)
    sums = [s for _, s in l2_tail_sum(group, w, N, table)]
    sched = dyadic_schedule(N) if isinstance(w, Polynomial) else arithmetic_schedule(N)
    verdict, ratios, slope, limit = fit_verdict(sched, [sums[n] for n in sched])
    kind, _ = group.growth_kind()
    if isinstance(w, Polynomial):
        if kind == "exponential":
            threshold = math.inf
        else:
            threshold = round(poly_order_fit(table)) / 2.0 if kind == "polynomial" else 0.0
        param = w.alpha
    else:
        threshold = math.log(exp_rate(table)) / 2.0 if kind == "exponential" else 0.0
        param = w.t
    return SummabilityVerdict(
        partial_sums=[(n, sums[n]) for n in sched],
        verdict=verdict,
        threshold=threshold,
        alpha=float(param),
        increment_ratios=ratios,
        slope=slope,
        limit_estimate=limit,
    )


def summation_by_parts_check(table: BallTable, alpha: float, N: int) -> float:
    if N > table.depth:
        raise ValueError("N exceeds the table depth")
    p = -2.0 * alpha
    lhs = math.fsum(table.spheres[n] * (1.0 + n) ** p for n in range(N + 1))
    rhs = math.fsum(
        [table.balls[N] * (1.0 + N) ** p]
        + [table.balls[n] * ((n + 1.0) ** p - (n + 2.0) ** p) for n in range(N)]
    )
    return abs(lhs - rhs)
