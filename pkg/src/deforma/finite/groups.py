"""Finite group models: multiplication table plus a complete set of unitary irreps."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Hashable, Sequence

import numpy as np

__all__ = [
    "Irrep",
    "FiniteGroupModel",
    "GroupModelError",
    "cyclic",
    "dihedral",
    "symmetric",
    "quaternion",
    "builtin",
    "BUILTIN_NAMES",
    "load_model",
    "save_model",
]

_TOL = 1e-12


class GroupModelError(ValueError):
    pass


@dataclass
class Irrep:
    """Unitary irrep; ``matrices[g]`` is the ``dim x dim`` matrix of element ``g``."""

    matrices: np.ndarray
    name: str = ""

    def __post_init__(self):
        self.matrices = np.asarray(self.matrices, dtype=complex)
        if self.matrices.ndim != 3 or self.matrices.shape[1] != self.matrices.shape[2]:
            raise GroupModelError("irrep matrices must have shape (order, d, d)")

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]


@dataclass
class FiniteGroupModel:
    """Finite group with identity at index 0.

    ``generators`` (optional) is a symmetric generating set used for word lengths.
    Construction validates the group law and the irreps (unitarity,
    homomorphism, Schur orthogonality, ``sum d^2 = order``).
    """

    mult_table: np.ndarray
    irreps: list[Irrep]
    name: str = "G"
    labels: list[str] | None = None
    generators: list[int] | None = None
    inverse_table: np.ndarray = field(init=False)

    def __post_init__(self):
        t = np.asarray(self.mult_table, dtype=np.int64)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
            raise GroupModelError("multiplication table must be a nonempty square array")
        n = t.shape[0]
        if t.min() < 0 or t.max() >= n:
            raise GroupModelError("table entries out of range")
        self.mult_table = t
        self._check_group_law()
        self._check_irreps()
        if self.generators is not None:
            gens = [int(s) for s in self.generators]
            if set(self.inverse_table[gens].tolist()) != set(gens):
                raise GroupModelError("generating set must be symmetric")
            self.generators = gens

    @property
    def order(self) -> int:
        return self.mult_table.shape[0]

    @property
    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mult_table, self.mult_table.T))

    def _check_group_law(self):
        t = self.mult_table
        n = t.shape[0]
        ar = np.arange(n)
        if not (np.array_equal(t[0], ar) and np.array_equal(t[:, 0], ar)):
            raise GroupModelError("index 0 must be the identity")
        for row in t:
            if len(np.unique(row)) != n:
                raise GroupModelError("each row of the table must be a permutation")
        # (ab)c == a(bc)
        if not np.array_equal(t[t], t[ar[:, None, None], t[None, :, :]]):
            raise GroupModelError("multiplication table is not associative")
        inv = np.argmax(t == 0, axis=1)
        if not np.all(t[ar, inv] == 0):
            raise GroupModelError("missing inverses")
        self.inverse_table = inv

    def _check_irreps(self):
        n = self.order
        t = self.mult_table
        if sum(p.dim ** 2 for p in self.irreps) != n:
            raise GroupModelError("sum of squared irrep dimensions must equal the order")
        cols = []
        for k, p in enumerate(self.irreps):
            m = p.matrices
            if m.shape[0] != n:
                raise GroupModelError(f"irrep {k} has {m.shape[0]} matrices, expected {n}")
            eye = np.eye(p.dim)
            if np.abs(np.einsum("gij,gkj->gik", m, m.conj()) - eye).max() > _TOL:
                raise GroupModelError(f"irrep {k} is not unitary")
            prod = np.einsum("aij,bjk->abik", m, m)
            if np.abs(prod - m[t]).max() > 1e-10:
                raise GroupModelError(f"irrep {k} is not a homomorphism")
            cols.append(m.reshape(n, -1))
        phi = np.concatenate(cols, axis=1)
        gram = phi.conj().T @ phi / n
        expected = np.diag(np.concatenate([np.full(p.dim ** 2, 1.0 / p.dim) for p in self.irreps]))
        if np.abs(gram - expected).max() > _TOL:
            raise GroupModelError("irreps fail Schur orthogonality (inequivalent, irreducible)")

    def word_lengths(self) -> np.ndarray:
        if self.generators is None:
            raise GroupModelError(f"{self.name} has no generating set")
        dist = np.full(self.order, -1)
        dist[0] = 0
        frontier = [0]
        while frontier:
            nxt = []
            for g in frontier:
                for s in self.generators:
                    h = self.mult_table[g, s]
                    if dist[h] < 0:
                        dist[h] = dist[g] + 1
                        nxt.append(h)
            frontier = nxt
        if (dist < 0).any():
            raise GroupModelError("generators do not generate the group")
        return dist

    def matrix_coefficient(self, k: int, i: int, j: int) -> np.ndarray:
        return self.irreps[k].matrices[:, i, j].copy()

    def regular_matrix(self, g: int) -> np.ndarray:
        """Left-regular permutation matrix: ``L[g x, x] = 1``."""
        n = self.order
        m = np.zeros((n, n))
        m[self.mult_table[g], np.arange(n)] = 1.0
        return m


def _from_elements(elements: Sequence[Hashable], mul: Callable) -> np.ndarray:
    index = {e: i for i, e in enumerate(elements)}
    n = len(elements)
    t = np.empty((n, n), dtype=np.int64)
    for a, x in enumerate(elements):
        for b, y in enumerate(elements):
            t[a, b] = index[mul(x, y)]
    return t


def cyclic(n: int) -> FiniteGroupModel:
    if not 1 <= n <= 64:
        raise GroupModelError("cyclic groups are supported for 1 <= n <= 64")
    k = np.arange(n)
    t = (k[:, None] + k[None, :]) % n
    irreps = [Irrep(np.exp(2j * np.pi * j * k / n).reshape(n, 1, 1), f"chi{j}") for j in range(n)]
    gens = sorted({1 % n, (n - 1) % n}) if n > 1 else []
    return FiniteGroupModel(t, irreps, f"Z{n}", [str(i) for i in k], gens)


def dihedral(n: int) -> FiniteGroupModel:
    """Dihedral group of order ``2n``; element ``k + n e`` is ``r^k s^e``."""
    if not 1 <= n <= 16:
        raise GroupModelError("dihedral groups are supported for 1 <= n <= 16")
    elements = [(k, e) for e in (0, 1) for k in range(n)]

    def mul(x, y):
        (k, e), (l, f) = x, y
        return ((k + (l if e == 0 else -l)) % n, (e + f) % 2)

    t = _from_elements(elements, mul)
    ks = np.array([k for k, _ in elements])
    es = np.array([e for _, e in elements])
    irreps = []
    for rv, sv in [(1, 1), (1, -1)] + ([(-1, 1), (-1, -1)] if n % 2 == 0 else []):
        vals = (rv ** ks) * (sv ** es)
        irreps.append(Irrep(vals.astype(complex).reshape(-1, 1, 1), f"one({rv},{sv})"))
    swap = np.array([[0, 1], [1, 0]], dtype=complex)
    for h in range(1, (n - 1) // 2 + 1):
        mats = []
        for k, e in elements:
            w = np.exp(2j * np.pi * h * k / n)
            rk = np.diag([w, w.conjugate()])
            mats.append(rk @ swap if e else rk)
        irreps.append(Irrep(np.array(mats), f"rho{h}"))
    # Coxeter generators: the reflections s and r s
    gens = sorted({elements.index((0, 1)), elements.index((1 % n, 1))})
    labels = [f"r{k}" + ("s" if e else "") for k, e in elements]
    return FiniteGroupModel(t, irreps, f"D{n}", labels, gens)


def _perm_matrix(p: Sequence[int]) -> np.ndarray:
    m = np.zeros((len(p), len(p)))
    for i, pi in enumerate(p):
        m[pi, i] = 1.0
    return m


def _sign(p: Sequence[int]) -> int:
    s = 1
    p = list(p)
    for i in range(len(p)):
        for j in range(i + 1, len(p)):
            if p[i] > p[j]:
                s = -s
    return s


def _sum_zero_basis(n: int) -> np.ndarray:
    # orthonormal basis of {x : sum x = 0}, columns
    q, _ = np.linalg.qr(np.eye(n)[:, :-1] - 1.0 / n)
    return q


def _standard(perms: Sequence[tuple[int, ...]], n: int) -> np.ndarray:
    b = _sum_zero_basis(n)
    return np.array([b.T @ _perm_matrix(p) @ b for p in perms])


def symmetric(n: int) -> FiniteGroupModel:
    """S3 or S4 on permutations in lexicographic order (identity first)."""
    if n not in (3, 4):
        raise GroupModelError("symmetric groups are supported for n in {3, 4}")
    perms = list(itertools.permutations(range(n)))
    mul = lambda p, q: tuple(p[q[i]] for i in range(n))
    t = _from_elements(perms, mul)
    sign = np.array([_sign(p) for p in perms], dtype=complex)
    std = _standard(perms, n)
    irreps = [
        Irrep(np.ones((len(perms), 1, 1)), "trivial"),
        Irrep(sign.reshape(-1, 1, 1), "sign"),
        Irrep(std, "standard"),
    ]
    if n == 4:
        irreps.append(Irrep(std * sign[:, None, None], "standard*sign"))
        # S4 -> S3 through its action on the three pair partitions
        parts = [frozenset({frozenset({0, 1}), frozenset({2, 3})}),
                 frozenset({frozenset({0, 2}), frozenset({1, 3})}),
                 frozenset({frozenset({0, 3}), frozenset({1, 2})})]
        images = []
        for p in perms:
            act = lambda part: frozenset(frozenset(p[i] for i in pair) for pair in part)
            images.append(tuple(parts.index(act(part)) for part in parts))
        irreps.append(Irrep(_standard(images, 3), "two-dim"))
    adj = []
    for i in range(n - 1):
        tr = list(range(n))
        tr[i], tr[i + 1] = tr[i + 1], tr[i]
        adj.append(perms.index(tuple(tr)))
    labels = ["".join(map(str, p)) for p in perms]
    return FiniteGroupModel(t, irreps, f"S{n}", labels, sorted(adj))


def quaternion() -> FiniteGroupModel:
    one = np.eye(2, dtype=complex)
    qi = np.array([[1j, 0], [0, -1j]])
    qj = np.array([[0, 1], [-1, 0]], dtype=complex)
    qk = qi @ qj
    base = [("1", one), ("i", qi), ("j", qj), ("k", qk)]
    named = [(nm, m) for nm, m in base] + [("-" + nm, -m) for nm, m in base]
    mats = np.array([m for _, m in named])
    labels = [nm for nm, _ in named]

    def find(m):
        for idx, x in enumerate(mats):
            if np.allclose(x, m):
                return idx
        raise AssertionError("not closed")

    t = np.array([[find(a @ b) for b in mats] for a in mats])
    irreps = []
    for a, b in itertools.product((1, -1), repeat=2):
        chi = {"1": 1, "i": a, "j": b, "k": a * b}
        vals = np.array([chi[nm.lstrip("-")] for nm in labels], dtype=complex)
        irreps.append(Irrep(vals.reshape(-1, 1, 1), f"chi({a},{b})"))
    irreps.append(Irrep(mats, "quaternionic"))
    gens = sorted(labels.index(x) for x in ("i", "-i", "j", "-j"))
    return FiniteGroupModel(t, irreps, "Q8", labels, gens)


BUILTIN_NAMES = ("z<n>", "d<n>", "s3", "s4", "q8")


def builtin(name: str) -> FiniteGroupModel:
    """Parse ``z12`` / ``z:12`` / ``d4`` / ``s3`` / ``s4`` / ``q8``."""
    key = name.strip().lower().replace(":", "")
    if key == "q8":
        return quaternion()
    if key in ("s3", "s4"):
        return symmetric(int(key[1]))
    if key[:1] in ("z", "d") and key[1:].isdigit():
        n = int(key[1:])
        return cyclic(n) if key[0] == "z" else dihedral(n)
    raise GroupModelError(f"unknown built-in group {name!r}; expected one of {', '.join(BUILTIN_NAMES)}")


def save_model(model: FiniteGroupModel, table_path: str | Path, irreps_path: str | Path) -> None:
    """Write the plain-text table file and the companion irrep file."""
    n = model.order
    lines = [str(n)] + [" ".join(map(str, row)) for row in model.mult_table.tolist()]
    Path(table_path).write_text("\n".join(lines) + "\n")
    out = [str(len(model.irreps))]
    for p in model.irreps:
        out.append(str(p.dim))
        for g in range(n):
            out.append(" ".join(repr(complex(z)) for z in p.matrices[g].reshape(-1)))
    Path(irreps_path).write_text("\n".join(out) + "\n")


def load_model(table_path: str | Path, irreps_path: str | Path, name: str | None = None) -> FiniteGroupModel:
    """Read a model written by :func:`save_model` (validated on construction).

    Table file: the order, then one row of element indices per line.
    Irrep file: the irrep count; per irrep a line with its dimension followed
    by one line per group element holding the row-major flattened matrix as
    complex literals (``(0.5+1j)``).
    """
    try:
        rows = [ln.split() for ln in Path(table_path).read_text().splitlines() if ln.strip()]
        n = int(rows[0][0])
        table = np.array([[int(x) for x in r] for r in rows[1:]], dtype=np.int64)
        if table.shape != (n, n):
            raise GroupModelError(f"table has shape {table.shape}, expected ({n}, {n})")
        lines = [ln.split() for ln in Path(irreps_path).read_text().splitlines() if ln.strip()]
        count = int(lines[0][0])
        pos = 1
        irreps = []
        for _ in range(count):
            d = int(lines[pos][0])
            pos += 1
            mats = np.array([[complex(z) for z in lines[pos + g]] for g in range(n)])
            if mats.shape != (n, d * d):
                raise GroupModelError(f"irrep of dimension {d} has malformed rows")
            irreps.append(Irrep(mats.reshape(n, d, d)))
            pos += n
    except (IndexError, ValueError) as exc:
        if isinstance(exc, GroupModelError):
            raise
        raise GroupModelError(f"malformed group files: {exc}") from None
    return FiniteGroupModel(table, irreps, name or Path(table_path).stem)
