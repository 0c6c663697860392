"""Cube indices, configurations, cube-group elements and Euclidean permutations.

Vertices ``eps in {0,1}^d`` are stored as integers with ``eps_1`` the least
significant bit, so for ``d = 2`` the order is ``00, 10, 01, 11``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .systems import Point, SymbolicPoint, SystemSpec, SystemError_, apply_power


def cube_bits(d: int) -> np.ndarray:
    """Bit matrix of shape ``(2**d, d)``; row ``r`` is the vertex with index ``r``."""
    if d < 1:
        raise SystemError_("cube dimension must be >= 1")
    r = np.arange(1 << d)
    return ((r[:, None] >> np.arange(d)[None, :]) & 1).astype(np.int64)


def vertex_index(eps: Sequence[int]) -> int:
    return sum(int(b) << i for i, b in enumerate(eps))


def vertex_bits(index: int, d: int) -> tuple[int, ...]:
    return tuple((index >> i) & 1 for i in range(d))


def vertex_label(index: int, d: int) -> str:
    return "".join(str(b) for b in vertex_bits(index, d))


@dataclass(frozen=True, eq=False)
class CubeConfiguration:
    """A point of ``X^[d]``.

    ``entries`` is an ``(2**d, s)`` float array for torus systems and a tuple
    of :class:`SymbolicPoint` for the Sturmian system.
    """

    d: int
    entries: Union[np.ndarray, tuple]

    def __post_init__(self):
        n = 1 << self.d
        if isinstance(self.entries, np.ndarray):
            arr = np.asarray(self.entries, dtype=float)
            if arr.ndim != 2 or arr.shape[0] != n:
                raise SystemError_(f"expected {n} torus entries, got shape {arr.shape}")
            object.__setattr__(self, "entries", arr)
        else:
            ents = tuple(self.entries)
            if len(ents) != n or not all(isinstance(p, SymbolicPoint) for p in ents):
                raise SystemError_(f"expected {n} SymbolicPoint entries")
            object.__setattr__(self, "entries", ents)

    @property
    def is_torus(self) -> bool:
        return isinstance(self.entries, np.ndarray)

    def __len__(self) -> int:
        return 1 << self.d

    def __getitem__(self, eps) -> Point:
        i = eps if isinstance(eps, (int, np.integer)) else vertex_index(eps)
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CubeConfiguration) or other.d != self.d:
            return NotImplemented
        if self.is_torus != other.is_torus:
            return False
        if self.is_torus:
            return bool(np.array_equal(self.entries, other.entries))
        return self.entries == other.entries

    @property
    def first(self) -> Point:
        return self.entries[0]

    def with_entries(self, entries) -> "CubeConfiguration":
        return CubeConfiguration(self.d, entries)

    def to_list(self) -> list:
        """Flat serialisable list in vertex order."""
        if self.is_torus:
            return [[float(v) for v in row] for row in self.entries]
        return [{"base": p.base, "steps": p.steps, "convention": p.convention.value}
                for p in self.entries]

    @classmethod
    def from_list(cls, d: int, items: list) -> "CubeConfiguration":
        if items and isinstance(items[0], dict):
            return cls(d, tuple(SymbolicPoint(it["base"], it["convention"], it.get("steps", 0))
                                for it in items))
        return cls(d, np.asarray(items, dtype=float))

    @classmethod
    def from_points(cls, d: int, points: Sequence[Point]) -> "CubeConfiguration":
        if points and isinstance(points[0], SymbolicPoint):
            return cls(d, tuple(points))
        return cls(d, np.array([np.atleast_1d(np.asarray(p, dtype=float)) for p in points]))


def diagonal_config(x: Point, d: int) -> CubeConfiguration:
    n = 1 << d
    if isinstance(x, SymbolicPoint):
        return CubeConfiguration(d, (x,) * n)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return CubeConfiguration(d, np.tile(x, (n, 1)))


def project_star(c: CubeConfiguration) -> list:
    return list(c.entries[1:])


def corner_config(x: Point, y: Point, d: int) -> CubeConfiguration:
    """``(x, y, ..., y)`` in dimension ``d``."""
    pts = [x] + [y] * ((1 << d) - 1)
    return CubeConfiguration.from_points(d, pts)


# ---------------------------------------------------------------- group elements

@dataclass(frozen=True)
class CubeGroupElement:
    """``S_eps = T^(m + n.eps)``; ``m == 0`` exactly for face-group elements."""

    m: int
    n: tuple

    def __post_init__(self):
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "n", tuple(int(v) for v in self.n))

    @classmethod
    def identity(cls, d: int) -> "CubeGroupElement":
        return cls(0, (0,) * d)

    @property
    def d(self) -> int:
        return len(self.n)

    @property
    def is_face(self) -> bool:
        return self.m == 0

    def exponents(self) -> np.ndarray:
        return self.m + cube_bits(self.d) @ np.asarray(self.n, dtype=np.int64)

    def __add__(self, other: "CubeGroupElement") -> "CubeGroupElement":
        if other.d != self.d:
            raise SystemError_("cube dimension mismatch")
        return CubeGroupElement(self.m + other.m, tuple(a + b for a, b in zip(self.n, other.n)))

    def __neg__(self) -> "CubeGroupElement":
        return CubeGroupElement(-self.m, tuple(-v for v in self.n))


def apply_exponents(sys: SystemSpec, exps, c: CubeConfiguration) -> CubeConfiguration:
    exps = [int(e) for e in exps]
    if len(exps) != len(c):
        raise SystemError_("exponent vector does not match the cube")
    pts = [apply_power(sys, c[i], e) for i, e in enumerate(exps)]
    return CubeConfiguration.from_points(c.d, pts)


def apply_cube_element(sys: SystemSpec, g: CubeGroupElement, c: CubeConfiguration) -> CubeConfiguration:
    if g.d != c.d:
        raise SystemError_(f"element of dimension {g.d} applied to a cube of dimension {c.d}")
    return apply_exponents(sys, g.exponents(), c)


# ---------------------------------------------------------------- generator words

DIAG = "DIAG"
Token = tuple  # (generator, exponent); generator is DIAG or a face index j >= 1


def face_pattern(j: int, d: int) -> np.ndarray:
    """Per-vertex exponent of the face transformation ``T_j^[d]``.

    Built from the inductive definition: ``T_1^[1] = id x T``,
    ``T_j^[d] = T_j^[d-1] x T_j^[d-1]`` for ``j < d`` and
    ``T_d^[d] = id^[d-1] x T^[d-1]``.
    """
    if not 1 <= j <= d:
        raise SystemError_(f"face index {j} out of range for d={d}")
    if d == 1:
        return np.array([0, 1], dtype=np.int64)
    half = 1 << (d - 1)
    if j < d:
        lower = face_pattern(j, d - 1)
        return np.concatenate([lower, lower])
    return np.concatenate([np.zeros(half, np.int64), np.ones(half, np.int64)])


def generator_pattern(gen, d: int) -> np.ndarray:
    if gen == DIAG:
        return np.ones(1 << d, dtype=np.int64)
    return face_pattern(int(gen), d)


def validate_word(word: Iterable[Token], d: int) -> list[Token]:
    out = []
    for gen, e in word:
        if e == 0:
            raise SystemError_("generator exponents must be nonzero")
        if gen != DIAG and not 1 <= int(gen) <= d:
            raise SystemError_(f"face index {gen} out of range for d={d}")
        out.append((gen, int(e)))
    return out


def reduce_word(word: Iterable[Token], d: int) -> CubeGroupElement:
    m = 0
    n = [0] * d
    for gen, e in validate_word(word, d):
        if gen == DIAG:
            m += e
        else:
            n[int(gen) - 1] += e
    return CubeGroupElement(m, tuple(n))


def apply_word(sys: SystemSpec, word: Iterable[Token], c: CubeConfiguration) -> CubeConfiguration:
    """Apply generators one at a time, each through its inductive definition."""
    for gen, e in validate_word(word, c.d):
        c = apply_exponents(sys, e * generator_pattern(gen, c.d), c)
    return c


def word_exponents(word: Iterable[Token], d: int) -> np.ndarray:
    """Integer exponents accumulated by stepwise application of ``word``."""
    acc = np.zeros(1 << d, dtype=np.int64)
    for gen, e in validate_word(word, d):
        acc += e * generator_pattern(gen, d)
    return acc


# ---------------------------------------------------------------- Euclidean permutations

def _mask(eps0, d: int) -> int:
    if isinstance(eps0, (int, np.integer)):
        return int(eps0)
    if len(eps0) != d:
        raise SystemError_("eps0 length must equal the cube dimension")
    return vertex_index(eps0)


def euclidean_index_map(eps0, d: int) -> np.ndarray:
    """``phi`` as an index array: ``phi(eps)`` flips the bits set in ``eps0``."""
    return np.arange(1 << d) ^ _mask(eps0, d)


def euclidean_permutation(c: CubeConfiguration, eps0) -> CubeConfiguration:
    """``c'[eps] = c[phi(eps)]``."""
    idx = euclidean_index_map(eps0, c.d)
    if c.is_torus:
        return c.with_entries(c.entries[idx])
    return c.with_entries(tuple(c.entries[i] for i in idx))


def conjugate_element(g: CubeGroupElement, eps0) -> CubeGroupElement:
    """Element generating the Euclidean image of the configuration ``g`` generates."""
    bits = vertex_bits(_mask(eps0, g.d), g.d)
    m = g.m + sum(v for v, b in zip(g.n, bits) if b)
    n = tuple(-v if b else v for v, b in zip(g.n, bits))
    return CubeGroupElement(m, n)
