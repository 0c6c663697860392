"""Points, metrics and the built-in minimal systems.

Three system families are provided:

* ``ROTATION``: the circle rotation ``x -> x + alpha``.
* ``AFFINE_SKEW``: the unipotent affine map on the ``s``-torus
  ``(x1, ..., xs) -> (x1 + alpha, x2 + x1, ..., xs + x(s-1))``, an ``s``-step
  nilsystem whose maximal ``k``-step pro-nilfactor is truncation to ``k``
  coordinates.
* ``STURMIAN``: the two-interval coding of the rotation, represented by a
  circle point plus a boundary convention.

Torus points are plain ``numpy`` arrays with entries in ``[0, 1)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Union

import numpy as np

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

# numerical irrationality guard: reject alpha near p/q, q <= IRRATIONAL_QMAX
IRRATIONAL_QMAX = 100
IRRATIONAL_EPS = 1e-6
MAX_POWER = 10**9


class SystemError_(ValueError):
    """Raised when a point, system or factor map is inconsistent."""


class Kind(str, Enum):
    ROTATION = "ROTATION"
    AFFINE_SKEW = "AFFINE_SKEW"
    STURMIAN = "STURMIAN"


class Convention(str, Enum):
    LEFT_CLOSED = "LEFT_CLOSED"
    RIGHT_CLOSED = "RIGHT_CLOSED"

    @property
    def short(self) -> str:
        return "L" if self is Convention.LEFT_CLOSED else "R"


class FactorKind(str, Enum):
    IDENTITY = "IDENTITY"
    SKEW_TRUNCATE = "SKEW_TRUNCATE"
    STURMIAN_TO_ROTATION = "STURMIAN_TO_ROTATION"


def frac(x):
    """Reduce mod 1 into ``[0, 1)``; works on scalars and arrays."""
    r = np.asarray(x, dtype=float) - np.floor(x)
    # x slightly below an integer can round up to exactly 1.0
    r = np.where(r >= 1.0, 0.0, r)
    return r if r.ndim else float(r)


def check_irrational(alpha: float, qmax: int = IRRATIONAL_QMAX, eps: float = IRRATIONAL_EPS) -> None:
    if not 0.0 < alpha < 1.0:
        raise SystemError_(f"alpha must lie in (0, 1), got {alpha!r}")
    for q in range(1, qmax + 1):
        p = round(alpha * q)
        if abs(alpha - p / q) <= eps / q**2:
            raise SystemError_(
                f"alpha={alpha!r} is numerically rational: within {eps}/q^2 of {p}/{q}"
            )


@dataclass(frozen=True)
class SystemSpec:
    kind: Kind
    alpha: float
    dim: int = 1

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "alpha", float(self.alpha))
        check_irrational(self.alpha)
        if self.dim < 1:
            raise SystemError_("dim must be >= 1")
        if self.kind is not Kind.AFFINE_SKEW and self.dim != 1:
            raise SystemError_(f"{self.kind.value} systems have dim 1")

    @classmethod
    def rotation(cls, alpha: float = GOLDEN) -> "SystemSpec":
        return cls(Kind.ROTATION, alpha, 1)

    @classmethod
    def skew(cls, dim: int = 2, alpha: float = GOLDEN) -> "SystemSpec":
        return cls(Kind.AFFINE_SKEW, alpha, dim)

    @classmethod
    def sturmian(cls, alpha: float = GOLDEN) -> "SystemSpec":
        return cls(Kind.STURMIAN, alpha, 1)

    @property
    def is_torus(self) -> bool:
        return self.kind is not Kind.STURMIAN

    @property
    def nil_order(self):
        """Order of the system as a pro-nilsystem; ``None`` when it is none."""
        if self.kind is Kind.STURMIAN:
            return None
        return self.dim

    def label(self) -> str:
        if self.kind is Kind.AFFINE_SKEW:
            return f"AFFINE_SKEW(dim={self.dim}, alpha={self.alpha!r})"
        return f"{self.kind.value}(alpha={self.alpha!r})"


@dataclass(frozen=True)
class SymbolicPoint:
    """A point of the Sturmian subshift.

    The coding sequence is that of the circle point ``base + steps*alpha``
    read with the given boundary convention.  Keeping ``steps`` as an integer
    makes the shift exact: points on the orbit of 0 stay exactly on it.
    """

    base: float
    convention: Convention = Convention.LEFT_CLOSED
    steps: int = 0

    def __post_init__(self):
        object.__setattr__(self, "base", frac(float(self.base)))
        object.__setattr__(self, "convention", Convention(self.convention))
        object.__setattr__(self, "steps", int(self.steps))

    def circle(self, alpha: float) -> float:
        if self.base == 0.0:
            return frac(_exact_frac_mul(self.steps, alpha))
        return frac(self.base + _exact_frac_mul(self.steps, alpha))

    def flipped(self) -> "SymbolicPoint":
        other = (Convention.RIGHT_CLOSED if self.convention is Convention.LEFT_CLOSED
                 else Convention.LEFT_CLOSED)
        return replace(self, convention=other)


Point = Union[np.ndarray, SymbolicPoint]


def torus_point(coords) -> np.ndarray:
    a = np.atleast_1d(np.asarray(coords, dtype=float))
    if a.ndim != 1 or a.size < 1:
        raise SystemError_("a torus point is a non-empty vector")
    return frac(a)


def boundary_pair(alpha: float = GOLDEN) -> tuple[SymbolicPoint, SymbolicPoint]:
    """The two codings of the circle point 0 (the asymptotic pair x1, x2)."""
    return (SymbolicPoint(0.0, Convention.LEFT_CLOSED),
            SymbolicPoint(0.0, Convention.RIGHT_CLOSED))


# ---------------------------------------------------------------- metrics

def torus_distance(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise SystemError_(f"dimension mismatch: {a.shape} vs {b.shape}")
    diff = np.abs(a - b) % 1.0
    return float(np.max(np.minimum(diff, 1.0 - diff)))


def _symbol_at(z: float, alpha: float, convention: Convention) -> int:
    if convention is Convention.LEFT_CLOSED:
        return 1 if z >= 1.0 - alpha else 0
    return 1 if (z > 1.0 - alpha or z == 0.0) else 0


def sturmian_symbol(p: SymbolicPoint, n: int, alpha: float) -> int:
    """Symbol at position ``n`` of the coding of ``p``.

    LEFT_CLOSED codes against ``A0 = [0, 1-alpha)``, ``A1 = [1-alpha, 1)``;
    RIGHT_CLOSED against ``A0 = (0, 1-alpha]``, ``A1 = (1-alpha, 1]`` with
    ``0 == 1``.
    """
    m = p.steps + int(n)
    if p.base == 0.0:
        # exact handling of the orbit of 0, where the conventions differ
        if m == 0:
            return 0 if p.convention is Convention.LEFT_CLOSED else 1
        if m == -1:
            return 1 if p.convention is Convention.LEFT_CLOSED else 0
        z = frac(_exact_frac_mul(m, alpha))
    else:
        z = frac(p.base + _exact_frac_mul(m, alpha))
    return _symbol_at(z, alpha, p.convention)


def sturmian_codes(p: SymbolicPoint, alpha: float, lo: int, hi: int) -> np.ndarray:
    """Coding of ``p`` on positions ``lo..hi`` inclusive, as int8."""
    m = p.steps + np.arange(lo, hi + 1, dtype=np.int64)
    z = frac(p.base + frac(m * alpha)) if p.base != 0.0 else frac(m * alpha)
    if p.convention is Convention.LEFT_CLOSED:
        out = (z >= 1.0 - alpha).astype(np.int8)
    else:
        out = ((z > 1.0 - alpha) | (z == 0.0)).astype(np.int8)
    if p.base == 0.0:
        left = p.convention is Convention.LEFT_CLOSED
        out[m == 0] = 0 if left else 1
        out[m == -1] = 1 if left else 0
    return out


def symbolic_distance(x: SymbolicPoint, y: SymbolicPoint, window: int, alpha: float) -> float:
    """``2**-k`` with ``k`` the least ``|n| <= window`` where codings differ, else 0."""
    if window < 1:
        raise SystemError_("window must be >= 1")
    cx = sturmian_codes(x, alpha, -window, window)
    cy = sturmian_codes(y, alpha, -window, window)
    bad = np.nonzero(cx != cy)[0]
    if bad.size == 0:
        return 0.0
    k = int(np.min(np.abs(bad - window)))
    return 2.0**-k


def point_distance(sys: SystemSpec, a: Point, b: Point, window: int = 30) -> float:
    if sys.is_torus:
        return torus_distance(a, b)
    return symbolic_distance(a, b, window, sys.alpha)


# ---------------------------------------------------------------- dynamics

def _binom(k: int, m: int) -> int:
    """Generalized binomial coefficient, valid for negative ``k``."""
    num = 1
    for i in range(m):
        num *= k - i
    return num // math.factorial(m)


def _exact_frac_mul(k: int, v: float) -> float:
    """``frac(k * v)`` computed exactly on the binary value of ``v``."""
    if k == 0 or v == 0.0:
        return 0.0
    f = Fraction(v) * k
    f -= math.floor(f)
    return frac(float(f))


def _check_torus_point(sys: SystemSpec, x) -> np.ndarray:
    if not sys.is_torus:
        raise SystemError_(f"{sys.kind.value} points are SymbolicPoint instances")
    if isinstance(x, SymbolicPoint):
        raise SystemError_("symbolic point given to a torus system")
    x = np.asarray(x, dtype=float)
    if x.shape != (sys.dim,):
        raise SystemError_(f"expected a point of dimension {sys.dim}, got shape {x.shape}")
    return x


def apply_power(sys: SystemSpec, x: Point, k: int) -> Point:
    """``T^k x`` by closed form.

    For the skew map with ``x0 := alpha`` fixed, coordinate ``j`` of ``T^k x``
    is ``sum_m C(k, m) x_(j-m)``; the sum is evaluated exactly on the binary
    values of the inputs and rounded once.
    """
    k = int(k)
    if abs(k) > MAX_POWER:
        raise SystemError_(f"|k| must be <= {MAX_POWER}")
    if sys.kind is Kind.STURMIAN:
        if not isinstance(x, SymbolicPoint):
            raise SystemError_("STURMIAN systems act on SymbolicPoint")
        return replace(x, steps=x.steps + k)
    x = _check_torus_point(sys, x)
    if k == 0:
        return x.copy()
    vals = [Fraction(sys.alpha)] + [Fraction(float(c)) for c in x]
    coeff = [_binom(k, m) for m in range(sys.dim + 1)]
    out = np.empty(sys.dim)
    for j in range(1, sys.dim + 1):
        acc = sum(coeff[m] * vals[j - m] for m in range(j + 1))
        acc -= math.floor(acc)
        out[j - 1] = float(acc)
    return frac(out)


def step(sys: SystemSpec, x: Point) -> Point:
    """One naive forward step, used as an oracle for :func:`apply_power`."""
    if sys.kind is Kind.STURMIAN:
        return replace(x, steps=x.steps + 1)
    x = _check_torus_point(sys, x)
    out = np.empty_like(x)
    out[0] = x[0] + sys.alpha
    out[1:] = x[1:] + x[:-1]
    return frac(out)


def step_back(sys: SystemSpec, x: Point) -> Point:
    if sys.kind is Kind.STURMIAN:
        return replace(x, steps=x.steps - 1)
    x = _check_torus_point(sys, x)
    out = np.empty_like(x)
    out[0] = x[0] - sys.alpha
    for j in range(1, sys.dim):
        out[j] = x[j] - out[j - 1]
    return frac(out)


def orbit_table(alpha: float, x: np.ndarray, kmin: int, kmax: int) -> np.ndarray:
    """Closed-form ``T^k x`` for ``k = kmin..kmax`` on the skew family, shape ``(K, s)``.

    Float evaluation; accurate to ~1e-10 for ``|k|`` up to a few thousand.
    """
    x = np.asarray(x, dtype=float)
    s = x.shape[-1]
    k = np.arange(kmin, kmax + 1, dtype=float)
    coeffs = [np.ones_like(k)]
    for m in range(1, s + 1):
        coeffs.append(coeffs[-1] * (k - (m - 1)) / m)
    vals = np.concatenate([[alpha], x])
    out = np.empty((k.size, s))
    for j in range(1, s + 1):
        acc = np.zeros_like(k)
        for m in range(j + 1):
            acc = frac(acc + frac(coeffs[m] * vals[j - m]))
        out[:, j - 1] = acc
    return out


# ---------------------------------------------------------------- factor maps

@dataclass(frozen=True)
class FactorMapSpec:
    source: SystemSpec
    target: SystemSpec
    kind: FactorKind
    k: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", FactorKind(self.kind))
        src, tgt = self.source, self.target
        if tgt.alpha != src.alpha:
            raise SystemError_("factor map source and target must share alpha")
        if self.kind is FactorKind.IDENTITY:
            if src != tgt:
                raise SystemError_("IDENTITY requires source == target")
        elif self.kind is FactorKind.SKEW_TRUNCATE:
            if src.kind is Kind.STURMIAN or not 1 <= self.k <= src.dim:
                raise SystemError_(f"SKEW_TRUNCATE({self.k}) invalid for {src.label()}")
            if tgt.dim != self.k or tgt.kind is Kind.STURMIAN:
                raise SystemError_("SKEW_TRUNCATE target must be the truncated skew system")
        elif self.kind is FactorKind.STURMIAN_TO_ROTATION:
            if src.kind is not Kind.STURMIAN or tgt.kind is not Kind.ROTATION:
                raise SystemError_("STURMIAN_TO_ROTATION maps STURMIAN onto ROTATION")

    @classmethod
    def identity(cls, sys: SystemSpec) -> "FactorMapSpec":
        return cls(sys, sys, FactorKind.IDENTITY)

    @classmethod
    def truncate(cls, sys: SystemSpec, k: int) -> "FactorMapSpec":
        tgt = SystemSpec.rotation(sys.alpha) if k == 1 else SystemSpec.skew(k, sys.alpha)
        return cls(sys, tgt, FactorKind.SKEW_TRUNCATE, k)

    @classmethod
    def sturmian_to_rotation(cls, sys: SystemSpec) -> "FactorMapSpec":
        return cls(sys, SystemSpec.rotation(sys.alpha), FactorKind.STURMIAN_TO_ROTATION)

    @property
    def fiber_dim(self) -> int:
        if self.kind is FactorKind.SKEW_TRUNCATE:
            return self.source.dim - self.k
        return 0

    def label(self) -> str:
        if self.kind is FactorKind.SKEW_TRUNCATE:
            return f"SKEW_TRUNCATE({self.k})"
        return self.kind.value


def apply_factor(f: FactorMapSpec, x: Point) -> Point:
    if f.kind is FactorKind.STURMIAN_TO_ROTATION:
        if not isinstance(x, SymbolicPoint):
            raise SystemError_("STURMIAN_TO_ROTATION expects a SymbolicPoint")
        return np.array([x.circle(f.source.alpha)])
    x = _check_torus_point(f.source, x)
    if f.kind is FactorKind.IDENTITY:
        return x.copy()
    return x[: f.k].copy()
