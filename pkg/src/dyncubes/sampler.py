"""Finite inner approximations of ``Q^[d](X)`` and of face-orbit closures.

A :class:`CubeSetSample` is lazy: it records the system, the base set and
the exponent box ``[-N, N]^d`` and enumerates configurations
``(T^(n.eps) x)_eps`` only on demand.  Distance queries never materialise
the sample; they run the exact branch-and-bound in :mod:`._kernels` base
point by base point, so budgets far above the materialisation limit are
fine for queries.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .cubes import CubeConfiguration, cube_bits
from .systems import (
    Convention,
    FactorKind,
    FactorMapSpec,
    Kind,
    Point,
    SymbolicPoint,
    SystemSpec,
    SystemError_,
    apply_factor,
    frac,
    orbit_table,
    sturmian_codes,
)

MAX_MATERIALIZED = 10**7
# cap on the nominal box size of a streaming query (bases * (2N+1)^d)
MAX_QUERY = 10**13
DEFAULT_WINDOW = 30
PLATEAU_REL = 0.01


class BudgetOverflow(SystemError_):
    pass


@dataclass(frozen=True)
class SamplingBudget:
    N: int
    base_grid: int = 1
    base_orbit_len: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.N < 0:
            raise SystemError_("N must be >= 0")
        if self.base_grid < 1 or self.base_orbit_len < 1:
            raise SystemError_("base_grid and base_orbit_len must be >= 1")

    def base_count(self, sys: SystemSpec) -> int:
        if sys.is_torus:
            return self.base_grid ** sys.dim
        return 2 * self.base_orbit_len

    def nested_in(self, other: "SamplingBudget") -> bool:
        """True when every sample built with ``self`` is contained in one built with ``other``."""
        return (self.N <= other.N
                and other.base_grid % self.base_grid == 0
                and self.base_orbit_len <= other.base_orbit_len)

    def as_tuple(self) -> tuple:
        return (self.N, self.base_grid, self.base_orbit_len)


def box_vectors(N: int, d: int) -> np.ndarray:
    """All ``n in [-N, N]^d`` in lexicographic order, ``n_1`` slowest."""
    r = np.arange(-N, N + 1, dtype=np.int64)
    mesh = np.meshgrid(*([r] * d), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def torus_grid(g: int, s: int) -> np.ndarray:
    pts = list(itertools.product(range(g), repeat=s))
    return np.asarray(pts, dtype=float).reshape(-1, s) / g


def sturmian_bases(orbit_len: int) -> list[SymbolicPoint]:
    """Orbit segment of the circle point 0, each point in both conventions."""
    return [SymbolicPoint(0.0, conv, j)
            for j in range(orbit_len)
            for conv in (Convention.LEFT_CLOSED, Convention.RIGHT_CLOSED)]


@dataclass(eq=False)
class CubeSetSample:
    """Inner approximation of ``Q^[d]`` (``FULL_Q``) or of the face orbit of ``anchor^[d]``."""

    sys: SystemSpec
    d: int
    budget: SamplingBudget
    kind: str = "FULL_Q"
    anchor: Optional[Point] = None
    extra: tuple = ()
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.d < 1:
            raise SystemError_("d must be >= 1")
        if self.kind not in ("FULL_Q", "FACE_ORBIT"):
            raise SystemError_(f"unknown sample kind {self.kind!r}")
        if self.kind == "FACE_ORBIT" and self.anchor is None:
            raise SystemError_("a face-orbit sample needs its anchor point")
        if self.nominal_size > MAX_QUERY:
            raise BudgetOverflow(
                f"sample of {self.nominal_size} configurations exceeds the query limit {MAX_QUERY}")

    # -- base set ------------------------------------------------------------
    @property
    def bases(self):
        if "bases" not in self._cache:
            if self.kind == "FACE_ORBIT":
                a = self.anchor
                b = [a] if isinstance(a, SymbolicPoint) else np.atleast_1d(np.asarray(a, float))[None, :]
            elif self.sys.is_torus:
                b = torus_grid(self.budget.base_grid, self.sys.dim)
                if self.extra:
                    ex = np.array([np.atleast_1d(np.asarray(p, float)) for p in self.extra])
                    b = np.concatenate([b, ex.reshape(len(self.extra), self.sys.dim)])
            else:
                b = sturmian_bases(self.budget.base_orbit_len) + list(self.extra)
            self._cache["bases"] = b
        return self._cache["bases"]

    @property
    def n_bases(self) -> int:
        if self.kind == "FACE_ORBIT":
            return 1
        return self.budget.base_count(self.sys) + len(self.extra)

    @property
    def box_size(self) -> int:
        return (2 * self.budget.N + 1) ** self.d

    @property
    def nominal_size(self) -> int:
        return self.n_bases * self.box_size

    def __len__(self) -> int:
        return self.nominal_size

    # -- enumeration ---------------------------------------------------------
    def witness(self, index: int):
        """``(base point, n)`` generating configuration ``index``."""
        b, r = divmod(int(index), self.box_size)
        n = np.unravel_index(r, (2 * self.budget.N + 1,) * self.d)
        return self.base_point(b), tuple(int(v) - self.budget.N for v in n)

    def base_point(self, b: int) -> Point:
        bases = self.bases
        return bases[b] if isinstance(bases, list) else bases[b].copy()

    def config_at(self, index: int) -> CubeConfiguration:
        base, n = self.witness(index)
        return generate(self.sys, base, n)

    def _check_materialize(self):
        if self.nominal_size > MAX_MATERIALIZED:
            raise BudgetOverflow(
                f"materialising {self.nominal_size} configurations exceeds the limit "
                f"{MAX_MATERIALIZED}; use distance queries instead")

    def witness_arrays(self):
        """Base indices ``(M,)`` and exponent vectors ``(M, d)`` in storage order."""
        self._check_materialize()
        box = box_vectors(self.budget.N, self.d)
        bidx = np.repeat(np.arange(self.n_bases), box.shape[0])
        return bidx, np.tile(box, (self.n_bases, 1))

    def configs(self) -> np.ndarray:
        """Torus samples as an ``(M, 2**d, s)`` array in storage order."""
        if not self.sys.is_torus:
            raise SystemError_("configs() is for torus systems; use sturmian_arrays()")
        self._check_materialize()
        N, d = self.budget.N, self.d
        exps = box_vectors(N, d) @ cube_bits(d).T + d * N
        bases = self.bases
        out = np.empty((self.n_bases, exps.shape[0], 1 << d, self.sys.dim))
        for b in range(self.n_bases):
            orb = orbit_table(self.sys.alpha, bases[b], -d * N, d * N)
            out[b] = orb[exps]
        return out.reshape(-1, 1 << d, self.sys.dim)

    def sturmian_arrays(self):
        """Sturmian samples as ``(base, steps (M, 2**d), convention (M,))``."""
        self._check_materialize()
        exps = box_vectors(self.budget.N, self.d) @ cube_bits(self.d).T
        bases = self.bases
        steps = np.concatenate([p.steps + exps for p in bases])
        conv = np.repeat([p.convention.short for p in bases], exps.shape[0])
        base = np.repeat([p.base for p in bases], exps.shape[0])
        return base, steps, conv

    def __iter__(self):
        self._check_materialize()
        for i in range(self.nominal_size):
            yield self.config_at(i)

    @property
    def points(self) -> list[CubeConfiguration]:
        return list(self)


def generate(sys: SystemSpec, base: Point, n: Sequence[int], m: int = 0) -> CubeConfiguration:
    """The configuration ``(T^(m + n.eps) base)_eps``."""
    d = len(n)
    exps = m + cube_bits(d) @ np.asarray(n, dtype=np.int64)
    if isinstance(base, SymbolicPoint):
        return CubeConfiguration(d, tuple(SymbolicPoint(base.base, base.convention, base.steps + int(e))
                                          for e in exps))
    lo, hi = int(exps.min()), int(exps.max())
    orb = orbit_table(sys.alpha, np.atleast_1d(np.asarray(base, float)), lo, hi)
    return CubeConfiguration(d, orb[exps - lo])


def sample_cube_set(sys: SystemSpec, d: int, b: SamplingBudget, extra_bases: Sequence[Point] = ()) -> CubeSetSample:
    """``Q^[d]`` sample over the budget's base set plus ``extra_bases``."""
    if sys.is_torus:
        extra = tuple(tuple(float(v) for v in np.atleast_1d(p)) for p in extra_bases)
        if any(len(p) != sys.dim for p in extra):
            raise SystemError_("extra base point does not belong to the system")
    else:
        extra = tuple(extra_bases)
        if not all(isinstance(p, SymbolicPoint) for p in extra):
            raise SystemError_("Sturmian extra bases must be SymbolicPoints")
    return CubeSetSample(sys, d, b, "FULL_Q", extra=extra)


def sample_face_orbit(sys: SystemSpec, x: Point, d: int, b: SamplingBudget) -> CubeSetSample:
    if sys.is_torus:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (sys.dim,):
            raise SystemError_("anchor point does not belong to the system")
    elif not isinstance(x, SymbolicPoint):
        raise SystemError_("Sturmian face orbits need a SymbolicPoint anchor")
    return CubeSetSample(sys, d, b, "FACE_ORBIT", x)


# ---------------------------------------------------------------- distance queries

@dataclass(frozen=True)
class Nearest:
    distance: float
    base: Optional[Point]
    n: Optional[tuple]

    def witness_dict(self) -> Optional[dict]:
        if self.n is None:
            return None
        if isinstance(self.base, SymbolicPoint):
            b = {"base": self.base.base, "steps": self.base.steps,
                 "convention": self.base.convention.value}
        else:
            b = [float(v) for v in self.base]
        return {"x": b, "n": list(self.n)}


def _target_data(c: CubeConfiguration, s: CubeSetSample, window: int):
    if c.d != s.d:
        raise SystemError_(f"configuration of dimension {c.d} vs sample of dimension {s.d}")
    if s.sys.is_torus:
        if not c.is_torus or c.entries.shape[1] != s.sys.dim:
            raise SystemError_("configuration does not live in the sample's space")
        return c.entries
    if c.is_torus:
        raise SystemError_("configuration does not live in the sample's space")
    return np.stack([sturmian_codes(p, s.sys.alpha, -window, window) for p in c.entries])


def _base_lower_bounds(s: CubeSetSample, target, window: int) -> np.ndarray:
    """Distance from each base point to entry 0 of the target (a lower bound)."""
    if s.sys.is_torus:
        diff = np.abs(s.bases - target[0][None, :])
        diff = np.minimum(diff, 1.0 - diff)
        return diff.max(axis=1)
    codes = _sturmian_base_codes(s, window)
    w = 2 * window + 1
    mid = codes.shape[1] // 2
    win = codes[:, mid - window: mid + window + 1]
    mism = win != target[0][None, :]
    lvl = np.abs(np.arange(w) - window)
    lv = np.where(mism, lvl[None, :], window + 1).min(axis=1)
    return np.where(lv <= window, np.exp2(-lv.astype(float)), 0.0)


def _sturmian_base_codes(s: CubeSetSample, window: int) -> np.ndarray:
    """Codings of every base on offsets ``-(dN+W) .. dN+W``, shape ``(B, 2(dN+W)+1)``."""
    key = ("codes", window)
    if key not in s._cache:
        R = s.d * s.budget.N + window
        bases = s.bases
        alpha = s.sys.alpha
        if all(p.base == 0.0 for p in bases):
            lo = min(p.steps for p in bases) - R
            hi = max(p.steps for p in bases) + R
            left = sturmian_codes(SymbolicPoint(0.0, Convention.LEFT_CLOSED), alpha, lo, hi)
            right = left.copy()
            if lo <= 0 <= hi:
                right[0 - lo] = 1
            if lo <= -1 <= hi:
                right[-1 - lo] = 0
            out = np.empty((len(bases), 2 * R + 1), dtype=np.int8)
            for i, p in enumerate(bases):
                src = left if p.convention is Convention.LEFT_CLOSED else right
                out[i] = src[p.steps - R - lo: p.steps + R - lo + 1]
        else:
            out = np.stack([sturmian_codes(p, alpha, -R, R) for p in bases])
        s._cache[key] = out
    return s._cache[key]


def _base_table(s: CubeSetSample, b: int, target, window: int, backend):
    N, d = s.budget.N, s.d
    if s.sys.is_torus:
        orb = orbit_table(s.sys.alpha, s.bases[b], -d * N, d * N)
        return _kernels.torus_dist_table(orb, target, backend)
    codes = _sturmian_base_codes(s, window)[b]
    return _kernels.symbolic_dist_table(codes, target, window, backend)


def nearest_in_sample(c: CubeConfiguration, s: CubeSetSample, window: int = DEFAULT_WINDOW,
                      bound: float = math.inf, backend: Optional[str] = None) -> Nearest:
    """Exact minimum over the sample of the sup-over-vertices distance to ``c``.

    Only configurations strictly closer than ``bound`` are considered; when
    none is, the result carries ``distance == bound`` and no witness.
    """
    if s.nominal_size == 0:
        raise SystemError_("empty sample")
    target = _target_data(c, s, window)
    lb = _base_lower_bounds(s, target, window)
    order = np.lexsort((np.arange(lb.size), lb))
    best = bound
    best_b, best_n = None, None
    for b in order:
        lo = float(lb[b])
        if not lo < best:
            break
        D = _base_table(s, int(b), target, window, backend)
        t = max(2.0 * lo, 2.0**-10)
        while True:
            cap = min(t, best)
            val, n = _kernels.box_search(D, s.d, s.budget.N, cap, backend)
            if n is not None:
                best, best_b, best_n = val, int(b), tuple(int(v) for v in n)
                break
            if cap >= best:
                break
            t *= 2.0
    if best_n is None:
        return Nearest(best, None, None)
    return Nearest(best, s.base_point(best_b), best_n)


def distance_to_sample(c: CubeConfiguration, s: CubeSetSample, window: int = DEFAULT_WINDOW) -> float:
    """Upper bound on the distance from ``c`` to the closure the sample approximates."""
    return nearest_in_sample(c, s, window).distance


# ---------------------------------------------------------------- profiles

@dataclass
class DistanceProfile:
    budgets: list
    distances: list
    witnesses: list

    @property
    def final(self) -> float:
        return self.distances[-1]

    @property
    def plateau(self) -> bool:
        """Relative spread of the last three values below 1%."""
        if len(self.distances) < 3:
            return False
        last = self.distances[-3:]
        hi, lo = max(last), min(last)
        if hi == 0.0:
            return True
        return (hi - lo) / hi < PLATEAU_REL

    def is_monotone(self) -> bool:
        return all(b <= a for a, b in zip(self.distances, self.distances[1:]))

    def verdict(self, tol: float) -> str:
        """``member``, ``non-member-evidence`` or ``inconclusive``."""
        if self.final < tol:
            return "member"
        if self.plateau:
            return "non-member-evidence"
        return "inconclusive"

    def to_dict(self) -> dict:
        return {
            "budgets": [list(b.as_tuple()) for b in self.budgets],
            "distances": list(self.distances),
            "plateau": self.plateau,
            "witnesses": self.witnesses,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DistanceProfile":
        budgets = [SamplingBudget(*b) for b in data["budgets"]]
        return cls(budgets, list(data["distances"]), list(data.get("witnesses", [])))


def check_schedule(schedule: Sequence[SamplingBudget]) -> None:
    if not schedule:
        raise SystemError_("empty budget schedule")
    for a, b in zip(schedule, schedule[1:]):
        if not a.nested_in(b) or a.as_tuple() == b.as_tuple():
            raise SystemError_(
                f"schedule must be strictly increasing and nested: {a.as_tuple()} -> {b.as_tuple()}"
                " (N and orbit length non-decreasing, each grid dividing the next)")


def distance_profile(c: CubeConfiguration, sys: SystemSpec, d: int,
                     schedule: Sequence[SamplingBudget], window: int = DEFAULT_WINDOW,
                     anchor: Optional[Point] = None, backend: Optional[str] = None,
                     extra_bases: Sequence[Point] = ()) -> DistanceProfile:
    """Distances from ``c`` to samples of growing budget.

    With ``anchor`` the samples are face orbits of ``anchor^[d]``, otherwise
    full ``Q^[d]`` samples (base set extended by ``extra_bases``).  Nested budgets make the profile non-increasing;
    each query is bounded by the previous answer.
    """
    check_schedule(schedule)
    dists, wits = [], []
    prev = math.inf
    prev_w = None
    for b in schedule:
        s = (sample_face_orbit(sys, anchor, d, b) if anchor is not None
             else sample_cube_set(sys, d, b, extra_bases))
        res = nearest_in_sample(c, s, window, bound=prev, backend=backend)
        if res.n is not None:
            prev, prev_w = res.distance, res.witness_dict()
        dists.append(prev)
        wits.append(prev_w)
    return DistanceProfile(list(schedule), dists, wits)


# ---------------------------------------------------------------- preimages

def _lift_point(f: FactorMapSpec, base: Point, exponent: int, point: np.ndarray,
                rng: np.random.Generator) -> Point:
    if f.kind is FactorKind.IDENTITY:
        return point
    if f.kind is FactorKind.SKEW_TRUNCATE:
        return np.concatenate([point, rng.random(f.fiber_dim)])
    if f.kind is FactorKind.STURMIAN_TO_ROTATION:
        conv = Convention.LEFT_CLOSED if rng.random() < 0.5 else Convention.RIGHT_CLOSED
        # lift through the witness so points on the orbit of 0 stay exact
        if isinstance(base, SymbolicPoint):
            return SymbolicPoint(base.base, conv, base.steps + exponent)
        return SymbolicPoint(float(np.asarray(base).ravel()[0]), conv, exponent)
    raise SystemError_(f"unsupported fiber structure {f.kind}")


def pick_indices(size: int, count: int, rng: np.random.Generator) -> np.ndarray:
    if count <= size:
        return rng.choice(size, size=count, replace=False)
    return rng.integers(0, size, size=count)


def sample_saturated_preimage(f: FactorMapSpec, d: int, s_down: CubeSetSample, fiber_budget: int,
                              seed: int, up_anchor: Optional[Point] = None) -> list[CubeConfiguration]:
    """Random configurations of ``(pi^[d])^-1`` of the sampled set.

    ``fiber_budget`` configurations are drawn from ``s_down`` (with
    replacement only when it asks for more than the sample holds) and every
    entry is replaced by a uniform point of its fiber.  With ``up_anchor``
    entry 0 is pinned to that point and the others are lifted through it.
    """
    if s_down.sys != f.target or s_down.d != d:
        raise SystemError_("downstairs sample was not drawn on the factor's target")
    rng = np.random.default_rng(seed)
    idx = pick_indices(s_down.nominal_size, fiber_budget, rng)
    bits = cube_bits(d)
    out = []
    for i in idx:
        base, n = s_down.witness(int(i))
        c = generate(f.target, base, n)
        exps = bits @ np.asarray(n, dtype=np.int64)
        if f.kind is FactorKind.IDENTITY and up_anchor is None:
            out.append(c)
            continue
        pts = []
        for e in range(1 << d):
            if up_anchor is not None and e == 0:
                pts.append(up_anchor)
                continue
            lift_base = up_anchor if isinstance(up_anchor, SymbolicPoint) else base
            if f.kind is FactorKind.IDENTITY:
                pts.append(c[e])
            else:
                pts.append(_lift_point(f, lift_base, int(exps[e]), c[e], rng))
        out.append(CubeConfiguration.from_points(d, pts))
    return out


def push_down(f: FactorMapSpec, c: CubeConfiguration) -> CubeConfiguration:
    return CubeConfiguration.from_points(c.d, [apply_factor(f, p) for p in c])
