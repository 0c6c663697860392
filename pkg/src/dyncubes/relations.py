"""Proximality and regional proximality of order d.

Verdicts on ``RP^[d]`` come from the cube criterion: ``(x, y)`` is in
``RP^[d]`` exactly when ``(x, y, ..., y)`` lies in ``Q^[d+1]``, so
:func:`rp_distance` profiles the distance of that corner configuration to
growing ``Q^[d+1]`` samples.  :func:`rp_witness` searches the definition
directly and is only a diagnostic.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .cubes import corner_config
from .sampler import (
    DEFAULT_WINDOW,
    DistanceProfile,
    SamplingBudget,
    distance_profile,
)
from .systems import (
    Point,
    SymbolicPoint,
    SystemSpec,
    SystemError_,
    apply_power,
    frac,
    orbit_table,
    point_distance,
    sturmian_codes,
)

VERDICTS = {"member": "in", "non-member-evidence": "evidence-out", "inconclusive": "inconclusive"}


def proximal_distance(sys: SystemSpec, x: Point, y: Point, N: int, window: int = DEFAULT_WINDOW) -> float:
    """``min_{|n| <= N} rho(T^n x, T^n y)``."""
    if N < 1:
        raise SystemError_("N must be >= 1")
    return float(pair_orbit_distances(sys, x, y, N, window).min())


def pair_orbit_distances(sys: SystemSpec, x: Point, y: Point, K: int,
                         window: int = DEFAULT_WINDOW) -> np.ndarray:
    """``rho(T^k x, T^k y)`` for ``k = -K..K``."""
    if sys.is_torus:
        ox = orbit_table(sys.alpha, np.asarray(x, float), -K, K)
        oy = orbit_table(sys.alpha, np.asarray(y, float), -K, K)
        diff = np.abs(ox - oy)
        return np.minimum(diff, 1.0 - diff).max(axis=1)
    R = K + window
    cx = sturmian_codes(x, sys.alpha, -R, R)
    cy = sturmian_codes(y, sys.alpha, -R, R)
    width = 2 * window + 1
    wx = np.lib.stride_tricks.sliding_window_view(cx, width)
    wy = np.lib.stride_tricks.sliding_window_view(cy, width)
    lvl = np.abs(np.arange(width) - window)
    lv = np.where(wx != wy, lvl[None, :], window + 1).min(axis=1)
    return np.where(lv <= window, np.exp2(-lv.astype(float)), 0.0)


@dataclass
class RPQuery:
    sys: SystemSpec
    x: Point
    y: Point
    d: int
    schedule: Sequence[SamplingBudget]
    window: int = DEFAULT_WINDOW

    def __post_init__(self):
        if self.d < 1:
            raise SystemError_("d must be >= 1")


def rp_distance(q: RPQuery, backend: Optional[str] = None) -> DistanceProfile:
    """Profile of ``(x, y, ..., y)`` against ``Q^[d+1]`` samples whose base set
    also contains ``x`` and ``y``."""
    c = corner_config(q.x, q.y, q.d + 1)
    return distance_profile(c, q.sys, q.d + 1, q.schedule, q.window, backend=backend,
                            extra_bases=(q.x, q.y))


@dataclass(frozen=True)
class RPWitness:
    x_prime: Point
    y_prime: Point
    n: tuple
    delta: float

    def verify(self, sys: SystemSpec, x: Point, y: Point, window: int = DEFAULT_WINDOW) -> bool:
        """Re-check every inequality of the definition."""
        rho = lambda a, b: point_distance(sys, a, b, window)
        if not (rho(x, self.x_prime) < self.delta and rho(y, self.y_prime) < self.delta):
            return False
        d = len(self.n)
        for eps in itertools.product((0, 1), repeat=d):
            if not any(eps):
                continue
            k = sum(a * b for a, b in zip(self.n, eps))
            if not rho(apply_power(sys, self.x_prime, k), apply_power(sys, self.y_prime, k)) < self.delta:
                return False
        return True

    def to_dict(self) -> dict:
        def enc(p):
            if isinstance(p, SymbolicPoint):
                return {"base": p.base, "steps": p.steps, "convention": p.convention.value}
            return [float(v) for v in p]
        return {"x_prime": enc(self.x_prime), "y_prime": enc(self.y_prime),
                "n": list(self.n), "delta": self.delta}


def _net(sys: SystemSpec, p: Point, delta: float) -> list:
    """Points within ``delta`` of ``p`` on a ``delta/2`` lattice (both codings for Sturmian)."""
    if not sys.is_torus:
        return [p, p.flipped()]
    offs = (0.0, -delta / 2, delta / 2)
    out = []
    for o in itertools.product(offs, repeat=sys.dim):
        out.append(frac(np.asarray(p, float) + np.asarray(o)))
    return out


def rp_witness(sys: SystemSpec, x: Point, y: Point, d: int, delta: float, budget: SamplingBudget,
               window: int = DEFAULT_WINDOW, backend: Optional[str] = None) -> Optional[RPWitness]:
    """First ``(x', y', n)`` satisfying the definition of ``RP^[d]`` at scale ``delta``.

    Search order: net around ``x``, then net around ``y``, then the exponent
    box lexicographically.
    """
    if delta <= 0:
        raise SystemError_("delta must be positive")
    N = budget.N
    K = d * N
    E = 1 << d
    for xp in _net(sys, x, delta):
        if not point_distance(sys, x, xp, window) < delta:
            continue
        for yp in _net(sys, y, delta):
            if not point_distance(sys, y, yp, window) < delta:
                continue
            g = pair_orbit_distances(sys, xp, yp, K, window)
            D = np.empty((E, g.size))
            D[0] = 0.0
            D[1:] = g[None, :]
            val, n = _kernels.box_search(D, d, N, delta, backend)
            if n is not None:
                return RPWitness(xp, yp, tuple(int(v) for v in n), delta)
    return None


def rp_verdict(profile: DistanceProfile, tol: float, witness: Optional[RPWitness] = None) -> dict:
    out = {"verdict": VERDICTS[profile.verdict(tol)], "profile": profile.to_dict()}
    if witness is not None:
        out["witness"] = witness.to_dict()
    return out
