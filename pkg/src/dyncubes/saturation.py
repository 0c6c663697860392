"""Experiment drivers: cube saturation, face-orbit saturation, unique completion
and the Sturmian boundary patterns.

Every report keeps the raw profiles it was built from and recomputes its
verdict from them, so a report loaded from JSON can be re-checked.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .cubes import CubeConfiguration, vertex_label
from .sampler import (
    DEFAULT_WINDOW,
    CubeSetSample,
    DistanceProfile,
    SamplingBudget,
    check_schedule,
    distance_profile,
    sample_cube_set,
    sample_face_orbit,
    sample_saturated_preimage,
)
from .systems import (
    GOLDEN,
    Convention,
    FactorKind,
    FactorMapSpec,
    Point,
    SymbolicPoint,
    SystemSpec,
    SystemError_,
    apply_factor,
    boundary_pair,
    sturmian_codes,
)

CONSISTENT = "CONSISTENT"
VIOLATION = "VIOLATION-EVIDENCE"
INCONCLUSIVE = "INCONCLUSIVE"

EXIT_OK = 0
EXIT_VIOLATION = 2
EXIT_INCONCLUSIVE = 3

DEFAULT_TOL = 0.05
DEFAULT_DELTA_MATCH = 0.01
DEFAULT_FACTOR_C = 3.0


def _pmap(fn: Callable, items: Sequence, threads: int = 1) -> list:
    """Order-preserving map; the kernels release the GIL so threads help."""
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def profiles_verdict(profiles: Sequence[DistanceProfile], tol: float) -> str:
    finals = [p.final for p in profiles]
    if all(v < tol for v in finals):
        return CONSISTENT
    if any(p.plateau and p.final >= tol for p in profiles):
        return VIOLATION
    return INCONCLUSIVE


@dataclass
class SaturationReport:
    experiment: str
    system: str
    factor: str
    d: int
    tol: float
    labels: list
    profiles: list
    configs: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def finals(self) -> list:
        return [p.final for p in self.profiles]

    @property
    def max_final(self) -> float:
        return max(self.finals) if self.profiles else 0.0

    @property
    def n_plateaued(self) -> int:
        return sum(1 for p in self.profiles if p.plateau and p.final >= self.tol)

    @property
    def verdict(self) -> str:
        return profiles_verdict(self.profiles, self.tol)

    def summary(self) -> dict:
        return {"max_final": self.max_final, "n_plateaued": self.n_plateaued,
                "n_profiles": len(self.profiles), "tol": self.tol, "verdict": self.verdict}

    def to_dict(self) -> dict:
        profs = []
        for i, (lab, p) in enumerate(zip(self.labels, self.profiles)):
            item = {"id": i, "label": lab, **p.to_dict()}
            if self.configs:
                item["config"] = self.configs[i]
            profs.append(item)
        return {
            "experiment": self.experiment,
            "params": {"system": self.system, "factor": self.factor, "d": self.d,
                       "tol": self.tol, **self.extra},
            "profiles": profs,
            "summary": self.summary(),
            "verdict": self.verdict,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SaturationReport":
        params = dict(data["params"])
        system, factor = params.pop("system"), params.pop("factor")
        d, tol = params.pop("d"), params.pop("tol")
        profs = data["profiles"]
        return cls(data["experiment"], system, factor, d, tol,
                   [p["label"] for p in profs],
                   [DistanceProfile.from_dict(p) for p in profs],
                   [p["config"] for p in profs if "config" in p], params)


# ---------------------------------------------------------------- predictions

def predicts_saturation(f: FactorMapSpec, d: int) -> bool:
    """Whether ``Q^[d]`` of the source is expected to be saturated over ``f``.

    For the affine skew maps the maximal ``(d-1)``-step factor keeps the first
    ``min(d-1, s)`` coordinates, so any truncation at least that long works.
    The Sturmian coding is only almost one-to-one over the rotation and
    saturation fails from ``d = 2`` on.
    """
    if f.kind is FactorKind.IDENTITY:
        return True
    if f.kind is FactorKind.SKEW_TRUNCATE:
        return f.k >= min(d - 1, f.source.dim)
    return d < 2


def predicts_unique_completion(sys: SystemSpec, d: int) -> bool:
    """Cubes of dimension ``d`` complete uniquely on systems of order ``d - 1``."""
    return sys.nil_order is not None and sys.nil_order <= d - 1


def exit_code(verdict: str, expect_consistent: bool) -> int:
    if verdict == INCONCLUSIVE:
        return EXIT_INCONCLUSIVE
    if expect_consistent:
        return EXIT_OK if verdict == CONSISTENT else EXIT_VIOLATION
    return EXIT_OK if verdict == VIOLATION else EXIT_INCONCLUSIVE


# ---------------------------------------------------------------- saturation

def _config_label(c: CubeConfiguration) -> str:
    if c.is_torus:
        return ";".join(",".join(f"{v:.6f}" for v in row) for row in c.entries)
    return ";".join(f"{p.convention.short}{p.steps:+d}" for p in c.entries)


def _profile_many(configs, sys, d, schedule, window, anchor, threads, backend):
    fn = lambda c: distance_profile(c, sys, d, schedule, window, anchor=anchor, backend=backend)
    return _pmap(fn, configs, threads)


def check_cube_saturation(sys: SystemSpec, f: FactorMapSpec, d: int, schedule: Sequence[SamplingBudget],
                          n_trials: int, tol: float = DEFAULT_TOL, seed: int = 0,
                          window: int = DEFAULT_WINDOW, down_budget: Optional[SamplingBudget] = None,
                          threads: int = 1, backend: Optional[str] = None) -> SaturationReport:
    """Lift random ``Q^[d]`` configurations of the factor and profile them upstairs.

    The downstairs sample uses the last schedule budget unless ``down_budget``
    is given.
    """
    if f.source != sys:
        raise SystemError_("factor source differs from the system")
    if n_trials < 1:
        raise SystemError_("n_trials must be >= 1")
    check_schedule(schedule)
    down = down_budget or schedule[-1]
    s_down = sample_cube_set(f.target, d, down)
    lifts = sample_saturated_preimage(f, d, s_down, n_trials, seed)
    profiles = _profile_many(lifts, sys, d, schedule, window, None, threads, backend)
    return SaturationReport(
        "SATURATION", sys.label(), f.label(), d, tol,
        [_config_label(c) for c in lifts], profiles, [c.to_list() for c in lifts],
        {"n_trials": n_trials, "seed": seed, "window": window,
         "down_budget": list(down.as_tuple()),
         "predicted": CONSISTENT if predicts_saturation(f, d) else VIOLATION})


def check_face_saturation(sys: SystemSpec, f: FactorMapSpec, d: int, x: Point,
                          schedule: Sequence[SamplingBudget], n_trials: int, tol: float = DEFAULT_TOL,
                          seed: int = 0, window: int = DEFAULT_WINDOW,
                          down_budget: Optional[SamplingBudget] = None, threads: int = 1,
                          backend: Optional[str] = None) -> SaturationReport:
    """Lift the face orbit of ``pi(x)^[d]`` with entry 0 pinned to ``x`` and
    profile the lifts against the face orbit of ``x^[d]``."""
    if f.source != sys:
        raise SystemError_("factor source differs from the system")
    if n_trials < 1:
        raise SystemError_("n_trials must be >= 1")
    check_schedule(schedule)
    if sys.is_torus:
        x = np.atleast_1d(np.asarray(x, dtype=float))
    y = apply_factor(f, x)
    down = down_budget or schedule[-1]
    s_down = sample_face_orbit(f.target, y, d, down)
    lifts = sample_saturated_preimage(f, d, s_down, n_trials, seed, up_anchor=x)
    pinned = all(_same_point(c[0], x) for c in lifts)
    profiles = _profile_many(lifts, sys, d, schedule, window, x, threads, backend)
    return SaturationReport(
        "FACE_SATURATION", sys.label(), f.label(), d, tol,
        [_config_label(c) for c in lifts], profiles, [c.to_list() for c in lifts],
        {"n_trials": n_trials, "seed": seed, "window": window, "anchor": _encode_point(x),
         "down_budget": list(down.as_tuple()), "pin_exact": pinned,
         "predicted": CONSISTENT if predicts_saturation(f, d) else INCONCLUSIVE})


def _same_point(a: Point, b: Point) -> bool:
    if isinstance(a, SymbolicPoint) or isinstance(b, SymbolicPoint):
        return a == b
    return bool(np.array_equal(np.asarray(a), np.asarray(b)))


def _encode_point(p: Point):
    if isinstance(p, SymbolicPoint):
        return {"base": p.base, "steps": p.steps, "convention": p.convention.value}
    return [float(v) for v in np.atleast_1d(p)]


# ---------------------------------------------------------------- unique completion

@dataclass
class CompletionReport:
    d: int
    delta_match: float
    factor_c: float
    n_configs: int
    n_pairs: int
    max_last: float
    pairs: list  # worst pairs first: dicts with omitted vertex, indices, witnesses and distances

    @property
    def verdict(self) -> str:
        return completion_verdict(self.max_last, self.delta_match, self.factor_c)

    def to_dict(self) -> dict:
        return {"d": self.d, "delta_match": self.delta_match, "factor_c": self.factor_c,
                "n_configs": self.n_configs, "n_pairs": self.n_pairs, "max_last": self.max_last,
                "pairs": self.pairs, "verdict": self.verdict}


def completion_verdict(max_last: float, delta_match: float, factor_c: float) -> str:
    if max_last < factor_c * delta_match:
        return CONSISTENT
    if max_last > 10 * factor_c * delta_match:
        return VIOLATION
    return INCONCLUSIVE


def _wrap_sup(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = np.abs(a - b)
    return np.minimum(diff, 1.0 - diff).max(axis=-1)


def _torus_pairs(s: CubeSetSample, delta: float):
    """Yield ``(omitted, i, j, shared, last)`` arrays, one batch per vertex."""
    cfg = s.configs()
    M, E, dim = cfg.shape
    cfg = np.where(cfg >= 1.0, 0.0, cfg)
    for v in range(E):
        keep = [e for e in range(E) if e != v]
        rest = cfg[:, keep, :].reshape(M, -1)
        tree = cKDTree(rest, boxsize=1.0)
        pairs = tree.query_pairs(r=delta, p=np.inf, output_type="ndarray")
        if pairs.size == 0:
            continue
        i, j = pairs[:, 0], pairs[:, 1]
        shared = _wrap_sup(rest[i].reshape(-1, E - 1, dim), rest[j].reshape(-1, E - 1, dim)).max(axis=1)
        last = _wrap_sup(cfg[i, v], cfg[j, v])
        yield v, i, j, shared, last


def _sturmian_pairs(s: CubeSetSample, delta: float):
    """Same as :func:`_torus_pairs` by grouping identical coding windows.

    Codings agreeing on ``|t| <= k`` are within ``2^-(k+1)``; ``k`` is the
    least level for which that is below ``delta``.
    """
    k = max(0, math.ceil(-math.log2(delta)) - 1)
    while 2.0 ** -(k + 1) >= delta:
        k += 1
    _, steps, conv = s.sturmian_arrays()
    M, E = steps.shape
    lo, hi = int(steps.min()) - k, int(steps.max()) + k
    alpha = s.sys.alpha
    left = sturmian_codes(SymbolicPoint(0.0, Convention.LEFT_CLOSED), alpha, lo, hi)
    right = left.copy()
    for pos, val in ((0, 1), (-1, 0)):
        if lo <= pos <= hi:
            right[pos - lo] = val
    offs = np.arange(-k, k + 1)
    is_r = (conv == "R")[:, None, None]
    idx = steps[:, :, None] + offs[None, None, :] - lo
    codes = np.where(is_r, right[idx], left[idx]).astype(np.int8)  # (M, E, 2k+1)
    for v in range(E):
        keep = [e for e in range(E) if e != v]
        rest = np.ascontiguousarray(codes[:, keep, :]).reshape(M, -1)
        groups: dict = {}
        for m in range(M):
            groups.setdefault(rest[m].tobytes(), []).append(m)
        ii, jj = [], []
        for members in groups.values():
            for a, b in itertools.combinations(members, 2):
                ii.append(a)
                jj.append(b)
        if not ii:
            continue
        i, j = np.asarray(ii), np.asarray(jj)
        diff = codes[i, v] != codes[j, v]
        lvl = np.abs(offs)
        lv = np.where(diff, lvl[None, :], k + 1).min(axis=1)
        last = np.where(lv <= k, np.exp2(-lv.astype(float)), 0.0)
        yield v, i, j, np.zeros(i.size), last


def unique_completion_check(s: CubeSetSample, delta_match: float = DEFAULT_DELTA_MATCH,
                            factor_c: float = DEFAULT_FACTOR_C, top_k: int = 20) -> CompletionReport:
    """Find configuration pairs of ``s`` sharing ``2^d - 1`` entries within
    ``delta_match`` and record how far apart the remaining entry is."""
    if s.nominal_size == 0:
        raise SystemError_("empty sample")
    if delta_match <= 0 or factor_c <= 0:
        raise SystemError_("delta_match and factor_c must be positive")
    batches = _torus_pairs(s, delta_match) if s.sys.is_torus else _sturmian_pairs(s, delta_match)
    n_pairs = 0
    max_last = 0.0
    worst: list = []
    for v, i, j, shared, last in batches:
        n_pairs += int(i.size)
        max_last = max(max_last, float(last.max()))
        order = np.argsort(-last, kind="stable")[:top_k]
        for t in order:
            worst.append((float(last[t]), v, int(i[t]), int(j[t]), float(shared[t])))
    worst.sort(key=lambda r: (-r[0], r[1], r[2], r[3]))
    pairs = []
    for last, v, i, j, shared in worst[:top_k]:
        (bi, ni), (bj, nj) = s.witness(i), s.witness(j)
        pairs.append({"omitted": vertex_label(v, s.d), "i": i, "j": j,
                      "witness_i": {"x": _encode_point(bi), "n": list(ni)},
                      "witness_j": {"x": _encode_point(bj), "n": list(nj)},
                      "shared_distance": shared, "last_distance": last})
    return CompletionReport(s.d, delta_match, factor_c, s.nominal_size, n_pairs, max_last, pairs)


# ---------------------------------------------------------------- Sturmian patterns

def boundary_disagreements(alpha: float = GOLDEN, n_max: int = 1000) -> list[int]:
    """Positions ``|n| <= n_max`` where the codings of the two boundary points differ."""
    x1, x2 = boundary_pair(alpha)
    c1 = sturmian_codes(x1, alpha, -n_max, n_max)
    c2 = sturmian_codes(x2, alpha, -n_max, n_max)
    return [int(n) for n in np.nonzero(c1 != c2)[0] - n_max]


def pattern_config(pattern: Sequence[int], d: int) -> CubeConfiguration:
    x = boundary_pair()
    if len(pattern) != 1 << d:
        raise SystemError_(f"pattern needs {1 << d} entries")
    return CubeConfiguration(d, tuple(x[int(b)] for b in pattern))


def sturmian_counterexample(d: int, schedule: Sequence[SamplingBudget], W: int = DEFAULT_WINDOW,
                            alpha: float = GOLDEN, threads: int = 1,
                            backend: Optional[str] = None) -> list[tuple[tuple, DistanceProfile]]:
    """Profiles of every pattern over ``{x1, x2}^[d]``, sorted by final distance.

    Pattern entries are 0 for ``x1`` (left-closed coding of 0) and 1 for ``x2``.
    """
    if d not in (2, 3):
        raise SystemError_("d must be 2 or 3")
    check_schedule(schedule)
    sys = SystemSpec.sturmian(alpha)
    patterns = list(itertools.product((0, 1), repeat=1 << d))
    fn = lambda pat: distance_profile(pattern_config(pat, d), sys, d, schedule, W, backend=backend)
    profiles = _pmap(fn, patterns, threads)
    ranked = sorted(zip(patterns, profiles), key=lambda t: t[1].final)
    return ranked


def cex_report(ranked, d: int, tol: float, W: int, alpha: float) -> SaturationReport:
    labels = ["".join(str(b) for b in pat) for pat, _ in ranked]
    return SaturationReport("STURMIAN_CEX", SystemSpec.sturmian(alpha).label(), "none", d, tol,
                            labels, [p for _, p in ranked], [],
                            {"window": W, "boundary_disagreements": boundary_disagreements(alpha)})
