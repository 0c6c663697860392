"""Hot loops: distance tables and the exact branch-and-bound box search.

Each kernel has a numba implementation and a pure-numpy one with identical
results.  Set ``DYNCUBES_DISABLE_NUMBA=1`` to force the numpy path (numba is
also skipped automatically when it cannot be imported).

Box search
----------
Given a table ``D[e, k]`` holding the distance between entry ``e`` of a
target configuration and ``T^(k - d*N) b`` for a base point ``b``, find

    min over n in [-N, N]^d of max over e of D[e, n.e + d*N]

restricted to values strictly below ``bound``.  Entries are grouped by their
highest set bit, so after choosing ``n_1..n_i`` every entry supported on the
first ``i`` bits is known and the partial maximum prunes the rest of the box.
Each coordinate is enumerated centre-out (0, 1, -1, 2, -2, ...) and ties
resolve to the first ``n`` in that lexicographic order (``n_1`` slowest).
"""
from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("DYNCUBES_DISABLE_NUMBA", "").strip().lower()
NUMBA_REQUESTED = _FLAG not in ("1", "true", "yes", "on")

try:
    if not NUMBA_REQUESTED:
        raise ImportError
    import numba as nb
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on the environment
    nb = None
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


# ---------------------------------------------------------------- numpy path

def centre_out(N: int) -> np.ndarray:
    j = np.arange(2 * N + 1, dtype=np.int64)
    return np.where(j % 2 == 1, (j + 1) // 2, -(j // 2))


def torus_dist_table_np(orbit: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """``D[e, k] = max_i wrap|orbit[k, i] - targets[e, i]|``."""
    diff = np.abs(orbit[None, :, :] - targets[:, None, :])
    diff = np.minimum(diff, 1.0 - diff)
    return diff.max(axis=2)


def symbolic_dist_table_np(base_codes: np.ndarray, target_codes: np.ndarray, window: int) -> np.ndarray:
    """Symbolic distances between shifted base codings and target codings.

    ``base_codes`` covers offsets ``-K0-window .. K0+window`` around the base,
    ``target_codes`` has shape ``(E, 2*window+1)``.  Output shape ``(E, 2*K0+1)``.
    """
    width = 2 * window + 1
    n_k = base_codes.shape[0] - 2 * window
    win = np.lib.stride_tricks.sliding_window_view(base_codes, width)[:n_k]
    # scan order 0, +1, -1, +2, -2, ... so the first mismatch has least |t|
    order = np.empty(width, dtype=np.int64)
    order[0] = window
    order[1::2] = window + np.arange(1, window + 1)
    order[2::2] = window - np.arange(1, window + 1)
    level = np.abs(order - window)
    mism = win[None, :, order] != target_codes[:, None, order]
    any_m = mism.any(axis=2)
    first = np.argmax(mism, axis=2)
    out = np.where(any_m, np.exp2(-level[first].astype(float)), 0.0)
    return out


def box_search_np(D: np.ndarray, d: int, N: int, bound: float):
    off = d * N
    m0 = D[0, off]
    if not m0 < bound:
        return bound, None
    ns = centre_out(N)
    prefix = np.zeros((1, 0), dtype=np.int64)
    expo = np.zeros((1, 1), dtype=np.int64)
    cur = np.array([m0])
    for level in range(d):
        half = 1 << level
        new_expo = expo[:, None, :] + ns[None, :, None]
        rows = half + np.arange(half)
        vals = D[rows[None, None, :], new_expo + off]
        newmax = np.maximum(cur[:, None], vals.max(axis=2))
        ip, i_n = np.nonzero(newmax < bound)
        if ip.size == 0:
            return bound, None
        prefix = np.concatenate([prefix[ip], ns[i_n][:, None]], axis=1)
        expo = np.concatenate([expo[ip], new_expo[ip, i_n]], axis=1)
        cur = newmax[ip, i_n]
    i = int(np.argmin(cur))
    return float(cur[i]), prefix[i].copy()


# ---------------------------------------------------------------- numba path

if HAVE_NUMBA:

    @nb.njit(cache=True, nogil=True)
    def _torus_dist_table_nb(orbit, targets):
        E, s = targets.shape
        K = orbit.shape[0]
        out = np.empty((E, K))
        for e in range(E):
            for k in range(K):
                m = 0.0
                for i in range(s):
                    v = abs(orbit[k, i] - targets[e, i])
                    w = 1.0 - v
                    if w < v:
                        v = w
                    if v > m:
                        m = v
                out[e, k] = m
        return out

    @nb.njit(cache=True, nogil=True)
    def _symbolic_dist_table_nb(base_codes, target_codes, window):
        E = target_codes.shape[0]
        K = base_codes.shape[0] - 2 * window
        out = np.zeros((E, K))
        for e in range(E):
            for k in range(K):
                c = k + window
                if base_codes[c] != target_codes[e, window]:
                    out[e, k] = 1.0
                    continue
                for t in range(1, window + 1):
                    if (base_codes[c + t] != target_codes[e, window + t]
                            or base_codes[c - t] != target_codes[e, window - t]):
                        out[e, k] = 2.0 ** (-t)
                        break
        return out

    @nb.njit(cache=True, nogil=True)
    def _box_search_nb(D, d, N, bound):
        E = 1 << d
        off = d * N
        best = bound
        best_n = np.zeros(d, np.int64)
        found = False
        m0 = D[0, off]
        if not m0 < best:
            return best, best_n, found
        n = np.zeros(d, np.int64)
        expo = np.zeros(E, np.int64)
        levmax = np.empty(d + 1)
        levmax[0] = m0
        j = np.zeros(d, np.int64)
        level = 0
        j[0] = -1
        while level >= 0:
            j[level] += 1
            if j[level] > 2 * N:
                level -= 1
                continue
            jl = j[level]
            n[level] = (jl + 1) // 2 if jl % 2 == 1 else -(jl // 2)
            half = 1 << level
            m = levmax[level]
            ok = True
            for e in range(half):
                ex = expo[e] + n[level]
                expo[half + e] = ex
                v = D[half + e, ex + off]
                if v > m:
                    m = v
                if not m < best:
                    ok = False
                    break
            if not ok:
                continue
            if level == d - 1:
                best = m
                for i in range(d):
                    best_n[i] = n[i]
                found = True
            else:
                levmax[level + 1] = m
                level += 1
                j[level] = -1
        return best, best_n, found


# ---------------------------------------------------------------- dispatch

def torus_dist_table(orbit, targets, backend: str | None = None):
    if (backend or BACKEND) == "numba":
        return _torus_dist_table_nb(np.ascontiguousarray(orbit), np.ascontiguousarray(targets))
    return torus_dist_table_np(orbit, targets)


def symbolic_dist_table(base_codes, target_codes, window: int, backend: str | None = None):
    if (backend or BACKEND) == "numba":
        return _symbolic_dist_table_nb(np.ascontiguousarray(base_codes, dtype=np.int8),
                                       np.ascontiguousarray(target_codes, dtype=np.int8), window)
    return symbolic_dist_table_np(base_codes, target_codes, window)


def box_search(D, d: int, N: int, bound: float, backend: str | None = None):
    """Return ``(value, n)``; ``n`` is None when nothing lies strictly below ``bound``."""
    if (backend or BACKEND) == "numba":
        val, n, found = _box_search_nb(np.ascontiguousarray(D), d, N, float(bound))
        return (float(val), n.copy()) if found else (float(bound), None)
    return box_search_np(D, d, N, bound)


def available_backends() -> list[str]:
    return ["numba", "numpy"] if HAVE_NUMBA else ["numpy"]
