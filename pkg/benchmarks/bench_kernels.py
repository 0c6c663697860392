"""Time the numba kernels against the numpy fallback.

    python benchmarks/bench_kernels.py --repeat 5

Both backends are called in the same process (the env flag only changes the
default), and their outputs are checked for equality before timing.
"""
import argparse
import time

import numpy as np

from dyncubes import _kernels
from dyncubes.cubes import CubeConfiguration
from dyncubes.sampler import SamplingBudget, nearest_in_sample, sample_cube_set
from dyncubes.systems import Convention, SymbolicPoint, SystemSpec, orbit_table, sturmian_codes


def best_of(fn, repeat):
    fn()  # warm-up, includes JIT compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(N, d, seed):
    rng = np.random.default_rng(seed)
    skew = SystemSpec.skew(2)
    target = rng.random((1 << d, 2))
    orb = orbit_table(skew.alpha, np.array([0.1, 0.2]), -d * N, d * N)
    W = 30
    codes = sturmian_codes(SymbolicPoint(0.0, Convention.LEFT_CLOSED), SystemSpec.sturmian().alpha,
                           -(d * N + W), d * N + W)
    tcodes = rng.integers(0, 2, (1 << d, 2 * W + 1)).astype(np.int8)
    D = _kernels.torus_dist_table_np(orb, target)
    sample = sample_cube_set(skew, d, SamplingBudget(N, 4))
    cfg = CubeConfiguration(d, target)
    return {
        "torus_dist_table": lambda be: _kernels.torus_dist_table(orb, target, be),
        "symbolic_dist_table": lambda be: _kernels.symbolic_dist_table(codes, tcodes, W, be),
        "box_search": lambda be: _kernels.box_search(D, d, N, np.inf, be),
        "nearest_in_sample": lambda be: nearest_in_sample(cfg, sample, backend=be).distance,
    }


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    if a is None or b is None:
        return a is b
    return np.array_equal(np.asarray(a), np.asarray(b))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=200)
    ap.add_argument("--d", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    backends = _kernels.available_backends()
    print(f"N={args.N} d={args.d} backends={backends}")
    print(f"{'kernel':22s}" + "".join(f"{b:>12s}" for b in backends) + "     speedup")
    for name, fn in cases(args.N, args.d, args.seed).items():
        outs = [fn(b) for b in backends]
        if not all(same(outs[0], o) for o in outs[1:]):
            raise SystemExit(f"{name}: backends disagree")
        ts = [best_of(lambda: fn(b), args.repeat) for b in backends]
        speed = f"{ts[-1] / ts[0]:8.1f}x" if len(ts) > 1 else "       -"
        print(f"{name:22s}" + "".join(f"{t * 1e3:10.2f}ms" for t in ts) + f"   {speed}")


if __name__ == "__main__":
    main()
