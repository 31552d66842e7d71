"""Compare the compiled kernels against the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints the best-of-N wall time of each kernel for both backends and checks
that the two agree.
"""
import argparse
import time

import numpy as np

from paircal import _kernels_py, source

try:
    from paircal import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases():
    rng = np.random.default_rng(0)
    n = 1_000_000
    l = rng.poisson(3.0, n).astype(np.int64)
    m = rng.poisson(2.0, n).astype(np.int64)
    c = rng.binomial(l, 0.4).astype(np.int64)
    g_p = source.pmf_array(source.poisson(20.0), source.default_cutoff("poisson", 20.0, 1e-18))
    g_t = source.pmf_array(source.thermal(5.0), source.default_cutoff("thermal", 5.0, 1e-18))
    yield f"accumulate ({n:,} records)", lambda k: k.accumulate(l, m, c)
    yield f"triple_sum (poisson N=20, K={len(g_p) - 1})", lambda k: k.triple_sum(g_p, 0.6, 0.4, 4)
    yield f"triple_sum (thermal N=5, K={len(g_t) - 1})", lambda k: k.triple_sum(g_t, 0.6, 0.4, 4)
    yield f"coincidence_sum (thermal N=5, K={len(g_t) - 1})", lambda k: k.coincidence_sum(g_t, 0.6, 0.4, 2)


def _flat(out):
    if isinstance(out, tuple):
        return np.concatenate([np.ravel(np.asarray(x, dtype=float)) for x in out])
    return np.ravel(np.asarray(out, dtype=float))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled kernels not built; only the fallback is timed")
    print(f"{'kernel':48s} {'cython [s]':>11s} {'python [s]':>11s} {'speedup':>8s}  max rel diff")
    for label, call in cases():
        t_py, out_py = best_of(lambda: call(_kernels_py), args.repeat)
        if _kernels is None:
            print(f"{label:48s} {'-':>11s} {t_py:11.4f}")
            continue
        t_cy, out_cy = best_of(lambda: call(_kernels), args.repeat)
        a, b = _flat(out_cy), _flat(out_py)
        diff = np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300))
        print(f"{label:48s} {t_cy:11.4f} {t_py:11.4f} {t_py / t_cy:7.1f}x  {diff:.1e}")


if __name__ == "__main__":
    main()
