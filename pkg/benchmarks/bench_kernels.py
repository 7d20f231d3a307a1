"""Compare the compiled dominance kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--sizes 100 400 1600] [--repeats 5]
"""

import argparse
import time

import numpy as np

from vmof import _kernels_py

try:
    from vmof import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

KERNELS = ("nondominated_ranks", "nondominated_mask", "dominator_counts", "crowding_distance")


def best_time(fn, F, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(F)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 400, 1600])
    ap.add_argument("--objectives", type=int, default=3)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    if _compiled is None:
        print("compiled extension not built; only the numpy timings are shown")
    rng = np.random.default_rng(0)
    print("kernel,n,numpy_s,cython_s,speedup")
    for n in args.sizes:
        F = rng.random((n, args.objectives))
        for name in KERNELS:
            t_py = best_time(getattr(_kernels_py, name), F, args.repeats)
            if _compiled is None:
                print(f"{name},{n},{t_py:.3g},,")
                continue
            t_c = best_time(getattr(_compiled, name), F, args.repeats)
            print(f"{name},{n},{t_py:.3g},{t_c:.3g},{t_py / t_c:.1f}")


if __name__ == "__main__":
    main()
