"""Time the compiled and pure-Python kernel backends on identical inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import math
import time

import numpy as np

from swagg.kernels import backends


def best_of(fn, repeat):
    best = math.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def cases(rng):
    ell, n_rec = 2000, 6000
    buckets = np.sort(rng.integers(0, ell, n_rec)).astype(np.int64)
    values = rng.normal(10.0, 2.0, n_rec)
    order = np.lexsort((values, buckets))
    buckets, values = buckets[order], values[order]
    offsets = np.searchsorted(buckets, np.arange(ell + 1)).astype(np.int64)

    n, f = 2000, 20
    X = rng.normal(size=(n, f))
    y = (X[:, 0] + 0.5 * rng.normal(size=n) > 0).astype(np.int64)
    yr = X[:, 0] + rng.normal(size=n)
    xorder = np.argsort(X, axis=0, kind="stable").astype(np.int64)

    w, m = 10, 10
    weights = rng.dirichlet(np.ones(m * w + 1))
    gx, gmu = rng.random(m * w + m + 1), rng.random(m * w + m + 1)

    return {
        "window timecut (w=7)": lambda k: k.window_aggregates_timecut(offsets, values, 7, 6),
        "window sparse (w=7)": lambda k: k.window_aggregates_sparse(buckets, values, ell, 7, 6),
        "split gini": lambda k: k.best_split_class(X, xorder, y, 2),
        "split variance": lambda k: k.best_split_reg(X, xorder, yr),
        "kappa/phi (m=10, w=10)": lambda k: k.exit_expectations(weights, w, gx, gmu, True),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    impls = backends()
    print(f"backends available: {', '.join(impls)}")
    rng = np.random.default_rng(0)
    rows = []
    for name, call in cases(rng).items():
        timings = {b: best_of(lambda: call(mod), args.repeat) for b, mod in impls.items()}
        rows.append((name, timings))
    head = f"{'kernel':26s}" + "".join(f"{b:>12s}" for b in impls) + \
        ("     speedup" if len(impls) > 1 else "")
    print(head)
    for name, timings in rows:
        line = f"{name:26s}" + "".join(f"{timings[b] * 1e3:10.3f}ms" for b in impls)
        if "cython" in timings and "python" in timings:
            line += f"{timings['python'] / timings['cython']:11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
