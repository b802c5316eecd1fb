"""Time the compiled kernels against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from gcpr._kernels import _py

try:
    from gcpr._kernels import _cy
except ImportError:  # extension not built
    _cy = None


def cases(rng):
    T = 200
    log_t = np.log(np.arange(1, T + 1.0) / T)
    Q = np.linalg.qr(rng.standard_normal((T, 4)))[0]
    my = rng.standard_normal(T)
    my -= Q @ (Q.T @ my)
    thetas = np.arange(0.05, 10.0, 0.01)
    V = rng.standard_normal((500, 2))
    w = 1.0 - np.arange(1, 9) / 9.0
    e = rng.standard_normal((64, 200, 2))
    F = np.linalg.cholesky(np.array([[1.0, 0.5], [0.5, 1.0]]))
    det = np.ascontiguousarray(rng.standard_normal((200, 4)))
    orders = np.array([2], dtype=np.int64)
    u = rng.standard_normal(500)
    starts = np.arange(0, 480, 20, dtype=np.int64)
    paths = rng.standard_normal((200, 2000))
    return {
        "profile_rss (995 powers, T=200)": ("profile_rss", (log_t, my, Q, thetas, 1.0)),
        "weighted_autocov (n=500, 8 lags)": ("weighted_autocov", (V, w)),
        "sim_moments (64 draws, N=200)": ("sim_moments", (e, F, det, orders)),
        "block_stats (24 blocks of 20)": ("block_stats", (u, starts, 20, 1.0)),
        "intw2 (200 paths of 2000)": ("intw2", (paths,)),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<36}{'numpy ms':>12}{'cython ms':>12}{'speedup':>10}")
    for label, (name, a) in cases(rng).items():
        backends = [_py] + ([_cy] if _cy is not None else [])
        times = []
        for mod in backends:
            fn = getattr(mod, name)
            n = max(1, int(0.2 / max(timeit.timeit(lambda: fn(*a), number=1), 1e-6)))
            times.append(min(timeit.repeat(lambda: fn(*a), number=n, repeat=args.repeat)) / n * 1e3)
        if len(times) == 2:
            print(f"{label:<36}{times[0]:12.3f}{times[1]:12.3f}{times[0] / times[1]:10.1f}x")
        else:
            print(f"{label:<36}{times[0]:12.3f}{'n/a':>12}{'':>10}")


if __name__ == "__main__":
    main()
