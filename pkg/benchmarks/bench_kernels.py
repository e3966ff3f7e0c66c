"""Time the numba and numpy versions of each hot kernel on the same inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--scale 1.0]

Each kernel is first called once so JIT compilation is excluded; the best
of ``--repeat`` wall-clock runs is reported along with the max deviation
between the two outputs.
"""

import argparse
import time

import numpy as np

from gblstsvm import _accel, _kernels


def _best_time(fn, args, repeat):
    fn(*[a.copy() if isinstance(a, np.ndarray) else a for a in args])
    best = np.inf
    out = None
    for _ in range(repeat):
        fresh = [a.copy() if isinstance(a, np.ndarray) else a for a in args]
        t0 = time.perf_counter()
        out = fn(*fresh)
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(scale, rng):
    n = int(300 * scale)
    A = rng.standard_normal((n, n))
    Q = A @ A.T / n + np.eye(n)
    b = rng.standard_normal(n)
    yield "cd_dense", f"n={n}", (Q, b, np.zeros(n), 1e-10, 10 * n + 1000)

    k, cols = int(5000 * scale), 33
    # entries ~ N(0, 1/k) keep Z Z' + I well conditioned
    Z = rng.standard_normal((k, cols)) / np.sqrt(k)
    d = np.full(k, 1.0)
    b = rng.standard_normal(k)
    yield "cd_factored", f"k={k} cols={cols}", (Z, d, b, np.zeros(k), 1e-10, 10 * k + 1000)

    m, dim = int(50000 * scale), 32
    X = np.vstack([rng.standard_normal((m // 2, dim)) - 1.0, rng.standard_normal((m - m // 2, dim)) + 1.0])
    yield "two_means", f"m={m} dim={dim}", (X, X[0].copy(), X[-1].copy(), 100)
    yield "farthest", f"m={m} dim={dim}", (X, X[0].copy())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--scale", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(a.seed)
    print(f"{'kernel':<12} {'size':<18} {'numba ms':>10} {'numpy ms':>10} {'speedup':>8} {'max diff':>10}")
    for name, size, args in cases(a.scale, rng):
        jit, ref = _kernels.IMPLEMENTATIONS[name]
        tj, oj = _best_time(jit, args, a.repeat)
        tn, on = _best_time(ref, args, a.repeat)
        first_j = oj[0] if isinstance(oj, tuple) else oj
        first_n = on[0] if isinstance(on, tuple) else on
        diff = float(np.max(np.abs(np.asarray(first_j, float) - np.asarray(first_n, float))))
        print(f"{name:<12} {size:<18} {tj * 1e3:10.2f} {tn * 1e3:10.2f} {tn / tj:8.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
