"""Time the RK4 kernels with numba against the pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--steps 4096] [--n 2] [--repeat 5]

Both backends are imported from the same module; the numpy path is the one
selected when FRANKS_DISABLE_NUMBA=1 is set.
"""

import argparse
import time

import numpy as np

from franks import _kernels


def _samples(steps, n, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((3, steps, n, n))
    R = 0.5 * (X + np.swapaxes(X, -1, -2))
    return R[0], R[1], R[2]


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench(steps=4096, n=2, batch=64, repeat=5):
    h = np.full(steps, 1.0 / steps)
    Rs, Rm, Re = _samples(steps, n)
    Y0 = np.hstack([np.eye(n), np.zeros((n, n))])
    P0 = np.hstack([np.zeros((n, n)), np.eye(n)])
    M = np.zeros((batch, steps, 2 * n, 2 * n))
    M[:, :, :n, n:] = np.eye(n)
    M[:, :, n:, :n] = -Rs
    cases = {
        "rk4_jacobi": (
            lambda: _kernels.rk4_jacobi_numpy(h, Rs, Rm, Re, Y0, P0),
            lambda: _kernels.rk4_jacobi_numba(h, Rs, Rm, Re, Y0, P0),
        ),
        "rk4_riccati": (
            lambda: _kernels.rk4_riccati_numpy(h, 0.1 * Rs, 0.1 * Rm, 0.1 * Re, np.zeros((n, n))),
            lambda: _kernels.rk4_riccati_numba(h, 0.1 * Rs, 0.1 * Rm, 0.1 * Re, np.zeros((n, n))),
        ),
        "rk4_linear_batch": (
            lambda: _kernels.rk4_linear_batch_numpy(h, M, M, M, np.broadcast_to(np.eye(2 * n), (batch, 2 * n, 2 * n)).copy()),
            lambda: _kernels.rk4_linear_batch_numba(h, M, M, M, np.broadcast_to(np.eye(2 * n), (batch, 2 * n, 2 * n)).copy()),
        ),
    }
    rows = []
    for name, (f_np, f_nb) in cases.items():
        t_np, out_np = _best(f_np, repeat)
        if _kernels.HAVE_NUMBA:
            f_nb()  # compile
            t_nb, out_nb = _best(f_nb, repeat)
            a = out_np[0] if isinstance(out_np, tuple) else out_np
            b = out_nb[0] if isinstance(out_nb, tuple) else out_nb
            diff = float(np.max(np.abs(a - b)))
        else:
            t_nb, diff = float("nan"), float("nan")
        rows.append((name, t_np, t_nb, diff))
    return rows


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--steps", type=int, default=4096)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--repeat", type=int, default=5)
    a = p.parse_args()
    print(f"steps={a.steps} n={a.n} batch={a.batch} numba available: {_kernels.HAVE_NUMBA}")
    print(f"{'kernel':<18}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}{'max diff':>12}")
    for name, t_np, t_nb, diff in bench(a.steps, a.n, a.batch, a.repeat):
        print(f"{name:<18}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>10.1f}{diff:>12.2e}")


if __name__ == "__main__":
    main()
