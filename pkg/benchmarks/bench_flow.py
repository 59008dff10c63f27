"""Exit-time tracing: numba kernel versus the pure-numpy path.

    python3 benchmarks/bench_flow.py [--sizes 256 1024 4096] [--repeat 3]

Both backends run the same batch of boundary trajectories on the Funk disk
and must agree to 1e-12 before timings are reported.
"""
import argparse
import time

import numpy as np

from finsler_santalo import FunkBall, Domain
from finsler_santalo.geodesics import integrand_bump, trace_to_exit
from finsler_santalo.measures import boundary_normals


def batch(m, dom, size, seed=0):
    rng = np.random.default_rng(seed)
    th = rng.uniform(0, 2 * np.pi, size)
    x = dom.params["radius"] * np.stack([np.cos(th), np.sin(th)], -1)
    n_plus, _ = boundary_normals(m, dom, x)
    # rotate the inward normal by up to +-80 degrees, stays inward
    a = rng.uniform(-1.4, 1.4, size)
    c, s = np.cos(a), np.sin(a)
    w = np.stack([c * n_plus[:, 0] - s * n_plus[:, 1], s * n_plus[:, 0] + c * n_plus[:, 1]], -1)
    return x, w / m.F(x, w)[:, None]


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[256, 1024, 4096])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--dt", type=float, default=1e-3)
    args = ap.parse_args(argv)

    m, dom, f = FunkBall(2), Domain.ball(0.5), integrand_bump()
    x, y = batch(m, dom, 8)
    trace_to_exit(m, dom, x, y, f, args.dt, from_boundary=True, backend="numba")  # compile

    print(f"{'batch':>7} {'numba [s]':>11} {'numpy [s]':>11} {'speedup':>8} {'max |dI|':>10}")
    for size in args.sizes:
        x, y = batch(m, dom, size)
        tn, a = best_of(lambda: trace_to_exit(m, dom, x, y, f, args.dt, from_boundary=True,
                                              backend="numba"), args.repeat)
        tp, b = best_of(lambda: trace_to_exit(m, dom, x, y, f, args.dt, from_boundary=True,
                                              backend="numpy"), args.repeat)
        diff = float(np.max(np.abs(a.integral - b.integral)))
        if diff > 1e-12 or np.max(np.abs(a.t_exit - b.t_exit)) > 1e-12:
            raise SystemExit(f"backends disagree at batch {size}: {diff:.3g}")
        print(f"{size:>7} {tn:>11.4f} {tp:>11.4f} {tp / tn:>8.1f} {diff:>10.2e}")


if __name__ == "__main__":
    main()
