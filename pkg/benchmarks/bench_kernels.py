"""Compiled loop kernels against their numpy counterparts.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each row reports the best wall time of both forms after one warm-up call and
the largest absolute difference between their outputs.
"""

import argparse
import time

import numpy as np

from fpetpf._accel import HAVE_NUMBA
from fpetpf.dtw import dtw_table_loop, dtw_table_numpy
from fpetpf.euler import GasConstants, Grid, FlowState, max_wave_speeds, weno_divergence_loop, weno_divergence_numpy


def best_time(fn, args, repeat):
    fn(*args)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def sod_lines(n, lines):
    grid = Grid((n,), (0.0,), (1.0,))
    x = grid.axes[0]
    state = FlowState.from_primitive(grid, np.where(x < 0.5, 1.0, 0.125), 0.0, np.where(x < 0.5, 1.0, 0.1), GasConstants())
    q = np.ascontiguousarray(np.repeat(state.q[:, None, :], lines, axis=1))
    return q, max_wave_speeds(state.q, 1.4)[0]


def weno_cases(repeat):
    for n, lines in ((501, 1), (5001, 1), (101, 101), (401, 401)):
        q, alpha = sod_lines(n, lines)
        args = (q, 1, 1.4, alpha, float(n - 1))
        t_loop, a = best_time(weno_divergence_loop, args, repeat)
        t_np, b = best_time(weno_divergence_numpy, args, repeat)
        yield f"weno  {lines}x{n}", t_loop, t_np, float(np.max(np.abs(a - b)))


def dtw_cases(repeat):
    rng = np.random.default_rng(0)
    for n, dim in ((501, 1), (2001, 1), (101, 101), (401, 401)):
        a = rng.standard_normal((n, dim))
        b = rng.standard_normal((n, dim))
        t_loop, (da, ma) = best_time(dtw_table_loop, (a, b, 2.0), repeat)
        t_np, (db, mb) = best_time(dtw_table_numpy, (a, b, 2.0), repeat)
        diff = abs(da - db) if np.array_equal(ma, mb) else np.inf
        yield f"dtw   {n}x{n} dim {dim}", t_loop, t_np, float(diff)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is unavailable or disabled; the loop kernels would run as plain Python")
    print(f"{'case':<26}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>9}{'max diff':>11}")
    for rows in (weno_cases(args.repeat), dtw_cases(args.repeat)):
        for name, t_loop, t_np, diff in rows:
            print(f"{name:<26}{1e3 * t_loop:>12.2f}{1e3 * t_np:>12.2f}{t_np / t_loop:>9.1f}{diff:>11.2e}")


if __name__ == "__main__":
    main()
