"""Timing comparison of the numba and numpy vertical-integration backends.

Runs the five-kernel vertical quadrature on the standard grids and one full
linear solve per dimension, through each backend. Usage:

    python3 benchmarks/bench_backends.py [--repeat N]

Timings go to stdout; nothing here feeds the deterministic report paths.
"""

import argparse
import time

import numpy as np

from halfspace_ns import backend
from halfspace_ns.fields import HalfSpaceField, TangentialField
from halfspace_ns.grid import desk_grid
from halfspace_ns.kernels import l_apply
from halfspace_ns.stokes import linear_solve


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_vertical(n, repeat):
    grid = desk_grid(n)
    rng = np.random.default_rng(42)
    src = HalfSpaceField.random(grid, 1, rng, band=(0.5, 8.0), with_tail=True)
    heights = grid.centers()
    rows = []
    for name in ("numba", "numpy"):
        def run():
            for j in range(1, 6):
                l_apply(j, 1, grid, src.slabs[0], src.tail[0], heights, backend_name=name)
        try:
            run()  # warm the jit cache outside the timed region
            rows.append((name, _time(run, repeat)))
        except ImportError:
            rows.append((name, None))
    return grid, rows


def bench_solve(n, repeat):
    grid = desk_grid(n)
    rng = np.random.default_rng(7)
    nv = grid.d + 1
    a = TangentialField.random(grid, nv, rng, band=(0.5, 4.0), amplitude=1e-3)
    F = HalfSpaceField.random(grid, nv * nv, rng, band=(0.5, 4.0), amplitude=1e-3)
    import halfspace_ns.backend as bk

    rows = []
    for name in ("numba", "numpy"):
        def run():
            linear_solve(a, F).sample()
        old = bk._selected
        try:
            bk._selected = name
            if name == "numba":
                bk._load_numba_backend()
            run()
            rows.append((name, _time(run, repeat)))
        except ImportError:
            rows.append((name, None))
        finally:
            bk._selected = old
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    print(f"active backend: {backend.warmup()}")
    for n in (3, 4):
        grid, rows = bench_vertical(n, args.repeat)
        label = f"five kernels x {grid.M} heights, n={n} (N={grid.N}, M={grid.M})"
        for name, t in rows:
            stat = "unavailable" if t is None else f"{t:8.3f}s"
            print(f"{label:<55} {name:<6} {stat}")
        for name, t in bench_solve(n, args.repeat):
            stat = "unavailable" if t is None else f"{t:8.3f}s"
            print(f"{'full linear solve + sample, n=%d' % n:<55} {name:<6} {stat}")


if __name__ == "__main__":
    main()
