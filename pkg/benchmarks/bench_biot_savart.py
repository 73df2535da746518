"""Time the Biot-Savart kernels: numba against the numpy fallback.

    python benchmarks/bench_biot_savart.py [--points 1000000] [--segments 2] [--repeat 3]
"""

import argparse
import time

import numpy as np

from mwtrap import _kernels
from mwtrap.fields import TwoWireModel, WireLayout, WireSegment, bfield_at, plane_grid


def layout_with(n_segments: int) -> WireLayout:
    base = TwoWireModel().to_layout()
    if n_segments <= len(base.segments):
        return base
    # chop the two wires into equal pieces; the field is unchanged
    segs = []
    per = max(1, n_segments // len(base.segments))
    for s in base.segments:
        a, b = np.array(s.start), np.array(s.end)
        knots = [a + (b - a) * k / per for k in range(per + 1)]
        segs += [WireSegment(tuple(p), tuple(q), s.current) for p, q in zip(knots, knots[1:])]
    return WireLayout(segs)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=1_000_000)
    ap.add_argument("--segments", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=3)
    a = ap.parse_args()

    side = int(round(np.sqrt(a.points)))
    grid = plane_grid(40e-6, nx=side, nz=side)
    lay = layout_with(a.segments)
    print(f"{len(grid)} points x {len(lay.segments)} segments")

    results = {}
    for backend in ("numba", "numpy"):
        if backend == "numba" and not _kernels.NUMBA_AVAILABLE:
            print("numba: not installed")
            continue
        bfield_at(lay, grid[:8], backend=backend)  # compile / warm caches
        dt, fmap = best_of(lambda: bfield_at(lay, grid, backend=backend), a.repeat)
        results[backend] = (dt, fmap.b)
        rate = len(grid) * len(lay.segments) / dt
        print(f"{backend:>6}: {dt:8.3f} s  ({rate / 1e6:7.1f} M point-segments/s)")

    if len(results) == 2:
        (t_nb, b_nb), (t_np, b_np) = results["numba"], results["numpy"]
        diff = np.abs(b_nb - b_np).max() / np.abs(b_np).max()
        print(f"speed-up {t_np / t_nb:.1f}x, max relative difference {diff:.1e}")


if __name__ == "__main__":
    main()
