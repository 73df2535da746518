"""Hot loops for the field engine.

Each kernel exists twice: a numba ``@njit`` version and a pure-numpy one.
Set ``MWTRAP_NO_NUMBA=1`` before import (or call :func:`set_backend`) to force
numpy. Both walk the segments in the same order for every point, so results
do not depend on how points are split across threads.
"""

from __future__ import annotations

import os
import warnings

import numpy as np

from .constants import MU_0

MU0_OVER_4PI = MU_0 / (4 * np.pi)
_NO_NUMBA = os.environ.get("MWTRAP_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    import numba
    from numba import njit, prange

    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def wrap(func):
            return func
        return wrap

    prange = range


def _bfield_numpy(points, starts, ends, cur_re, cur_im, tol):
    n = points.shape[0]
    b_re = np.zeros((n, 3))
    b_im = np.zeros((n, 3))
    bad = np.full(n, -1, dtype=np.int64)
    for j in range(starts.shape[0]):
        seg = ends[j] - starts[j]
        seg2 = seg @ seg
        a1 = points - starts[j]
        a2 = points - ends[j]
        t = np.clip((a1 @ seg) / seg2, 0.0, 1.0)
        off = a1 - t[:, None] * seg
        near = np.einsum("ij,ij->i", off, off) <= tol * tol
        bad[(bad < 0) & near] = j

        n1 = np.sqrt(np.einsum("ij,ij->i", a1, a1))
        n2 = np.sqrt(np.einsum("ij,ij->i", a2, a2))
        dot = np.einsum("ij,ij->i", a1, a2)
        cross = np.cross(a1, a2)
        denom = n1 * n2 * (n1 * n2 + dot)
        with np.errstate(divide="ignore", invalid="ignore"):
            k = np.where(near, 0.0, MU0_OVER_4PI * (n1 + n2) / denom)
        g = cross * k[:, None]
        b_re += g * cur_re[j]
        b_im += g * cur_im[j]
    return b_re, b_im, bad


@njit(parallel=True, cache=True)
def _bfield_numba(points, starts, ends, cur_re, cur_im, tol):  # pragma: no cover - jitted
    n = points.shape[0]
    m = starts.shape[0]
    b_re = np.zeros((n, 3))
    b_im = np.zeros((n, 3))
    bad = np.full(n, -1, dtype=np.int64)
    tol2 = tol * tol
    for i in prange(n):
        px, py, pz = points[i, 0], points[i, 1], points[i, 2]
        for j in range(m):
            sx = ends[j, 0] - starts[j, 0]
            sy = ends[j, 1] - starts[j, 1]
            sz = ends[j, 2] - starts[j, 2]
            ax = px - starts[j, 0]
            ay = py - starts[j, 1]
            az = pz - starts[j, 2]
            bx = px - ends[j, 0]
            by = py - ends[j, 1]
            bz = pz - ends[j, 2]
            seg2 = sx * sx + sy * sy + sz * sz
            t = (ax * sx + ay * sy + az * sz) / seg2
            t = min(max(t, 0.0), 1.0)
            ox = ax - t * sx
            oy = ay - t * sy
            oz = az - t * sz
            if ox * ox + oy * oy + oz * oz <= tol2:
                if bad[i] < 0:
                    bad[i] = j
                continue
            n1 = np.sqrt(ax * ax + ay * ay + az * az)
            n2 = np.sqrt(bx * bx + by * by + bz * bz)
            dot = ax * bx + ay * by + az * bz
            k = MU0_OVER_4PI * (n1 + n2) / (n1 * n2 * (n1 * n2 + dot))
            cx = (ay * bz - az * by) * k
            cy = (az * bx - ax * bz) * k
            cz = (ax * by - ay * bx) * k
            b_re[i, 0] += cx * cur_re[j]
            b_re[i, 1] += cy * cur_re[j]
            b_re[i, 2] += cz * cur_re[j]
            b_im[i, 0] += cx * cur_im[j]
            b_im[i, 1] += cy * cur_im[j]
            b_im[i, 2] += cz * cur_im[j]
    return b_re, b_im, bad


_backend = "numpy" if (_NO_NUMBA or not NUMBA_AVAILABLE) else "numba"


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not NUMBA_AVAILABLE:
        raise RuntimeError("numba is not installed")
    _backend = name


def bfield(points: np.ndarray, starts: np.ndarray, ends: np.ndarray,
           currents: np.ndarray, tol: float, backend: str | None = None):
    """Complex field (N, 3) of straight segments plus per-point offending segment.

    ``bad[i]`` is the index of the first segment within ``tol`` of point ``i``,
    or -1.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    starts = np.ascontiguousarray(starts, dtype=np.float64)
    ends = np.ascontiguousarray(ends, dtype=np.float64)
    currents = np.asarray(currents, dtype=np.complex128)
    cur_re = np.ascontiguousarray(currents.real)
    cur_im = np.ascontiguousarray(currents.imag)
    use = backend or _backend
    if use == "numba":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", category=numba.NumbaWarning)
            b_re, b_im, bad = _bfield_numba(points, starts, ends, cur_re, cur_im, float(tol))
    else:
        b_re, b_im, bad = _bfield_numpy(points, starts, ends, cur_re, cur_im, float(tol))
    return b_re + 1j * b_im, bad
