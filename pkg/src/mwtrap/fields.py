"""Biot-Savart field engine for wire-segment models of the microwave electrode.

Coordinates follow the trap convention: ``x`` across the electrode (the static
quantisation axis), ``y`` the height above the chip surface, ``z`` along the
electrode. All quantities are SI; currents and fields are complex phasors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq, minimize

from . import _kernels, txline
from .constants import EPS_EFF_TRAP, F_QUBIT, HBAR, MU_0
from .errors import DomainError, OptimizationError, SingularityError

#: points closer than this to a segment are rejected
ON_WIRE_TOL = 1e-9

GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class WireSegment:
    start: tuple[float, float, float]
    end: tuple[float, float, float]
    current: complex = 1.0

    def __post_init__(self):
        start = tuple(float(v) for v in self.start)
        end = tuple(float(v) for v in self.end)
        if len(start) != 3 or len(end) != 3:
            raise DomainError("segment endpoints must be 3-vectors")
        if start == end:
            raise DomainError(f"degenerate segment at {start}")
        cur = complex(self.current)
        if not (math.isfinite(cur.real) and math.isfinite(cur.imag)):
            raise DomainError("segment current must be finite")
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "end", end)
        object.__setattr__(self, "current", cur)


@dataclass
class WireLayout:
    segments: list[WireSegment]
    name: str = ""
    power_watts: float = 1.0

    def __post_init__(self):
        self.segments = list(self.segments)
        if not self.segments:
            raise DomainError("a layout needs at least one segment")
        if not self.power_watts > 0:
            raise DomainError("power normalisation must be positive")

    def __len__(self) -> int:
        return len(self.segments)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        starts = np.array([s.start for s in self.segments], dtype=float)
        ends = np.array([s.end for s in self.segments], dtype=float)
        currents = np.array([s.current for s in self.segments], dtype=complex)
        return starts, ends, currents

    def scaled(self, alpha: complex) -> "WireLayout":
        segs = [replace(s, current=s.current * alpha) for s in self.segments]
        return WireLayout(segs, self.name, self.power_watts)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "power_watts": self.power_watts,
            "segments": [
                {"start": list(s.start), "end": list(s.end),
                 "current": {"re": s.current.real, "im": s.current.imag}}
                for s in self.segments
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "WireLayout":
        segs = []
        for k, s in enumerate(data["segments"]):
            try:
                cur = s["current"]
                segs.append(WireSegment(tuple(s["start"]), tuple(s["end"]),
                                        complex(cur["re"], cur.get("im", 0.0))))
            except (KeyError, TypeError) as exc:
                raise DomainError(f"segment {k}: missing or malformed field {exc}") from exc
        return cls(segs, data.get("name", ""), float(data.get("power_watts", 1.0)))


@dataclass(frozen=True)
class TwoWireModel:
    """Two counter-propagating wires either side of the ion.

    Wire 1 sits at ``x = -half_separation`` at a distance ``-u1 * wavelength``
    from the short circuit, wire 2 at ``+half_separation`` and ``-u2 *
    wavelength``. Defaults reproduce the trap: 2L = 30 um, d = 40 um,
    u1 = -0.019, u2 = -0.056, lambda at the clock-qubit frequency.
    """

    half_separation: float = 15e-6
    ion_height: float = 40e-6
    u1: float = -0.019
    u2: float = -0.056
    q_tot: float = txline.LOSSLESS
    wavelength: float = field(default_factory=lambda: txline.guided_wavelength(F_QUBIT, EPS_EFF_TRAP))
    i0: complex = 1.0

    def __post_init__(self):
        if not self.half_separation > 0:
            raise DomainError("half_separation must be positive")
        if not self.ion_height > 0:
            raise DomainError("ion_height must be positive")
        for name in ("u1", "u2"):
            if not -0.25 <= getattr(self, name) <= 0:
                raise DomainError(f"{name} must lie in [-0.25, 0]")
        if not self.q_tot > 0:
            raise DomainError("q_tot must be positive")
        if not self.wavelength > 0:
            raise DomainError("wavelength must be positive")

    @property
    def gamma(self) -> complex:
        return txline.propagation_constant(self.wavelength, self.q_tot)

    def currents(self) -> tuple[complex, complex]:
        g = self.gamma
        return (txline.shorted_stub_current(self.u1 * self.wavelength, self.i0, g),
                txline.shorted_stub_current(self.u2 * self.wavelength, self.i0, g))

    def to_layout(self, half_length: float | None = None, name: str = "two-wire") -> WireLayout:
        """Finite wires along z; B_x matches :func:`two_wire_field` as length grows.

        Wire 1 carries its current towards -z and wire 2 towards +z, which gives
        the sign convention ``B_par ~ i1 cos^2(theta1) - i2 cos^2(theta2)``.
        """
        if half_length is None:
            half_length = 100 * self.ion_height
        i1, i2 = self.currents()
        a, h = self.half_separation, half_length
        return WireLayout([
            WireSegment((-a, 0.0, h), (-a, 0.0, -h), i1),
            WireSegment((a, 0.0, -h), (a, 0.0, h), i2),
        ], name=name)


class FieldSample(NamedTuple):
    position: tuple[float, float, float]
    b: tuple[complex, complex, complex]

    @property
    def b_par(self) -> complex:
        return self.b[0]

    @property
    def b_perp(self) -> float:
        return math.hypot(abs(self.b[1]), abs(self.b[2]))


class FieldMap(Sequence):
    """Field phasors at a list of points, stored as arrays.

    Indexing yields :class:`FieldSample`; the array attributes are what
    downstream code should use for large maps.
    """

    def __init__(self, positions: np.ndarray, b: np.ndarray):
        self.positions = positions
        self.b = b

    def __len__(self) -> int:
        return self.positions.shape[0]

    def __getitem__(self, i):
        if isinstance(i, slice):
            return FieldMap(self.positions[i], self.b[i])
        return FieldSample(tuple(self.positions[i]), tuple(complex(v) for v in self.b[i]))

    def __iter__(self) -> Iterator[FieldSample]:
        for i in range(len(self)):
            yield self[i]

    @property
    def b_par(self) -> np.ndarray:
        return self.b[:, 0]

    @property
    def b_perp(self) -> np.ndarray:
        return np.hypot(np.abs(self.b[:, 1]), np.abs(self.b[:, 2]))


def bfield_at(layout: WireLayout, points, normalize_to: float | None = None,
              backend: str | None = None) -> FieldMap:
    """Exact finite-segment Biot-Savart field of ``layout`` at ``points``.

    ``normalize_to`` rescales the result to that input power (W) assuming the
    field grows as the square root of power.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[-1] != 3:
        raise DomainError("points must have shape (N, 3)")
    starts, ends, currents = layout.arrays()
    b, bad = _kernels.bfield(pts, starts, ends, currents, ON_WIRE_TOL, backend=backend)
    hit = np.flatnonzero(bad >= 0)
    if hit.size:
        i = int(hit[0])
        raise SingularityError(
            f"point {i} at {tuple(pts[i])} lies on segment {int(bad[i])}",
            point_index=i, segment_index=int(bad[i]))
    if normalize_to is not None:
        b = b * math.sqrt(normalize_to / layout.power_watts)
    return FieldMap(pts, b)


def two_wire_field(model: TwoWireModel, x):
    """Parallel field ``mu0/(2 pi d) (i1 cos^2 theta1 - i2 cos^2 theta2)`` at ``x``."""
    i1, i2 = model.currents()
    x = np.asarray(x, dtype=float)
    d, a = model.ion_height, model.half_separation
    # cos^2(arctan(s / d)) = d^2 / (d^2 + s^2)
    c1 = d * d / (d * d + (a + x) ** 2)
    c2 = d * d / (d * d + (a - x) ** 2)
    b = np.asarray(MU_0 / (2 * math.pi * d) * (i1 * c1 - i2 * c2))
    if b.ndim == 0:
        return complex(b)
    return b


class FieldMinimum(NamedTuple):
    x0: float
    b_min: float
    non_unimodal: bool
    evaluations: int


def find_field_minimum(field, interval: tuple[float, float], xtol: float = 0.5e-9,
                       scan_points: int = 33) -> FieldMinimum:
    """Golden-section search for the minimum of ``|field|`` on ``interval``.

    ``field`` is a callable of ``x`` returning a magnitude or a phasor, or an
    ``(x, values)`` pair of sampled data which is linearly interpolated.
    Unimodality is assumed; ``non_unimodal`` is set when any interior sample
    (a coarse uniform scan plus every search point) exceeds both neighbours.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not hi > lo:
        raise DomainError("interval must satisfy lo < hi")
    if callable(field):
        def f(x):
            return abs(field(x))
    else:
        xs, vals = (np.asarray(v, dtype=float) for v in field)
        order = np.argsort(xs)
        xs, vals = xs[order], np.abs(vals[order])

        def f(x):
            return float(np.interp(x, xs, vals))

    seen: dict[float, float] = {}

    def ev(x):
        if x not in seen:
            seen[x] = f(x)
        return seen[x]

    for x in np.linspace(lo, hi, scan_points):
        ev(float(x))

    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = ev(c), ev(d)
    while b - a > xtol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = ev(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = ev(d)
    x0 = (a + b) / 2
    b0 = ev(x0)
    for x in (a, b, c, d):
        if ev(x) < b0:
            x0, b0 = x, ev(x)

    xs_seen = np.array(sorted(seen))
    ys_seen = np.array([seen[x] for x in xs_seen])
    interior = ys_seen[1:-1]
    bumpy = bool(np.any((interior > ys_seen[:-2]) & (interior > ys_seen[2:])))
    n_eval = len(seen)

    if callable(field):
        # A real-valued phasor that changes sign has an exact zero; polish it.
        lo_x, hi_x = max(lo, x0 - 2 * xtol), min(hi, x0 + 2 * xtol)
        v_lo, v_hi = complex(field(lo_x)), complex(field(hi_x))
        n_eval += 2
        if v_lo.imag == 0 and v_hi.imag == 0 and v_lo.real * v_hi.real < 0:
            root, info = brentq(lambda x: complex(field(x)).real, lo_x, hi_x,
                                xtol=1e-300, rtol=4 * np.finfo(float).eps, full_output=True)
            n_eval += info.function_calls
            b_root = abs(field(root))
            if b_root <= b0:
                x0, b0 = float(root), float(b_root)
    return FieldMinimum(float(x0), float(b0), bumpy, n_eval)


def field_gradient(field: Callable[[float], complex], x: float, h: float | None = None) -> complex:
    """Central difference with two Richardson levels, default step max(1 nm, 1e-6 |x|)."""
    if h is None:
        h = max(1e-9, 1e-6 * abs(x))

    def central(step):
        return (complex(field(x + step)) - complex(field(x - step))) / (2 * step)

    d1, d2, d4 = central(h), central(h / 2), central(h / 4)
    r1 = (4 * d2 - d1) / 3
    r2 = (4 * d4 - d2) / 3
    return (16 * r2 - r1) / 15


def lamb_dicke(gradient: float, b_amplitude: float, ion_mass: float,
               mode_frequency: float) -> float:
    """``q0 |dB/dx| / |B|`` with ``q0 = sqrt(hbar / (2 m omega))``."""
    for name, v in (("gradient", gradient), ("b_amplitude", b_amplitude),
                    ("ion_mass", ion_mass), ("mode_frequency", mode_frequency)):
        if not v > 0:
            raise DomainError(f"{name} must be positive, got {v}")
    q0 = math.sqrt(HBAR / (2 * ion_mass * 2 * math.pi * mode_frequency))
    return q0 * gradient / b_amplitude


# --- slices used for field-map plots -------------------------------------------------

def transect_grid(height: float, x_range: tuple[float, float] = (-20e-6, 20e-6),
                  n: int = 401, z: float = 0.0) -> np.ndarray:
    """Points along x at fixed height ``y = height``."""
    x = np.linspace(x_range[0], x_range[1], n)
    return np.column_stack([x, np.full(n, height), np.full(n, z)])


def plane_grid(height: float, x_range: tuple[float, float] = (-50e-6, 50e-6),
               z_range: tuple[float, float] = (-50e-6, 50e-6), nx: int = 101,
               nz: int = 101) -> np.ndarray:
    """Points on the plane ``y = height``, x varying fastest."""
    x = np.linspace(x_range[0], x_range[1], nx)
    z = np.linspace(z_range[0], z_range[1], nz)
    zz, xx = np.meshgrid(z, x, indexing="ij")
    return np.column_stack([xx.ravel(), np.full(xx.size, height), zz.ravel()])


# --- geometry optimisation -----------------------------------------------------------

OBJECTIVES = ("gradient", "amplitude", "ratio")


@dataclass
class OptimizationResult:
    params: dict[str, float]
    value: float
    objective: str
    trace: list[tuple[dict[str, float], float]]
    seed_values: list[float]
    bound_limited: list[str]
    unbounded: bool = False

    @property
    def status(self) -> str:
        if self.unbounded:
            return "unbounded"
        return "bound-limited" if self.bound_limited else "interior"


def _seeds(n: int) -> list[np.ndarray]:
    """Box centre plus four fixed corners of the unit cube."""
    lo, hi = np.zeros(n), np.ones(n)
    alt = np.arange(n) % 2 == 0
    return [np.full(n, 0.5), lo, hi, np.where(alt, 0.0, 1.0), np.where(alt, 1.0, 0.0)]


def _simplex(start: np.ndarray, size: float = 0.25) -> np.ndarray:
    verts = [start]
    for k in range(start.size):
        v = start.copy()
        v[k] += size if start[k] <= 0.5 else -size
        verts.append(v)
    return np.array(verts)


def optimize_geometry(template, objective: str, bounds: dict[str, tuple[float, float]],
                      eval_x: float = 0.0, eval_point=None, maxiter: int = 400,
                      xatol: float = 1e-6, fatol: float = 1e-12) -> OptimizationResult:
    """Bounded Nelder-Mead over up to eight geometry parameters.

    ``template`` is a :class:`TwoWireModel` (parameters are its field names,
    evaluated at ``x = eval_x``) or a callable mapping a parameter dict to a
    :class:`WireLayout` (evaluated at ``eval_point``, with the gradient of
    ``B_x`` taken along x). ``objective`` maximises ``|dB_par/dx|``
    (``"gradient"``), minimises ``|B_par|`` (``"amplitude"``) or maximises
    their ratio. Runs start at the bound-box centre and four fixed corners;
    the best run wins.

    An infinite ratio (vanishing amplitude) stops the search and is reported
    as ``unbounded``; NaN raises :class:`OptimizationError`.
    """
    if objective not in OBJECTIVES:
        raise DomainError(f"objective must be one of {OBJECTIVES}")
    names = list(bounds)
    if not 1 <= len(names) <= 8:
        raise DomainError("between 1 and 8 free parameters are supported")
    lo = np.array([bounds[k][0] for k in names], dtype=float)
    hi = np.array([bounds[k][1] for k in names], dtype=float)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(hi > lo)):
        raise DomainError("bounds must be finite with lo < hi")

    if isinstance(template, TwoWireModel):
        def fields_at(p):
            m = replace(template, **p)
            fx = lambda x: two_wire_field(m, x)  # noqa: E731
            return fx(eval_x), field_gradient(fx, eval_x)
    else:
        if eval_point is None:
            raise DomainError("eval_point is required for layout templates")
        p0 = np.asarray(eval_point, dtype=float)

        def fields_at(p):
            layout = template(p)
            fx = lambda x: bfield_at(layout, [p0 + [x - p0[0], 0, 0]]).b[0, 0]  # noqa: E731
            return fx(p0[0]), field_gradient(fx, p0[0])

    def measure(p):
        amp, grad = fields_at(p)
        amp, grad = abs(amp), abs(grad)
        if objective == "gradient":
            return grad
        if objective == "amplitude":
            return amp
        return grad / amp if amp > 0 else (math.inf if grad > 0 else math.nan)

    sign = 1.0 if objective == "amplitude" else -1.0
    trace: list[tuple[dict[str, float], float]] = []

    class _Unbounded(Exception):
        pass

    def to_params(z):
        z = np.clip(z, 0.0, 1.0)
        return {k: float(v) for k, v in zip(names, lo + z * (hi - lo))}

    def cost(z):
        p = to_params(z)
        v = measure(p)
        trace.append((p, v))
        if math.isnan(v) or (math.isinf(v) and sign > 0):
            raise OptimizationError(f"objective is {v} at {p}", params=p)
        if math.isinf(v):
            raise _Unbounded
        return sign * v

    seed_values = []
    best_z, best_cost = None, math.inf
    unbounded = False
    for z0 in _seeds(len(names)):
        try:
            seed_values.append(sign * cost(z0))
            res = minimize(cost, z0, method="Nelder-Mead", bounds=[(0, 1)] * len(names),
                           options={"initial_simplex": _simplex(z0), "maxiter": maxiter,
                                    "xatol": xatol, "fatol": fatol})
        except _Unbounded:
            unbounded = True
            best_z = np.array(list(trace[-1][0].values()))
            best_z = (best_z - lo) / (hi - lo)
            break
        if res.fun < best_cost:
            best_z, best_cost = np.clip(res.x, 0, 1), float(res.fun)

    params = to_params(best_z)
    value = math.inf if unbounded else sign * best_cost
    edge = np.minimum(np.abs(best_z), np.abs(1 - best_z)) < 1e-3
    limited = [k for k, e in zip(names, edge) if e]
    if unbounded:
        limited = names
    return OptimizationResult(params, value, objective, trace, seed_values, limited, unbounded)
