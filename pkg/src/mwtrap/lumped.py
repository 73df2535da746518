"""Lumped-element equivalent of the capacitively coupled quarter-wave resonator.

Topology: a parallel L-C-R tank to ground, connected through a series
coupling capacitor ``c_couple`` to a resistive feedline ``z_feed``. Modes are
the complex zeros of the node admittance

    Y(w) = 1/(j w L) + j w C + 1/R + 1/(z_feed + 1/(j w c_couple))

with time dependence ``exp(j w t)``, so a decaying mode has ``Im(w) > 0`` and
energy decay rate ``kappa = 2 Im(w)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from . import txline
from .errors import ConvergenceError, DomainError

#: scale factors for the limiting quality-factor decomposition
DECOUPLE_SCALE = 1e-4
LOSSLESS_SCALE = 1e6

NEWTON_RTOL = 1e-10
NEWTON_MAXITER = 200


def quarter_wave_equivalent(f0: float, z0: float) -> tuple[float, float]:
    """Parallel ``(L, C)`` with the input impedance of a shorted lambda/4 line."""
    if not (f0 > 0 and z0 > 0):
        raise DomainError("f0 and z0 must be positive")
    w0 = 2 * math.pi * f0
    return 4 * z0 / (math.pi * w0), math.pi / (4 * w0 * z0)


@dataclass(frozen=True)
class LumpedResonator:
    """L-C-R tank with coupling capacitor and resistive feed (SI units).

    ``c_couple = 0`` is allowed and means the tank is disconnected from the
    feed.
    """

    l_ind: float
    c_cap: float
    r_int: float
    c_couple: float
    z_feed: float = 50.0

    def __post_init__(self):
        for name in ("l_ind", "c_cap", "r_int", "z_feed"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise DomainError(f"{name} must be positive and finite, got {v}")
        if not (self.c_couple >= 0 and math.isfinite(self.c_couple)):
            raise DomainError(f"c_couple must be non-negative, got {self.c_couple}")

    @classmethod
    def from_quarter_wave(cls, f0: float, z0: float, r_int: float, c_couple: float,
                          z_feed: float = 50.0) -> "LumpedResonator":
        l_ind, c_cap = quarter_wave_equivalent(f0, z0)
        return cls(l_ind, c_cap, r_int, c_couple, z_feed)

    @classmethod
    def reference_circuit(cls) -> "LumpedResonator":
        """3.7 GHz / 60 ohm tank, 1.4 kohm loss, 400 fF coupling, 50 ohm feed."""
        return cls.from_quarter_wave(3.7e9, 60.0, 1.4e3, 400e-15, 50.0)

    @property
    def f_unloaded(self) -> float:
        return 1 / (2 * math.pi * math.sqrt(self.l_ind * self.c_cap))

    @property
    def q_unloaded(self) -> float:
        """Internal Q of the bare tank, ``R sqrt(C / L)``."""
        return self.r_int * math.sqrt(self.c_cap / self.l_ind)

    def admittance(self, w):
        """Node admittance at (possibly complex) angular frequency ``w``."""
        w = np.asarray(w, dtype=complex)
        y = 1 / (1j * w * self.l_ind) + 1j * w * self.c_cap + 1 / self.r_int
        if self.c_couple > 0:
            jwc = 1j * w * self.c_couple
            y = y + jwc / (1 + jwc * self.z_feed)
        return y

    def admittance_derivative(self, w):
        w = np.asarray(w, dtype=complex)
        dy = -1 / (1j * w * w * self.l_ind) + 1j * self.c_cap
        if self.c_couple > 0:
            jwc = 1j * w * self.c_couple
            dy = dy + 1j * self.c_couple / (1 + jwc * self.z_feed) ** 2
        return dy


class LoadedResonance(NamedTuple):
    """A single circuit mode: cyclic frequency, energy decay rate, Q."""

    f_r: float
    kappa: float
    pole: complex
    iterations: int

    @property
    def q_tot(self) -> float:
        return 2 * math.pi * self.f_r / self.kappa


def loaded_resonance(circuit: LumpedResonator, w_start: complex | None = None) -> LoadedResonance:
    """Newton search for the tank mode, started at the unloaded resonance."""
    w = complex(2 * math.pi * circuit.f_unloaded if w_start is None else w_start)
    history = [w]
    for it in range(1, NEWTON_MAXITER + 1):
        with np.errstate(divide="ignore", invalid="ignore"):
            step = complex(circuit.admittance(w) / circuit.admittance_derivative(w))
        w = w - step
        history.append(w)
        if not (math.isfinite(w.real) and math.isfinite(w.imag)):
            break
        if abs(step) < NEWTON_RTOL * abs(w):
            if w.real <= 0:
                break
            return LoadedResonance(w.real / (2 * math.pi), 2 * abs(w.imag), w, it)
    raise ConvergenceError(
        f"pole search did not converge in {NEWTON_MAXITER} iterations",
        last_iterate=w, history=history)


@dataclass(frozen=True)
class QDecomposition:
    """Quality factors from the limiting procedure.

    ``q_int`` comes from the circuit with ``c_couple`` scaled by
    :data:`DECOUPLE_SCALE`, ``q_ext`` from the circuit with ``r_int`` scaled by
    :data:`LOSSLESS_SCALE`. Since each limit moves the mode frequency, the
    three values only approximately satisfy the harmonic identity; see
    :attr:`residual`.
    """

    f_r: float
    kappa: float
    q_tot: float
    q_int: float
    q_ext: float

    @property
    def residual(self) -> float:
        """``(1/q_tot - 1/q_int - 1/q_ext) * q_tot``, zero for an exact split."""
        return (1 / self.q_tot - 1 / self.q_int - 1 / self.q_ext) * self.q_tot

    def to_params(self):
        """Harmonic-consistent parameters built from ``q_int`` and ``q_ext``."""
        from .fitting.params import ResonatorParams
        return ResonatorParams(self.f_r, self.q_int, self.q_ext)


def quality_factor_decomposition(circuit: LumpedResonator) -> QDecomposition:
    full = loaded_resonance(circuit)
    uncoupled = loaded_resonance(replace(circuit, c_couple=circuit.c_couple * DECOUPLE_SCALE))
    lossless = loaded_resonance(replace(circuit, r_int=circuit.r_int * LOSSLESS_SCALE))
    return QDecomposition(full.f_r, full.kappa, full.q_tot, uncoupled.q_tot, lossless.q_tot)


@dataclass(frozen=True)
class ShiftReport:
    """Frequency-shift components (Hz) of the cool-down budget."""

    dielectric: float
    coupling: float
    resistance: float
    contraction: float
    f_base: float

    @property
    def total(self) -> float:
        return self.dielectric + self.coupling + self.resistance + self.contraction

    def as_dict(self) -> dict:
        return {
            "dielectric_hz": self.dielectric,
            "coupling_hz": self.coupling,
            "resistance_hz": self.resistance,
            "contraction_hz": self.contraction,
            "total_hz": self.total,
            "f_base_hz": self.f_base,
        }


def frequency_shift_report(circuit: LumpedResonator, eps_fraction: float, r_factor: float,
                           contraction: float, f_meas_room: float,
                           dielectric_model: str = "sapphire") -> ShiftReport:
    """Budget the resonance shift between two temperatures.

    The line-level components (permittivity, contraction) scale
    ``f_meas_room``; the coupling capacitor (taken proportional to the substrate
    permittivity) and the tank resistance are re-solved in the lumped model.
    """
    if abs(eps_fraction) >= 0.1:
        raise DomainError("eps_fraction must be below 0.1 in magnitude")
    if not r_factor > 0:
        raise DomainError("r_factor must be positive")
    base = loaded_resonance(circuit)
    line = txline.resonator_frequency_scaling(f_meas_room, eps_fraction, contraction,
                                              dielectric_model=dielectric_model)
    coupled = loaded_resonance(replace(circuit, c_couple=circuit.c_couple * (1 + eps_fraction)))
    resist = loaded_resonance(replace(circuit, r_int=circuit.r_int * r_factor))
    return ShiftReport(
        dielectric=line.dielectric,
        coupling=coupled.f_r - base.f_r,
        resistance=resist.f_r - base.f_r,
        contraction=line.length,
        f_base=base.f_r,
    )
