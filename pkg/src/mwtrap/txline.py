"""Transmission-line quantities for the quarter-wave microwave electrode.

Phasors are plain Python/numpy complex numbers. Frequencies are cyclic (Hz)
at every public boundary.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .constants import C_LIGHT, EPS_EFF_TRAP, EPS_SAPPHIRE
from .errors import DomainError

#: quality-factor sentinel for a loss-free line
LOSSLESS = math.inf

#: impedance returned at a tangent pole of the open-stub formula
OPEN_CIRCUIT = complex(math.inf, 0.0)

# fractional distance (in units of the half-wave period) treated as a pole
_POLE_TOL = 1e-12


def is_lossless(q_tot: float) -> bool:
    return math.isinf(q_tot) and q_tot > 0


def is_open(z) -> bool:
    """True for the open-circuit sentinel (or any infinite impedance)."""
    return cmath.isinf(complex(z))


@dataclass(frozen=True)
class LineSpec:
    """Characteristic impedance, effective permittivity and loss of a line.

    ``q_tot`` is the total quality factor a quarter-wave resonator built from
    the line would have; pass :data:`LOSSLESS` for an ideal conductor.
    """

    z_c: float = 50.0
    eps_eff: float = EPS_EFF_TRAP
    q_tot: float = LOSSLESS

    def __post_init__(self):
        if not self.z_c > 0:
            raise DomainError(f"z_c must be positive, got {self.z_c}")
        if not self.eps_eff >= 1:
            raise DomainError(f"eps_eff must be >= 1, got {self.eps_eff}")
        if not self.q_tot > 0:
            raise DomainError(f"q_tot must be positive, got {self.q_tot}")

    def wavelength(self, frequency: float) -> float:
        return guided_wavelength(frequency, self.eps_eff)

    def gamma(self, frequency: float) -> complex:
        return propagation_constant(self.wavelength(frequency), self.q_tot)


def guided_wavelength(frequency: float, eps_eff: float) -> float:
    """Wavelength c / (sqrt(eps_eff) f) on a line of effective permittivity."""
    if not frequency > 0:
        raise DomainError(f"frequency must be positive, got {frequency}")
    if not eps_eff >= 1:
        raise DomainError(f"eps_eff must be >= 1, got {eps_eff}")
    return C_LIGHT / (math.sqrt(eps_eff) * frequency)


def propagation_constant(wavelength: float, q_tot: float = LOSSLESS) -> complex:
    """Lossy propagation constant ``(2 pi / lambda) (1 / (2 Q) + j)``.

    The real part is exactly zero for ``q_tot = LOSSLESS``.
    """
    if not wavelength > 0:
        raise DomainError(f"wavelength must be positive, got {wavelength}")
    if not q_tot > 0:
        raise DomainError(f"q_tot must be positive, got {q_tot}")
    beta = 2 * math.pi / wavelength
    alpha = 0.0 if is_lossless(q_tot) else beta / (2 * q_tot)
    return complex(alpha, beta)


def shorted_stub_current(u, i0: complex, gamma: complex):
    """Current phasor ``i0 (exp(-gamma u) + exp(gamma u))`` on a shorted line.

    ``u`` is the (non-positive) distance from the short; arrays broadcast.
    Written as ``2 cosh(gamma u)`` so a purely imaginary ``gamma`` yields an
    exactly real standing wave.
    """
    u_arr = np.asarray(u, dtype=float)
    out = 2 * i0 * np.cosh(gamma * u_arr)
    if out.ndim == 0:
        return complex(out)
    return out


def open_stub_impedance(l: float, wavelength: float, z_c: float,
                        convention: str = "plus-cot") -> complex:
    """Input impedance of an open-terminated stub of length ``l``.

    ``convention="plus-cot"`` (default) evaluates ``-j z_c / tan(-2 pi l / lambda)``,
    i.e. ``+j z_c cot``; ``convention="minus-cot"`` evaluates the textbook
    ``-j z_c cot(2 pi l / lambda)``. The two differ only in sign. Poles of the cotangent (l = 0, lambda/2, ...) return
    :data:`OPEN_CIRCUIT`, quarter-wave points return exactly zero.
    """
    if l < 0:
        raise DomainError(f"stub length must be non-negative, got {l}")
    if not wavelength > 0:
        raise DomainError(f"wavelength must be positive, got {wavelength}")
    if not z_c > 0:
        raise DomainError(f"z_c must be positive, got {z_c}")
    if convention not in ("plus-cot", "minus-cot"):
        raise DomainError(f"unknown stub convention {convention!r}")

    phase = math.fmod(2 * l / wavelength, 1.0)  # position within the lambda/2 period
    if phase < _POLE_TOL or 1.0 - phase < _POLE_TOL:
        return OPEN_CIRCUIT
    if abs(phase - 0.5) < _POLE_TOL:
        return 0j
    theta = 2 * math.pi * l / wavelength
    if convention == "plus-cot":
        return -1j * z_c / math.tan(-theta)
    return -1j * z_c / math.tan(theta)


def mismatch_reflection(z_ref: float, z_load) -> float:
    """Reflected power fraction ``|(z_ref - z_load) / (z_ref + z_load)|^2``."""
    if not z_ref > 0:
        raise DomainError(f"z_ref must be positive, got {z_ref}")
    if is_open(z_load):
        return 1.0
    z_load = complex(z_load)
    denom = z_ref + z_load
    if denom == 0:
        raise DomainError("z_load = -z_ref gives an undefined reflection coefficient")
    return abs((z_ref - z_load) / denom) ** 2


def shunt_load(z_series: float, c_shunt: float, frequency: float) -> complex:
    """Impedance of a resistance in parallel with a capacitance to ground."""
    y = 1 / z_series + 1j * 2 * math.pi * frequency * c_shunt
    return 1 / y


class FrequencyShift(NamedTuple):
    dielectric: float
    length: float

    @property
    def total(self) -> float:
        return self.dielectric + self.length


def resonator_frequency_scaling(f0: float, eps_fraction: float = 0.0,
                                length_fraction: float = 0.0,
                                dielectric_model: str = "sapphire",
                                eps_sap: float | None = None) -> FrequencyShift:
    """Resonance shift of a quarter-wave line from permittivity and length changes.

    ``eps_fraction`` is the relative change of the substrate permittivity and
    ``length_fraction`` the relative contraction of the line (positive means
    shorter). Both are returned as separate components in Hz.

    ``dielectric_model="sapphire"`` takes the substrate to dominate, so the
    effective permittivity follows the substrate one-for-one. ``"average"``
    uses ``eps_eff = (1 + eps_sap) / 2``, which gives a smaller shift.
    """
    if abs(eps_fraction) >= 0.1 or abs(length_fraction) >= 0.1:
        raise DomainError("fractional changes must be below 0.1 in magnitude")
    if dielectric_model == "sapphire":
        eps_ratio = 1 + eps_fraction
    elif dielectric_model == "average":
        e = EPS_SAPPHIRE if eps_sap is None else eps_sap
        eps_ratio = (1 + e * (1 + eps_fraction)) / (1 + e)
    else:
        raise DomainError(f"unknown dielectric model {dielectric_model!r}")
    d_eps = f0 * (1 / math.sqrt(eps_ratio) - 1)
    d_len = f0 * (1 / (1 - length_fraction) - 1)
    return FrequencyShift(d_eps, d_len)


def combined_frequency_shift(f0: float, eps_fraction: float, length_fraction: float,
                             dielectric_model: str = "sapphire") -> float:
    """Joint shift with both changes applied at once (not linearised)."""
    s_eps = resonator_frequency_scaling(f0, eps_fraction, 0.0, dielectric_model)
    s_len = resonator_frequency_scaling(f0, 0.0, length_fraction, dielectric_model)
    return f0 * ((1 + s_eps.dielectric / f0) * (1 + s_len.length / f0) - 1)
