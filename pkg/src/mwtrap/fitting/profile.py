"""Fit of ion-measured parallel-field magnitudes across the trap axis.

The complex field near the minimum is ``B(x) = B_x0 + exp(i phi) g (x - x0)``.
From magnitudes alone the offset, phase and residual amplitude are not
separately identifiable, so the fit uses

    |B(x)|^2 = b_min^2 + g^2 (x - x0)^2

with ``x0`` the location of the minimum and ``b_min`` the field there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, FitError
from .lm import levenberg_marquardt

MIN_SAMPLES = 5
PHI_NOTE = "not identifiable from magnitude data"


@dataclass
class FieldProfile:
    """|B_par| samples (m, T) at a given input power (W)."""

    x: np.ndarray
    b: np.ndarray
    power_watts: float = 1.0
    temperature: float | None = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        if self.x.shape != self.b.shape or self.x.ndim != 1:
            raise DomainError("x and b must be 1-D and equally long")
        if np.any(self.b < 0):
            raise DomainError("field magnitudes must be non-negative")
        if not self.power_watts > 0:
            raise DomainError("input power must be positive")

    def normalized(self, power_watts: float = 1.0) -> "FieldProfile":
        """Rescale to another input power using B ~ sqrt(P)."""
        scale = math.sqrt(power_watts / self.power_watts)
        return FieldProfile(self.x, self.b * scale, power_watts, self.temperature)


@dataclass
class ProfileFitResult:
    gradient: float
    b_min: float
    x0: float
    b_par_at_null: float
    residual: float
    stderr: dict[str, float]
    power_watts: float = 1.0
    phi: str = PHI_NOTE

    def model(self, x):
        return profile_model(x, self.gradient, self.x0, self.b_min)

    def as_dict(self) -> dict:
        return {
            "gradient_t_per_m": self.gradient,
            "b_min_t": self.b_min,
            "x0_m": self.x0,
            "b_par_at_null_t": self.b_par_at_null,
            "phi": self.phi,
            "residual_rms_t": self.residual,
            "normalized_power_w": self.power_watts,
            "stderr": dict(self.stderr),
        }


def profile_model(x, gradient, x0, b_min):
    x = np.asarray(x, dtype=float)
    return np.sqrt(b_min ** 2 + (gradient * (x - x0)) ** 2)


def _quadratic_seed(u, v):
    """Seed from a linear fit of v^2 = a2 u^2 + a1 u + a0."""
    a2, a1, a0 = np.polyfit(u, v * v, 2)
    if a2 <= 0:
        i = int(np.argmin(v))
        span = np.ptp(u) or 1.0
        return 2 * np.ptp(v) / span, u[i], v[i]
    x0 = -a1 / (2 * a2)
    bmin2 = a0 - a1 * a1 / (4 * a2)
    return math.sqrt(a2), x0, math.sqrt(max(bmin2, 0.0))


def fit_field_profile(profile: FieldProfile, normalize_to: float = 1.0) -> ProfileFitResult:
    """Fit gradient, minimum location and minimum amplitude.

    The profile is first rescaled to ``normalize_to`` watts.
    """
    if profile.x.size < MIN_SAMPLES:
        raise DomainError(f"need at least {MIN_SAMPLES} samples, got {profile.x.size}")
    prof = profile.normalized(normalize_to)
    xs = float(np.ptp(prof.x)) or 1.0
    bs = float(np.max(prof.b)) or 1.0
    xc = float(np.mean(prof.x))
    u = (prof.x - xc) / xs
    v = prof.b / bs

    g0, x00, bmin0 = _quadratic_seed(u, v)

    def fun(p):
        return np.sqrt(p[2] ** 2 + (p[0] * (u - p[1])) ** 2) - v

    def jac(p):
        m = np.sqrt(p[2] ** 2 + (p[0] * (u - p[1])) ** 2)
        m = np.where(m > 0, m, 1e-300)
        d = u - p[1]
        return np.column_stack([p[0] * d * d / m, -p[0] ** 2 * d / m, p[2] / m])

    res = levenberg_marquardt(fun, [g0, x00, bmin0], jac=jac)
    g, x0u, bmin = abs(res.x[0]), res.x[1], abs(res.x[2])
    if not (np.any(u < x0u) and np.any(u > x0u)):
        raise DomainError("samples lie on one side of the fitted minimum")
    if not g > 0:
        raise FitError("fit returned zero gradient", last_iterate=res.x, history=res.history)

    gradient = float(g * bs / xs)
    x0 = float(xc + x0u * xs)
    b_min = float(bmin * bs)
    cov = res.covariance()
    sd = np.sqrt(np.clip(np.diag(cov), 0, None))
    at_null = float(profile_model(0.0, gradient, x0, b_min))
    stderr = {"gradient_t_per_m": float(sd[0] * bs / xs), "x0_m": float(sd[1] * xs),
              "b_min_t": float(sd[2] * bs)}
    rms = float(math.sqrt(res.cost / u.size) * bs)
    return ProfileFitResult(gradient, b_min, x0, at_null, rms, stderr, normalize_to)
