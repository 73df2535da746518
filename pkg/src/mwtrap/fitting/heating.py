"""Power-law temperature scaling of motional heating rates."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy import stats

from ..errors import DomainError


class PowerLawFit(NamedTuple):
    beta: float
    prefactor: float
    stderr: float

    def rate(self, temperature):
        return self.prefactor * np.asarray(temperature, dtype=float) ** self.beta


def fit_power_law(samples) -> PowerLawFit:
    """Ordinary least squares of ln(rate) on ln(T); ``stderr`` is that of beta.

    With two samples the slope is exact and ``stderr`` is 0.
    """
    data = np.asarray(list(samples), dtype=float)
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 2:
        raise DomainError("need at least two (temperature, rate) pairs")
    if np.any(data <= 0):
        raise DomainError("temperatures and rates must be positive")
    lt, lr = np.log(data[:, 0]), np.log(data[:, 1])
    if np.ptp(lt) == 0:
        raise DomainError("temperatures must not all be equal")
    if data.shape[0] == 2:
        beta = (lr[0] - lr[1]) / (lt[0] - lt[1])
        return PowerLawFit(float(beta), float(math.exp(lr[0] - beta * lt[0])), 0.0)
    reg = stats.linregress(lt, lr)
    return PowerLawFit(float(reg.slope), float(math.exp(reg.intercept)), float(reg.stderr))
