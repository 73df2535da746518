"""Metal resistivity from internal Q, and the field-gain it predicts on cooling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple

from ..constants import RHO_GOLD_300K
from ..errors import DomainError
from .params import ResonatorParams
from .s11 import s11_device


class ResistivityEntry(NamedTuple):
    temperature: float
    q_int: float
    rho: float


@dataclass(frozen=True)
class ResistivitySeries:
    entries: tuple[ResistivityEntry, ...]
    anchor_temperature: float
    anchor_rho: float

    @property
    def rrr(self) -> float:
        """Anchor resistivity over that at the lowest temperature."""
        coldest = min(self.entries, key=lambda e: e.temperature)
        return self.anchor_rho / coldest.rho

    def rho_at(self, temperature: float) -> float:
        for e in self.entries:
            if e.temperature == temperature:
                return e.rho
        raise KeyError(temperature)


def resistivity_from_q(series, anchor_rho: float = RHO_GOLD_300K,
                       anchor_temperature: float = 300.0) -> ResistivitySeries:
    """Scale ``rho = anchor_rho * q_int(anchor) / q_int(T)``, assuming Q_int ~ 1/rho."""
    pairs = [(float(t), float(q)) for t, q in series]
    if not pairs:
        raise DomainError("empty series")
    if any(q <= 0 for _, q in pairs):
        raise DomainError("q_int values must be positive")
    if not anchor_rho > 0:
        raise DomainError("anchor resistivity must be positive")
    q_anchor = [q for t, q in pairs if t == anchor_temperature]
    if not q_anchor:
        raise DomainError(f"anchor temperature {anchor_temperature} K not in series")
    # exact rational product, rounded once
    ka = Fraction(anchor_rho) * Fraction(q_anchor[0])
    entries = tuple(ResistivityEntry(t, q, float(ka / Fraction(q))) for t, q in pairs)
    return ResistivitySeries(entries, anchor_temperature, anchor_rho)


def _coupled_energy(p: ResonatorParams) -> float:
    on_res = abs(complex(s11_device(p.f_r, p)))
    return math.sqrt(p.q_tot * (1 - on_res ** 2))


#: field-amplitude figures of merit, up to a temperature-independent factor
SCALING_MODELS: dict[str, Callable[[ResonatorParams], float]] = {
    "coupled_energy": _coupled_energy,
    "q_tot": lambda p: p.q_tot,
    "sqrt_q_int": lambda p: math.sqrt(p.q_int),
}


def gradient_scaling_prediction(params_by_temperature, model: str = "coupled_energy"):
    """Predicted field (and gradient) ratio relative to the warmest entry.

    ``coupled_energy`` takes the field to follow ``sqrt(Q_tot (1 - |S11_dev(w_r)|^2))``;
    ``q_tot`` and ``sqrt_q_int`` are the simpler alternatives. Returns
    ``[(T, ratio), ...]`` in input order.
    """
    items = [(float(t), p) for t, p in params_by_temperature]
    if len(items) < 2:
        raise DomainError("need at least two temperatures")
    try:
        metric = SCALING_MODELS[model]
    except KeyError:
        raise DomainError(f"unknown scaling model {model!r}") from None
    t_ref, p_ref = max(items, key=lambda it: it[0])
    ref = metric(p_ref)
    return [(t, metric(p) / ref) for t, p in items]


def compare_scaling_models(params_by_temperature) -> dict[str, list[tuple[float, float]]]:
    return {name: gradient_scaling_prediction(params_by_temperature, name)
            for name in SCALING_MODELS}
