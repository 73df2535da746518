"""Resonator characterisation shared by the lumped model and the S11 fits."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import DomainError


@dataclass(frozen=True)
class ResonatorParams:
    """One resonance: cyclic frequency plus internal and external Q.

    ``q_tot`` and ``kappa`` are derived, so ``1/q_tot = 1/q_int + 1/q_ext``
    holds by construction.
    """

    f_r: float
    q_int: float
    q_ext: float

    def __post_init__(self):
        for name in ("f_r", "q_int", "q_ext"):
            v = getattr(self, name)
            if not v > 0:
                raise DomainError(f"{name} must be positive, got {v}")
            object.__setattr__(self, name, float(v))

    @classmethod
    def from_total(cls, f_r: float, q_tot: float, q_ext: float) -> "ResonatorParams":
        if not q_ext > q_tot > 0:
            raise DomainError(f"need q_ext > q_tot > 0, got q_tot={q_tot}, q_ext={q_ext}")
        return cls(f_r, 1 / (1 / q_tot - 1 / q_ext), q_ext)

    @property
    def q_tot(self) -> float:
        if math.isinf(self.q_int):
            return self.q_ext
        return 1 / (1 / self.q_int + 1 / self.q_ext)

    @property
    def w_r(self) -> float:
        return 2 * math.pi * self.f_r

    @property
    def kappa(self) -> float:
        """Energy decay rate (rad/s)."""
        return self.w_r / self.q_tot

    @property
    def coupling(self) -> str:
        if math.isclose(self.q_int, self.q_ext, rel_tol=1e-9):
            return "critical"
        return "under" if self.q_ext > self.q_int else "over"

    def as_dict(self) -> dict:
        return {"f_r_hz": self.f_r, "q_tot": self.q_tot, "q_int": self.q_int,
                "q_ext": self.q_ext, "kappa_rad_s": self.kappa, "coupling": self.coupling}
