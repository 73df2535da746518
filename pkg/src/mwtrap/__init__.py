"""Models, field engine and fits for microwave-driven surface-electrode ion traps."""

from . import fields, fitting, lumped, txline
from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    FitError,
    MwtrapError,
    OptimizationError,
    ParseError,
    SeedError,
    SingularityError,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "ConvergenceError", "DomainError", "FitError", "MwtrapError",
    "OptimizationError", "ParseError", "SeedError", "SingularityError",
    "fields", "fitting", "lumped", "txline",
]
