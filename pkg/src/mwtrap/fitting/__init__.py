"""Least-squares estimation of resonator, field-profile and heating parameters."""

from .heating import PowerLawFit, fit_power_law
from .lm import LMResult, levenberg_marquardt
from .params import ResonatorParams
from .profile import FieldProfile, ProfileFitResult, fit_field_profile, profile_model
from .resistivity import (
    SCALING_MODELS,
    ResistivityEntry,
    ResistivitySeries,
    compare_scaling_models,
    gradient_scaling_prediction,
    resistivity_from_q,
)
from .s11 import FrequencyTrace, S11FitResult, fit_s11, s11_device, s11_model, to_db

__all__ = [
    "FieldProfile", "FrequencyTrace", "LMResult", "PowerLawFit", "ProfileFitResult",
    "ResistivityEntry", "ResistivitySeries", "ResonatorParams", "S11FitResult",
    "SCALING_MODELS", "compare_scaling_models", "fit_field_profile", "fit_power_law",
    "fit_s11", "gradient_scaling_prediction", "levenberg_marquardt", "profile_model",
    "resistivity_from_q", "s11_device", "s11_model", "to_db",
]
