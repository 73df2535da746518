"""Reference trap geometry: two-wire model defaults and electrode widths."""

from __future__ import annotations

from typing import NamedTuple

from . import txline
from .constants import EPS_EFF_TRAP, F_QUBIT
from .fields import TwoWireModel, WireLayout


class ElectrodeWidth(NamedTuple):
    feature: str
    design_um: float
    measured_um: float


#: designed and as-fabricated widths (um) of the trap electrodes and gaps
ELECTRODE_WIDTHS: tuple[ElectrodeWidth, ...] = (
    ElectrodeWidth("dielectric_gap", 4.5, 5.2),
    ElectrodeWidth("microwave_electrode", 8.5, 7.8),
    ElectrodeWidth("rf_electrode", 18.8, 18.4),
    ElectrodeWidth("wide_dc_electrode", 85.5, 85.3),
    ElectrodeWidth("narrow_dc_electrode", 25.5, 25.0),
    ElectrodeWidth("inner_ground", 9.5, 8.8),
    ElectrodeWidth("outer_ground", 5.5, 4.8),
)


class DefaultGeometry(NamedTuple):
    model: TwoWireModel
    layout: WireLayout
    widths: tuple[ElectrodeWidth, ...]


def default_model(q_tot: float = txline.LOSSLESS) -> TwoWireModel:
    return TwoWireModel(
        half_separation=15e-6,
        ion_height=40e-6,
        u1=-0.019,
        u2=-0.056,
        q_tot=q_tot,
        wavelength=txline.guided_wavelength(F_QUBIT, EPS_EFF_TRAP),
    )


def default_layout(q_tot: float = txline.LOSSLESS) -> DefaultGeometry:
    """Two-wire defaults, their finite-segment layout and the width record."""
    model = default_model(q_tot)
    return DefaultGeometry(model, model.to_layout(name="two-wire default"), ELECTRODE_WIDTHS)


def width(feature: str) -> ElectrodeWidth:
    for w in ELECTRODE_WIDTHS:
        if w.feature == feature:
            return w
    raise KeyError(feature)
