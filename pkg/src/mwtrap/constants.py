"""Physical constants (CODATA values via scipy) and trap defaults."""

from scipy import constants as _sc

C_LIGHT = _sc.c
MU_0 = _sc.mu_0
EPS_0 = _sc.epsilon_0
HBAR = _sc.hbar
AMU = _sc.atomic_mass

#: relative permittivity of sapphire averaged over crystal axes
EPS_SAPPHIRE = 10.0
#: vacuum/sapphire average used for the coplanar electrode
EPS_EFF_TRAP = (1.0 + EPS_SAPPHIRE) / 2.0

#: clock-qubit frequency used to set the default guided wavelength
F_QUBIT = 3.12e9

#: room-temperature resistivity of bulk gold (ohm m)
RHO_GOLD_300K = 22e-9

#: mass of a 43Ca+ ion (kg)
M_CA43 = 42.958766 * AMU - _sc.m_e
