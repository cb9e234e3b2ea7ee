"""Physical constants and the unit system used throughout the package.

Energies are in µeV, voltages in µV, currents in nA, resistances in kΩ,
mode frequencies in GHz and rates in MHz (ordinary frequency, i.e. the
value of ``rate / 2π``).  Inside the master-equation solver time is
measured in µs and rates are angular (``2π × MHz``).
"""

import math

from scipy import constants as _c

E_CHARGE = _c.e  # C
H_PLANCK = _c.h  # J s
K_B = _c.k  # J/K

#: resistance quantum h/e² in kΩ
R_K = H_PLANCK / E_CHARGE**2 / 1e3

#: h·f expressed in µeV for f in GHz
UEV_PER_GHZ = H_PLANCK * 1e9 / E_CHARGE * 1e6

#: I/e for I in nA, expressed as an ordinary frequency in MHz
MHZ_PER_NA = 1e-9 / E_CHARGE / (2.0 * math.pi) / 1e6

#: k_B·T in µeV for T in mK
UEV_PER_MK = K_B * 1e-3 / E_CHARGE * 1e6


def photon_energy(omega_ghz):
    """ħω in µeV (equivalently the voltage step ħω/e in µV)."""
    return omega_ghz * UEV_PER_GHZ


def current_to_rate(current_na):
    """Convert ``I/e`` (current in nA) to a rate in MHz (ordinary frequency)."""
    return current_na * MHZ_PER_NA


def mhz_to_angular(f_mhz):
    """Ordinary frequency in MHz to angular rate in rad/µs."""
    return 2.0 * math.pi * f_mhz
