"""
Collective vs dephased jump operators
=====================================

The l-photon channel can be written as one jump operator that keeps
coherences between Fock states, or as one operator per (n, l) pair that
dephases them.  Populations decay identically either way; this report
shows where the steady states part ways.
"""

import numpy as np

from zenojunction.fockfc import FcTable
from zenojunction.junction import JunctionParams, table_for_mode
from zenojunction.rates import ModeParams
from zenojunction.spectroscopy import plateau_level, resonant_detuning, spectrum_map, zeno_sweep

p, mode = JunctionParams(), ModeParams()
iv = table_for_mode(p, mode.photon_voltage, mode.cutoff, mode.l_max, v_max=395.0)
fc = FcTable.build(mode.lam, mode.cutoff, mode.l_max)
V = 362.8
print(f"resonant detuning at {V} uV: {resonant_detuning(V, mode, iv, fc):.2f} MHz\n")

eta = np.geomspace(0.05, 30.0, 40)
runs = {var: zeno_sweep(V, eta, mode, iv, fc, variant=var) for var in ("collective", "dephased")}
print("Zeno sweep")
print("  eta (MHz)   collective   dephased")
for k in range(0, len(eta), 5):
    print(f"{eta[k]:10.3f}   {runs['collective'].intensity[k]:10.4f}   {runs['dephased'].intensity[k]:8.4f}")
for var, r in runs.items():
    print(f"{var:10s} plateau {plateau_level(eta, r.intensity):.4f}")

# %% fitted line position and width on a few columns at moderate drive
v = np.array([300.0, 330.0, 350.0, 362.8, 372.0])
om = 6.0 + np.linspace(-0.12, 0.04, 120)
print("\nspectrum fits at eta = 3 MHz")
print(" V (uV)   center (MHz) coll / deph    fwhm (MHz) coll / deph")
maps = {var: spectrum_map(v, om, 3.0, mode, iv, fc, variant=var) for var in runs}
for k, x in enumerate(v):
    c = [(maps[var].center[k] - 6.0) * 1e3 for var in maps]
    w = [maps[var].fwhm[k] for var in maps]
    print(f"{x:7.1f}   {c[0]:8.2f} / {c[1]:8.2f}    {w[0]:7.2f} / {w[1]:7.2f}")
