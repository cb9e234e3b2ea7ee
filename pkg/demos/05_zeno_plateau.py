"""
Zeno blockade of the two-photon state
=====================================

In the window 2Δ - 2ħω < eV < 2Δ - ħω the state |2> decays about
twenty five times faster than |1>.  Driving on resonance then fills the
mode like a two-level system: |<a>|² saturates near 1/8 before the
drive finally overwhelms the blockade.
"""

import numpy as np

from zenojunction.fockfc import FcTable
from zenojunction.junction import JunctionParams, table_for_mode
from zenojunction.lindblad import build_liouvillian, population_decay_rate, spec_from_bias
from zenojunction.rates import ModeParams
from zenojunction.spectroscopy import plateau_level, zeno_sweep

p, mode = JunctionParams(), ModeParams()
V = 362.8
iv = table_for_mode(p, mode.photon_voltage, mode.cutoff, mode.l_max, v_max=V)
fc = FcTable.build(mode.lam, mode.cutoff, mode.l_max)

L = build_liouvillian(spec_from_bias(V, mode, iv, fc))
loss = [population_decay_rate(L, n) for n in (1, 2)]
print(f"V = {V} uV: loss of |1> {loss[0]:.2f} MHz, of |2> {loss[1]:.1f} MHz, ratio {loss[1] / loss[0]:.1f}")

# %% drive sweep at the Lamb-shifted resonance
eta = np.geomspace(0.05, 30.0, 40)
res = zeno_sweep(V, eta, mode, iv, fc)
print(f"drive detuning used: {res.detuning:.2f} MHz")
print("  eta (MHz)   |<a>|^2   two-level   <n>")
for k in range(0, len(eta), 4):
    print(f"{eta[k]:10.3f}   {res.intensity[k]:7.4f}   {res.ideal_tls[k]:9.4f}   {res.n_mean[k]:6.3f}")
print(f"plateau |<a>|^2 = {plateau_level(eta, res.intensity):.4f}  (1/8 = 0.125)")

# %% far below every threshold the mode is just a driven harmonic cavity
low = np.geomspace(0.01, 0.1, 11)
far = zeno_sweep(250.0, low, mode, iv, fc)
print(f"log-log slope at 250 uV: {np.polyfit(np.log(low), np.log(far.intensity), 1)[0]:.4f}")
