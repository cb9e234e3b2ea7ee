"""
Two-tone spectroscopy of the 1 -> 2 transition
==============================================

With the 0 -> 1 line pumped, a weak probe sees a second dip at ω12.
Its distance from the pump line is the photon-number dependent
nonlinearity.  Above 2Δ - 2ħω the |2> state is too short lived and the
second dip washes out.
"""

import numpy as np

from zenojunction.fockfc import FcTable
from zenojunction.junction import JunctionParams, table_for_mode
from zenojunction.rates import ModeParams, rate_profile
from zenojunction.spectroscopy import two_tone

p, mode = JunctionParams(), ModeParams(cutoff=8)
iv = table_for_mode(p, mode.photon_voltage, mode.cutoff, mode.l_max, v_max=370.0)
fc = FcTable.build(mode.lam, mode.cutoff, mode.l_max)

v = np.array([320.0, 335.0, 345.0, 348.0, 355.0, 365.0])
om = 6.0 + np.linspace(-0.06, 0.02, 121)
res, pumps = two_tone(v, om, mode, iv, fc)
prof = rate_profile(v, mode, iv, fc, n_max=2)
expected = prof.transition(1) - prof.transition(0)

print(" V (uV)   fitted w12-w01 (MHz)   from shifts (MHz)   visibility")
for k, V in enumerate(v):
    got = (res.center[k] - pumps[k]) * 1e3 if res.fit_ok[k] else float("nan")
    print(f"{V:7.1f}   {got:14.2f}   {expected[k]:18.2f}   {res.visibility[k]:10.3f}")

# %% the bichromatic Floquet solution at one bias, for comparison
V = v[3:4]
fine = pumps[3] + np.linspace(-0.03, 0.015, 61)
sat, _ = two_tone(V, fine, mode, iv, fc, pump_centers=pumps[3:4])
bic, _ = two_tone(V, fine, mode, iv, fc, pump_centers=pumps[3:4], method="bichromatic")
for name, r in (("saturation", sat), ("bichromatic", bic)):
    print(f"{name:12s} w12 - w01 at {V[0]} uV: {(r.center[0] - pumps[3]) * 1e3:7.2f} +- {r.center_err[0] * 1e3:.3f} MHz")
