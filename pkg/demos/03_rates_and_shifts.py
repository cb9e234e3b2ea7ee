"""
Photon-number resolved loss and Lamb shifts
===========================================

Each Fock state |n> decays through l-photon channels that open at
eV = 2Δ - lħω.  Below the one-photon threshold |1> is stable while |2>
already decays, which is what makes the Zeno regime possible.  The
shifts follow from the same channels through I^KK and carry a log kink
at every threshold.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from zenojunction.fockfc import FcTable
from zenojunction.junction import JunctionParams, table_for_mode
from zenojunction.rates import ModeParams, rate_profile

OUT = os.path.join(os.path.dirname(__file__), "figures")
os.makedirs(OUT, exist_ok=True)

p, mode = JunctionParams(), ModeParams()
iv = table_for_mode(p, mode.photon_voltage, mode.cutoff, mode.l_max, v_max=420.0)
fc = FcTable.build(mode.lam, mode.cutoff, mode.l_max)

thresholds = [p.gap_voltage - l * mode.photon_voltage for l in range(5)]
print("thresholds 2Delta - l hw (uV):", np.round(thresholds, 2))

# %% sweep
v = np.arange(280.0, 415.0, 0.25)
prof = rate_profile(v, mode, iv, fc, n_max=4)

window = (v > thresholds[2]) & (v < thresholds[1])
k = np.argmax(np.where(window, prof.gamma[:, 2], 0))
print(f"in the Zeno window gamma_1 = 0 and gamma_2/2pi peaks at {prof.gamma[k, 2]:.1f} MHz ({v[k]:.1f} uV)")

for V in (340.0, 362.8, 383.0):
    i = np.argmin(abs(v - V))
    print(
        f"V = {V:6.1f} uV: gamma_1..4 = {np.round(prof.gamma[i, 1:], 2)} MHz,"
        f" w01 shift {prof.transition(0)[i]:7.2f} MHz, w12 - w01 {prof.transition(1)[i] - prof.transition(0)[i]:7.2f} MHz"
    )

# %% figure: rates and the two lowest transition shifts
fig, (a1, a2) = plt.subplots(2, 1, sharex=True, figsize=(6, 6))
for n in range(1, 5):
    a1.plot(v, prof.gamma[:, n], label=f"n={n}")
a1.set_ylabel("γ$_n$/2π (MHz)")
a1.set_yscale("symlog", linthresh=1.0)
a1.legend()
a2.plot(v, prof.transition(0), label="ω$_{01}$ shift")
a2.plot(v, prof.transition(1), label="ω$_{12}$ shift")
a2.plot(v, prof.classical, "k:", label="classical")
a2.set_ylim(-250, 350)
a2.set_ylabel("shift (MHz)")
a2.set_xlabel("V (µV)")
a2.legend()
for t in thresholds:
    for ax in (a1, a2):
        ax.axvline(t, color="0.8", lw=0.6)
fig.tight_layout()
fig.savefig(os.path.join(OUT, "rates_and_shifts.png"), dpi=120)
print("wrote", os.path.join(OUT, "rates_and_shifts.png"))
