"""
Quasiparticle current and its Kramers-Kronig partner
====================================================

The BCS current is zero below 2Δ/e, jumps to πΔ/(2eR) at the gap and
tends to V/R far above it.  The dispersive partner I^KK drives the
frequency shifts; at V = 0 it equals minus the jump (Ambegaokar-Baratoff).
"""

import math
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from zenojunction.junction import IvTable, JunctionParams, i_at, ikk_at

OUT = os.path.join(os.path.dirname(__file__), "figures")
os.makedirs(OUT, exist_ok=True)

p = JunctionParams()
print(f"Delta = {p.delta} ueV, R = {p.resistance} kOhm, gap voltage = {p.gap_voltage} uV")

# %% tabulate once; everything downstream interpolates
iv = IvTable.from_params(p, span=800.0)
jump = math.pi * p.delta / (2 * p.resistance)
print(f"jump at the gap: {iv.jump:.4f} nA (pi Delta / 2eR = {jump:.4f})")
print(f"I_KK(0) = {ikk_at(iv, 0.0):.5f} nA, expected {-jump:.5f}")

# %% plot both on the trusted part of the grid
v = np.linspace(-750, 750, 3001)
fig, ax = plt.subplots(figsize=(6, 4))
ax.plot(v, i_at(iv, v), label="I(V)")
ax.plot(v, ikk_at(iv, v), label="I$^{KK}$(V)")
ax.plot(v, v / p.resistance, "k:", lw=0.8, label="V/R")
ax.set_xlabel("V (µV)")
ax.set_ylabel("current (nA)")
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(OUT, "junction_current.png"), dpi=120)
print("wrote", os.path.join(OUT, "junction_current.png"))
