"""
Franck-Condon weights of multiphoton tunneling
==============================================

A tunneling quasiparticle displaces the mode by λ = sqrt(π Z_c / R_K).
The weight of a process that takes |n> to |n+l> is |<n+l|D(λ)|n>|²,
which we evaluate from the Laguerre closed form and cross-check against
the matrix exponential of λ(a† - a).
"""

import numpy as np

from zenojunction.fockfc import displacement_matrix, franck_condon, lambda_from_impedance

# %% the mode impedance sets λ
lam = lambda_from_impedance(4.5)
print(f"Z_c = 4.5 kOhm  ->  lambda = {lam:.4f}")

# %% weights out of the vacuum form a Poisson distribution in l
a = np.array([franck_condon(lam, 0, l) for l in range(6)])
print("alpha_0l, l = 0..5:", np.round(a, 5))
print(f"alpha_02 / alpha_01 = {a[2] / a[1]:.3f}   (lambda^2 / 2 = {lam**2 / 2:.3f})")

# %% higher Fock states: the table used by the rate code
table = np.array([[franck_condon(lam, n, l) for l in range(5)] for n in range(5)])
print("\nalpha_nl (rows n = 0..4, columns l = 0..4)")
print(np.array2string(table, precision=4, suppress_small=True))

# %% closed form against expm on a truncated Fock space
D = displacement_matrix(lam, 40)
worst = max(abs(abs(D[n + l, n]) ** 2 - franck_condon(lam, n, l)) for n in range(21) for l in range(21 - n))
print(f"\nmax |closed form - expm| over n + l <= 20: {worst:.1e}")
