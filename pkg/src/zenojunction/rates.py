"""Fock-state resolved photoassisted loss rates and Lamb shifts.

All rates and shifts are returned as ordinary frequencies in MHz, i.e. the
value of ``γ/2π`` or ``δω/2π``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridTooNarrow, OutOfRange
from .fockfc import impedance_from_lambda, lambda_from_impedance
from .junction import i_at, ikk_at
from .units import MHZ_PER_NA, photon_energy


def lmax_tail(lam, l_max):
    """Relative weight of ``Σ_{l>l_max} λ^{2l}/l!`` in the full sum ``e^{λ²}``."""
    x = lam * lam
    if x == 0:
        return 0.0
    kept = sum(math.exp(l * math.log(x) - math.lgamma(l + 1)) for l in range(l_max + 1))
    return max(math.exp(x) - kept, 0.0) / kept if x < 50 else 1.0


def required_l_max(lam, tol=1e-8):
    l = 0
    while lmax_tail(lam, l) >= tol:
        l += 1
    return l


@dataclass(frozen=True)
class ModeParams:
    """Resonator mode parameters.

    ``omega`` in GHz, ``z_c`` in kΩ, ``kappa_c`` and ``kappa_int`` in MHz
    (ordinary frequency).  Pass either ``z_c`` or ``lam``; the other is
    derived.
    """

    omega: float = 6.0
    z_c: float = None
    lam: float = None
    kappa_c: float = 0.45
    kappa_int: float = 2.5
    cutoff: int = 15
    l_max: int = 12

    def __post_init__(self):
        if self.z_c is None and self.lam is None:
            object.__setattr__(self, "z_c", 4.5)
        if self.lam is None:
            object.__setattr__(self, "lam", lambda_from_impedance(self.z_c))
        elif self.z_c is None:
            object.__setattr__(self, "z_c", impedance_from_lambda(self.lam))
        elif abs(lambda_from_impedance(self.z_c) - self.lam) > 1e-9:
            raise ValueError("z_c and lam given but inconsistent; pass only one")
        if self.omega <= 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.kappa_c < 0 or self.kappa_int < 0:
            raise ValueError("loss rates must be non-negative")
        if self.cutoff < 1:
            raise ValueError(f"cutoff must be >= 1, got {self.cutoff}")
        if lmax_tail(self.lam, self.l_max) >= 1e-8:
            raise ValueError(
                f"l_max={self.l_max} too small for lambda={self.lam:.4g}; "
                f"need at least {required_l_max(self.lam)}"
            )

    @property
    def photon_voltage(self):
        """ħω/e in µV."""
        return photon_energy(self.omega)

    @property
    def kappa(self):
        """Total single-photon loss rate in MHz."""
        return self.kappa_c + self.kappa_int


def _ikk(iv, v):
    try:
        return ikk_at(iv, v)
    except OutOfRange as exc:
        raise GridTooNarrow(str(exc)) from exc


def gamma_terms(V, n, mode, iv, fc):
    """Per-process contributions ``α_{n-l,l} I(V + lħω/e)/e`` for l = 1..n, in MHz."""
    hw = mode.photon_voltage
    ls = np.arange(1, n + 1)
    if n == 0:
        return np.zeros(0)
    alpha = np.array([fc(n - l, l) for l in ls])
    return alpha * np.asarray(i_at(iv, V + ls * hw)) * MHZ_PER_NA


def gamma_n(V, n, mode, iv, fc):
    """Loss rate of Fock state ``|n>`` induced by photoassisted tunnelling (MHz)."""
    if n < 0 or n > mode.cutoff:
        raise ValueError(f"n={n} outside 0..{mode.cutoff}")
    return float(np.sum(gamma_terms(V, n, mode, iv, fc)))


def lamb_shift_n(V, n, mode, iv, fc):
    """Bath-induced frequency shift of ``|n>`` (MHz).

    Both the absorption sum (l = 1..n) and the elastic/emission sum
    (l = 0..l_max) are included; the latter survives below the gap.
    """
    if n < 0 or n > mode.cutoff:
        raise ValueError(f"n={n} outside 0..{mode.cutoff}")
    hw = mode.photon_voltage
    up = np.arange(1, n + 1)
    down = np.arange(0, mode.l_max + 1)
    a_up = np.array([fc(n - l, l) for l in up])
    a_down = np.array([fc(n, l) for l in down])
    total = np.sum(a_down * _ikk(iv, V - down * hw))
    if n:
        total += np.sum(a_up * _ikk(iv, V + up * hw))
    return float(-0.5 * MHZ_PER_NA * total)


def transition_shift(V, n, mode, iv, fc, m=None):
    """Shift of the ``n → n+1`` transition frequency, ``δω_{n+1} - δω_n`` (MHz)."""
    m = n + 1 if m is None else m
    if m != n + 1:
        raise ValueError("only adjacent transitions m = n + 1 are defined")
    return lamb_shift_n(V, m, mode, iv, fc) - lamb_shift_n(V, n, mode, iv, fc)


def fundamental_shift_series(V, mode, iv):
    """0 → 1 shift from its direct expansion in powers of λ² (MHz).

    ``-(λ² e^{-λ²}/2e) Σ_l λ^{2l}/l! (I^KK_{-l-1} + I^KK_{-l+1} - 2 I^KK_{-l})``,
    evaluated from the I^KK table without going through the Franck-Condon
    factors.
    """
    lam2 = mode.lam**2
    hw = mode.photon_voltage
    ls = np.arange(mode.l_max + 1)
    weights = np.exp(ls * math.log(lam2) - np.array([math.lgamma(l + 1) for l in ls])) if lam2 else (ls == 0) * 1.0
    second = _ikk(iv, V - (ls + 1) * hw) + _ikk(iv, V - (ls - 1) * hw) - 2.0 * _ikk(iv, V - ls * hw)
    return float(-0.5 * MHZ_PER_NA * lam2 * math.exp(-lam2) * np.sum(weights * second))


def classical_shift(V, mode, iv):
    """Frequency shift from the junction's low-intensity reactive admittance (MHz).

    Keeps only the λ² term and drops the ``e^{-λ²}`` factor.
    """
    hw = mode.photon_voltage
    second = _ikk(iv, V + hw) + _ikk(iv, V - hw) - 2.0 * _ikk(iv, V)
    return float(-0.5 * MHZ_PER_NA * mode.lam**2 * second)


@dataclass(frozen=True)
class RateProfile:
    """Rates and shifts on a bias grid.

    ``gamma`` and ``delta_omega`` have shape ``(len(v), n_max+1)``;
    ``gamma_l[k, n, l]`` is the l-photon part of γ_n at bias ``v[k]``.
    Shifts are raw (no baseline subtracted); see :meth:`relative_shifts`.
    """

    v: np.ndarray
    gamma: np.ndarray = field(repr=False)
    gamma_l: np.ndarray = field(repr=False)
    delta_omega: np.ndarray = field(repr=False)
    classical: np.ndarray = field(repr=False)

    @property
    def n_max(self):
        return self.gamma.shape[1] - 1

    def transition(self, n):
        """ω_{n,n+1} shift on the grid."""
        return self.delta_omega[:, n + 1] - self.delta_omega[:, n]

    def relative_shifts(self, baseline):
        """Shifts measured from the value at a reference bias far below threshold."""
        return self.delta_omega - baseline[None, :]


def rate_profile(v_grid, mode, iv, fc, n_max=4):
    """Sweep γ_n, their per-l parts, δω_n and the classical shift over ``v_grid``."""
    v = np.asarray(v_grid, dtype=float)
    if n_max > mode.cutoff:
        raise ValueError(f"n_max={n_max} needs cutoff >= {n_max}")
    hw = mode.photon_voltage
    nv = v.size
    gamma_l = np.zeros((nv, n_max + 1, n_max + 1))
    for n in range(1, n_max + 1):
        for l in range(1, n + 1):
            gamma_l[:, n, l] = fc(n - l, l) * np.asarray(i_at(iv, v + l * hw)) * MHZ_PER_NA
    gamma = gamma_l.sum(axis=2)

    down = np.arange(mode.l_max + 1)
    kk_down = np.stack([_ikk(iv, v - l * hw) for l in down], axis=1)
    kk_up = np.stack([_ikk(iv, v + l * hw) for l in range(0, n_max + 1)], axis=1)
    delta_omega = np.zeros((nv, n_max + 1))
    for n in range(n_max + 1):
        a_down = np.array([fc(n, l) for l in down])
        total = kk_down @ a_down
        for l in range(1, n + 1):
            total = total + fc(n - l, l) * kk_up[:, l]
        delta_omega[:, n] = -0.5 * MHZ_PER_NA * total
    second = kk_up[:, 1] + kk_down[:, 1] - 2.0 * kk_down[:, 0]
    classical = -0.5 * MHZ_PER_NA * mode.lam**2 * second
    return RateProfile(v, gamma, gamma_l, delta_omega, classical)
