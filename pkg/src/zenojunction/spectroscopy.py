"""Experiment-level drivers: reflection spectra, Zeno sweeps, lineshape fits.

Frequencies on probe axes are in GHz; detunings, widths and drive
amplitudes in MHz (ordinary frequency).  The drive amplitude η relates to
the incoming power through ``η = sqrt(κ_c P / ħω)``.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .errors import FitFailed
from .lindblad import (
    TWO_PI,
    LiouvillianSpec,
    _dissipator,
    build_liouvillian,
    destroy,
    detuning_generator,
    observables,
    photon_flux_balance,
    spec_from_bias,
    steady_state,
    unvec,
    vec,
)
from .units import E_CHARGE, UEV_PER_GHZ

PROBE_NBAR = 0.05
TWO_TONE_METHODS = ("saturation", "bichromatic")


def pump_amplitude(power_watts, kappa_c, omega):
    """η in MHz for incoming power P (W), κ_c in MHz and ω in GHz."""
    hbar_omega = omega * UEV_PER_GHZ * 1e-6 * E_CHARGE
    rate = TWO_PI * kappa_c * 1e6 * power_watts / hbar_omega
    return math.sqrt(rate) / (TWO_PI * 1e6)


def low_power_eta(kappa, nbar=PROBE_NBAR):
    """Largest η keeping ``<n>`` below ``nbar`` for the least damped (linear) cavity."""
    return 0.9 * 0.5 * kappa * math.sqrt(nbar)


def s11_from_mean(mean_a, eta, kappa_c):
    """Single-port reflection from the intracavity amplitude.

    The drive phase is chosen so an empty over-coupled cavity reflects
    ``1 - 2κ_c/κ`` on resonance.
    """
    return 1.0 - 1j * kappa_c * mean_a / eta


def _detuning(omega_probe, mode):
    return (np.asarray(omega_probe, dtype=float) - mode.omega) * 1e3


class BiasModel:
    """Generator at one bias, reusable across drive frequencies.

    ``L(δ) = L₀ + δ·G`` where ``G`` is the derivative with respect to the
    pump detuning, so a frequency sweep needs a single assembly.
    """

    def __init__(self, V, eta, mode, iv, fc, variant="collective", lamb_shift=True, extra=None):
        self.V = V
        self.eta = eta
        self.mode = mode
        self.spec = spec_from_bias(V, mode, iv, fc, detuning=0.0, eta=eta, variant=variant, lamb_shift=lamb_shift)
        self.L0 = build_liouvillian(self.spec)
        if extra is not None:
            self.L0 = self.L0 + extra
        self.G = detuning_generator(self.spec.dim)
        self._a = destroy(self.spec.dim)

    def liouvillian(self, detuning):
        return self.L0 + detuning * self.G

    def state(self, detuning):
        return steady_state(self.liouvillian(detuning))

    def mean_a(self, detuning):
        rho = self.state(detuning)
        return complex(np.trace(rho @ self._a))

    def s11(self, detuning):
        return s11_from_mean(self.mean_a(detuning), self.eta, self.mode.kappa_c)


def reflection(V, omega_probe, eta, mode, iv, fc, variant="collective", lamb_shift=True):
    """Complex S₁₁ at bias ``V`` (µV) for a probe at ``omega_probe`` (GHz)."""
    model = BiasModel(V, eta, mode, iv, fc, variant=variant, lamb_shift=lamb_shift)
    return model.s11(float(_detuning(omega_probe, mode)))


def linear_cavity_s11(detuning, kappa_c, kappa):
    """Closed-form reflection of a lossy linear single-port cavity."""
    detuning = np.asarray(detuning, dtype=float)
    return 1.0 - kappa_c / (0.5 * kappa - 1j * detuning)


# -- two-level lineshape ---------------------------------------------------


def tls_s11(omega, center, kappa, gamma, kappa_c):
    """Reflection of a driven two-level system.

    ``omega`` and ``center`` in GHz; ``kappa``, ``gamma`` and ``kappa_c`` in
    MHz.  The Lorentzian denominator ``δ² + κ²/4 + Γ²/2`` gives the power
    broadened fwhm ``sqrt(κ² + 2Γ²)``.
    """
    d = (np.asarray(omega, dtype=float) - center) * 1e3
    return 1.0 - kappa_c * (0.5 * kappa + 1j * d) / (d * d + 0.25 * kappa * kappa + 0.5 * gamma * gamma)


@dataclass(frozen=True)
class TlsFit:
    center: float
    kappa_fit: float
    Gamma: float
    residual: float
    coupling: float
    nfev: int = 0

    @property
    def fwhm(self):
        return math.sqrt(self.kappa_fit**2 + 2.0 * self.Gamma**2)


def _initial_guess(omega, abs2):
    k = int(np.argmin(abs2))
    base = float(np.median(np.concatenate([abs2[:3], abs2[-3:]])))
    depth = base - float(abs2[k])
    half = base - 0.5 * depth
    below = np.flatnonzero(abs2 <= half)
    if below.size >= 2:
        width = (omega[below[-1]] - omega[below[0]]) * 1e3
    else:
        width = 2.0 * (omega[1] - omega[0]) * 1e3
    return float(omega[k]), max(width, (omega[1] - omega[0]) * 1e3), depth


def fit_tls_lineshape(omega, abs2, kappa_c, free_coupling=False, gamma=True):
    """Least-squares fit of |S₁₁|² to the two-level reflection lineshape.

    ``kappa_c`` is the known coupling rate (MHz).  With ``free_coupling``
    the prefactor is fitted too, which suits transitions whose contrast is
    set by level populations (the 1→2 line of two-tone spectroscopy).
    Setting ``gamma=False`` pins Γ to zero.
    """
    omega = np.asarray(omega, dtype=float)
    abs2 = np.asarray(abs2, dtype=float)
    if omega.size < 12:
        raise FitFailed("need at least 12 frequency points", {"points": int(omega.size)})
    c0, w0, depth = _initial_guess(omega, abs2)
    if depth <= 1e-9:
        raise FitFailed("no resonance dip in the data", {"depth": depth})
    span = (omega[-1] - omega[0]) * 1e3
    scale = w0
    # parameters: center offset (in units of the initial width), κ, Γ, coupling
    x0 = [0.0, 1.0, 0.05 if gamma else 0.0]
    lower = [-span / scale, 1e-6, 0.0]
    upper = [span / scale, 100.0, 100.0]
    if free_coupling:
        x0.append(kappa_c / scale if kappa_c else depth * 0.5)
        lower.append(-1e3)
        upper.append(1e3)

    def unpack(x):
        center = c0 + x[0] * scale * 1e-3
        kap = x[1] * scale
        gam = x[2] * scale if gamma else 0.0
        kc = x[3] * scale if free_coupling else kappa_c
        return center, kap, gam, kc

    def resid(x):
        center, kap, gam, kc = unpack(x)
        return np.abs(tls_s11(omega, center, kap, gam, kc)) ** 2 - abs2

    if not gamma:
        lower[2], upper[2] = 0.0, 1e-12
    res = least_squares(
        resid, x0, bounds=(lower, upper), xtol=1e-8, ftol=1e-12, gtol=1e-12, max_nfev=200, x_scale="jac"
    )
    if res.status <= 0:
        raise FitFailed(
            "lineshape fit did not converge",
            {"status": int(res.status), "nfev": int(res.nfev), "message": res.message},
        )
    center, kap, gam, kc = unpack(res.x)
    return TlsFit(center, kap, gam, float(np.linalg.norm(res.fun)), kc, int(res.nfev))


# -- spectrum maps ----------------------------------------------------------


@dataclass(frozen=True)
class SpectrumResult:
    """Reflection on a bias × probe-frequency grid plus per-bias fits.

    ``s11[k, j]`` belongs to bias ``v[k]`` (µV) and probe ``omega[j]`` (GHz).
    Failed fits leave NaN in ``center``/``fwhm`` and False in ``fit_ok``.
    """

    v: np.ndarray
    omega: np.ndarray
    s11: np.ndarray = field(repr=False)
    center: np.ndarray = field(repr=False)
    fwhm: np.ndarray = field(repr=False)
    fit_ok: np.ndarray = field(repr=False)
    meta: dict = field(default_factory=dict)
    center_err: np.ndarray = field(default=None, repr=False)
    visibility: np.ndarray = field(default=None, repr=False)

    @property
    def abs2(self):
        return np.abs(self.s11) ** 2

    def dip_depth_db(self):
        """Dip depth per bias column in dB (off-resonant level over the minimum)."""
        a = self.abs2
        base = np.median(np.concatenate([a[:, :3], a[:, -3:]], axis=1), axis=1)
        return 10.0 * np.log10(base / np.min(a, axis=1))


def _map(func, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(func, items))
    return [func(x) for x in items]


MIN_DIP_DB = 0.05


def _fit_column(omega, abs2, kappa_c, free_coupling=False, min_depth_db=MIN_DIP_DB):
    try:
        fit = fit_tls_lineshape(omega, abs2, kappa_c, free_coupling=free_coupling)
    except FitFailed:
        return math.nan, math.nan, False
    base = float(np.median(np.concatenate([abs2[:3], abs2[-3:]])))
    deep = 10.0 * math.log10(base / float(np.min(abs2))) >= min_depth_db
    inside = omega[0] <= fit.center <= omega[-1]
    return fit.center, fit.fwhm, bool(inside and deep)


def spectrum_map(v_grid, omega_grid, eta, mode, iv, fc, variant="collective", threads=1, lamb_shift=True):
    """Sweep S₁₁ over bias and probe frequency; fit each bias column."""
    v = np.asarray(v_grid, dtype=float)
    omega = np.asarray(omega_grid, dtype=float)
    det = _detuning(omega, mode)

    def column(V):
        model = BiasModel(V, eta, mode, iv, fc, variant=variant, lamb_shift=lamb_shift)
        return np.array([model.s11(d) for d in det])

    s11 = np.array(_map(column, v, threads))
    fits = [_fit_column(omega, np.abs(row) ** 2, mode.kappa_c) for row in s11]
    center, fwhm, ok = (np.array(x) for x in zip(*fits))
    return SpectrumResult(v, omega, s11, center, fwhm, ok.astype(bool), {"eta": eta, "variant": variant})


# -- Zeno saturation --------------------------------------------------------


def ideal_tls_intensity(eta, kappa):
    """|<a>|² of a resonantly driven two-level system with decay κ."""
    eta = np.asarray(eta, dtype=float)
    return eta**2 * kappa**2 / 4.0 / (kappa**2 / 4.0 + 2.0 * eta**2) ** 2


@dataclass(frozen=True)
class ZenoResult:
    v: float
    eta: np.ndarray
    intensity: np.ndarray = field(repr=False)
    n_mean: np.ndarray = field(repr=False)
    populations: np.ndarray = field(repr=False)
    ideal_tls: np.ndarray = field(repr=False)
    gamma_fit: np.ndarray = field(repr=False)
    kappa_fit: np.ndarray = field(repr=False)
    detuning: float = 0.0


def resonant_detuning(V, mode, iv, fc):
    """Pump detuning (MHz) that hits the Lamb-shifted 0→1 transition."""
    spec = spec_from_bias(V, mode, iv, fc, dim=2 if mode.cutoff >= 1 else None)
    return float(spec.lamb[1])


def zeno_sweep(V, eta_grid, mode, iv, fc, variant="collective", fit_widths=False, n_freq=41, threads=1):
    """Resonantly driven steady states across pump amplitudes at bias ``V``.

    The ideal two-level curve for the same κ is returned alongside.  With
    ``fit_widths`` a short spectrum around resonance is fitted at every η to
    extract the power broadening Γ.
    """
    etas = np.asarray(eta_grid, dtype=float)
    det0 = resonant_detuning(V, mode, iv, fc)
    base = BiasModel(V, 1.0, mode, iv, fc, variant=variant)
    drive_gen = build_liouvillian(LiouvillianSpec(dim=base.spec.dim, eta=1.0))
    static = base.L0 - drive_gen

    def point(eta):
        L = static + eta * drive_gen + det0 * base.G
        rho = steady_state(L)
        obs = observables(rho)
        g = k = math.nan
        if fit_widths:
            width = 4.0 * math.sqrt(mode.kappa**2 + 8.0 * eta**2)
            dets = det0 + np.linspace(-width, width, n_freq)
            s = []
            for d in dets:
                r = steady_state(static + eta * drive_gen + d * base.G)
                s.append(s11_from_mean(complex(np.trace(r @ base._a)), eta, mode.kappa_c))
            try:
                fit = fit_tls_lineshape(mode.omega + dets * 1e-3, np.abs(np.array(s)) ** 2, mode.kappa_c)
                g, k = fit.Gamma, fit.kappa_fit
            except FitFailed:
                pass
        return obs, g, k

    results = _map(point, etas, threads)
    obs = [r[0] for r in results]
    return ZenoResult(
        v=V,
        eta=etas,
        intensity=np.array([o.intensity for o in obs]),
        n_mean=np.array([o.n_mean for o in obs]),
        populations=np.array([o.populations for o in obs]),
        ideal_tls=ideal_tls_intensity(etas, mode.kappa),
        gamma_fit=np.array([r[1] for r in results]),
        kappa_fit=np.array([r[2] for r in results]),
        detuning=det0,
    )


def plateau_level(eta, intensity, slope_tol=0.02):
    """Mean |<a>|² over the flat part of a saturation curve.

    Flat means ``|d|<a>|²/d ln η| < slope_tol``; returns NaN when no such
    stretch exists above the initial quadratic rise.
    """
    x = np.log(np.asarray(eta, dtype=float))
    y = np.asarray(intensity, dtype=float)
    slope = np.gradient(y, x)
    rising = np.flatnonzero(slope > slope_tol)
    if rising.size == 0:
        return math.nan
    flat = np.flatnonzero((np.abs(slope) < slope_tol) & (np.arange(y.size) > rising[0]))
    if flat.size == 0:
        return math.nan
    return float(np.mean(y[flat]))


# -- two-tone spectroscopy --------------------------------------------------


@dataclass(frozen=True)
class TwoLineFit:
    """Complex S₁₁ fitted with two Lorentzian lines, the 0→1 one at a known center.

    ``center``/``fwhm``/``amplitude`` describe the free (1→2) line; GHz for
    centers, MHz for widths.  ``visibility`` is the peak magnitude of that
    line's contribution to S₁₁, ``2|A|/w``.
    """

    center: float
    fwhm: float
    amplitude: complex
    center_err: float
    center01: float
    fwhm01: float
    amplitude01: complex
    residual: float

    @property
    def visibility(self):
        return 2.0 * abs(self.amplitude) / self.fwhm


def _two_line(p, d, c01):
    a1 = p[0] + 1j * p[1]
    a2 = p[3] + 1j * p[4]
    return 1.0 - a1 / (0.5 * p[2] - 1j * (d - c01)) - a2 / (0.5 * p[5] - 1j * (d - p[6]))


def fit_two_line(omega, s11, center01, guesses=None):
    """Fit ``1 - Σ_k A_k / (w_k/2 - i(δ - c_k))`` to complex reflection data.

    ``center01`` (GHz) is held fixed; the second line's center starts from
    each of ``guesses`` (GHz) and the best least-squares solution is kept.
    The standard error of the free center comes from the Jacobian scaled by
    the residual variance.
    """
    omega = np.asarray(omega, dtype=float)
    s11 = np.asarray(s11, dtype=complex)
    if omega.size < 12:
        raise FitFailed("need at least 12 frequency points", {"points": int(omega.size)})
    if not np.all(np.isfinite(s11)):
        raise FitFailed("non-finite reflection data")
    ref = float(omega[0])
    d = (omega - ref) * 1e3
    c01 = (center01 - ref) * 1e3
    step = d[1] - d[0]
    if guesses is None:
        k = int(np.argmin(np.abs(s11) ** 2))
        guesses = [omega[k], center01 - 10.0 * step * 1e-3, center01 + 10.0 * step * 1e-3]

    def resid(p):
        e = _two_line(p, d, c01) - s11
        return np.concatenate([e.real, e.imag])

    lower = [-1e3, -1e3, 1e-3, -1e3, -1e3, 1e-3, d[0]]
    upper = [1e3, 1e3, 1e3, 1e3, 1e3, 1e3, d[-1]]
    best = None
    for g in guesses:
        x0 = [0.2, 0.0, 3.0, 0.2, 0.0, 3.0, float(np.clip((g - ref) * 1e3, d[0], d[-1]))]
        res = least_squares(resid, x0, bounds=(lower, upper), max_nfev=2000)
        if res.status > 0 and (best is None or res.cost < best.cost):
            best = res
    if best is None:
        raise FitFailed("two-line fit did not converge", {"guesses": len(guesses)})
    J = best.jac
    dof = max(J.shape[0] - J.shape[1], 1)
    cov = np.linalg.pinv(J.T @ J) * (2.0 * best.cost / dof)
    x = best.x
    return TwoLineFit(
        center=ref + x[6] * 1e-3,
        fwhm=float(x[5]),
        amplitude=complex(x[3], x[4]),
        center_err=float(math.sqrt(max(cov[6, 6], 0.0))) * 1e-3,
        center01=float(center01),
        fwhm01=float(x[2]),
        amplitude01=complex(x[0], x[1]),
        residual=float(np.linalg.norm(best.fun)),
    )


def _saturation_superop(dim, rate):
    """Incoherent 0↔1 exchange at ``rate`` (MHz) in both directions."""
    up = np.zeros((dim, dim), dtype=complex)
    up[1, 0] = math.sqrt(TWO_PI * rate)
    return _dissipator(up) + _dissipator(up.conj().T)


def _floquet_mean_a(L0, Lp, Lm, omega_beat, harmonics, dim):
    """k = 0 Fourier component of <a> for ``dρ/dt = (L0 + Lp e^{iΩt} + Lm e^{-iΩt}) ρ``."""
    n = L0.shape[0]
    K = harmonics
    size = (2 * K + 1) * n
    A = np.zeros((size, size), dtype=complex)
    eye = np.eye(n)
    for idx, k in enumerate(range(-K, K + 1)):
        sl = slice(idx * n, (idx + 1) * n)
        A[sl, sl] = L0 - 1j * k * TWO_PI * omega_beat * eye
        if idx > 0:
            A[sl, (idx - 1) * n : idx * n] = Lp
        if idx < 2 * K:
            A[sl, (idx + 1) * n : (idx + 2) * n] = Lm
    zero = K * n
    b = np.zeros(size, dtype=complex)
    A[zero, :] = 0.0
    A[zero, zero : zero + n] = vec(np.eye(dim))
    b[zero] = 1.0
    x = np.linalg.solve(A, b)
    rho0 = unvec(x[zero : zero + n], dim)
    return complex(np.trace(rho0 @ destroy(dim)))


def _commutator_superop(op):
    d = op.shape[0]
    eye = np.eye(d)
    return -1j * (np.kron(eye, op) - np.kron(op.T, eye))


def two_tone(
    v_grid,
    omega_grid,
    mode,
    iv,
    fc,
    eta_probe=None,
    pump_centers=None,
    method="saturation",
    saturation_rate=None,
    eta_pump=None,
    harmonics=6,
    variant="collective",
    threads=1,
    min_visibility=0.02,
):
    """Second-tone spectroscopy of the 1→2 transition.

    The first tone sits on the 0→1 resonance of each bias column
    (``pump_centers`` in GHz, by default fitted from a low-power
    :func:`spectrum_map`).  ``method="saturation"`` models it as an
    incoherent 0↔1 exchange at ``saturation_rate`` (default κ);
    ``method="bichromatic"`` keeps it coherent with amplitude ``eta_pump``
    and returns the period-averaged response in the probe frame from a
    Floquet-harmonic steady state.

    Each column is fitted with :func:`fit_two_line`, the 0→1 line pinned at
    the pump frequency.  ``center``/``fwhm`` refer to the 1→2 line, and
    ``fit_ok`` is False where its visibility is below ``min_visibility``.
    """
    if method not in TWO_TONE_METHODS:
        raise ValueError(f"method must be one of {TWO_TONE_METHODS}")
    v = np.asarray(v_grid, dtype=float)
    omega = np.asarray(omega_grid, dtype=float)
    eta_probe = low_power_eta(mode.kappa) * 0.2 if eta_probe is None else eta_probe
    if pump_centers is None:
        pump_centers = lowpower_centers(v, mode, iv, fc, variant=variant, threads=threads)
    pump_centers = np.asarray(pump_centers, dtype=float)
    rate = mode.kappa if saturation_rate is None else saturation_rate
    eta_pump = 0.5 * mode.kappa if eta_pump is None else eta_pump
    det = _detuning(omega, mode)

    def column(args):
        V, f1 = args
        if not np.isfinite(f1):
            return np.full(omega.size, np.nan + 0j)
        if method == "saturation":
            model = BiasModel(V, eta_probe, mode, iv, fc, variant=variant, extra=_saturation_superop(mode.cutoff + 1, rate))
            return np.array([model.s11(d) for d in det])
        model = BiasModel(V, eta_probe, mode, iv, fc, variant=variant)
        a = destroy(model.spec.dim)
        Lp = _commutator_superop(TWO_PI * eta_pump * a)
        Lm = _commutator_superop(TWO_PI * eta_pump * a.conj().T)
        out = []
        for d, w in zip(det, omega):
            beat = (f1 - w) * 1e3
            L0 = model.liouvillian(d)
            if abs(beat) < 1e-6:
                L0 = L0 + Lp + Lm
                mean = complex(np.trace(steady_state(L0) @ a))
            else:
                mean = _floquet_mean_a(L0, Lp, Lm, beat, harmonics, model.spec.dim)
            out.append(s11_from_mean(mean, eta_probe, mode.kappa_c))
        return np.array(out)

    s11 = np.array(_map(column, list(zip(v, pump_centers)), threads))
    n = v.size
    center, fwhm, err, vis = (np.full(n, np.nan) for _ in range(4))
    ok = np.zeros(n, dtype=bool)
    for k, (row, f1) in enumerate(zip(s11, pump_centers)):
        try:
            fit = fit_two_line(omega, row, f1)
        except FitFailed:
            continue
        center[k], fwhm[k], err[k], vis[k] = fit.center, fit.fwhm, fit.center_err, fit.visibility
        ok[k] = fit.visibility >= min_visibility
    meta = {"method": method, "eta_probe": eta_probe, "variant": variant, "min_visibility": min_visibility}
    meta.update({"saturation_rate": rate} if method == "saturation" else {"eta_pump": eta_pump, "harmonics": harmonics})
    result = SpectrumResult(v, omega, s11, center, fwhm, ok, meta, center_err=err, visibility=vis)
    return result, pump_centers


def lowpower_centers(v, mode, iv, fc, variant="collective", threads=1, points=81):
    """Fitted 0→1 center (GHz) at each bias from a low-power spectrum around the expected line."""

    def one(V):
        det0 = resonant_detuning(V, mode, iv, fc)
        width = max(6.0 * mode.kappa, 1.0)
        dets = det0 + np.linspace(-width, width, points)
        eta = low_power_eta(mode.kappa)
        model = BiasModel(V, eta, mode, iv, fc, variant=variant)
        s = np.array([model.s11(d) for d in dets])
        c, _, ok = _fit_column(mode.omega + dets * 1e-3, np.abs(s) ** 2, mode.kappa_c)
        return c if ok else math.nan

    return np.array(_map(one, np.asarray(v, dtype=float), threads))


def energy_balance(V, eta, detuning, mode, iv, fc, variant="collective"):
    """(injected, dissipated) photon flux in MHz at the steady state."""
    spec = spec_from_bias(V, mode, iv, fc, detuning=detuning, eta=eta, variant=variant)
    rho = steady_state(build_liouvillian(spec))
    return photon_flux_balance(spec, rho)
