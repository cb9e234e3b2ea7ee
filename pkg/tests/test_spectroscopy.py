import math

import numpy as np
import pytest

from conftest import Physics
from zenojunction.errors import FitFailed
from zenojunction.rates import ModeParams, rate_profile
from zenojunction.spectroscopy import (
    BiasModel,
    energy_balance,
    fit_tls_lineshape,
    fit_two_line,
    ideal_tls_intensity,
    linear_cavity_s11,
    low_power_eta,
    lowpower_centers,
    plateau_level,
    pump_amplitude,
    reflection,
    resonant_detuning,
    spectrum_map,
    tls_s11,
    two_tone,
    zeno_sweep,
)
from zenojunction.units import E_CHARGE, UEV_PER_GHZ

KC, KAPPA = 0.45, 2.95


@pytest.fixture(scope="module")
def tls():
    """Single excitation (N = 1) with the default loss, junction idle at V = 0."""
    return Physics(ModeParams(cutoff=1))


def test_pump_amplitude_roundtrip():
    eta = 1.3
    hw = 6.0 * UEV_PER_GHZ * 1e-6 * E_CHARGE
    P = hw * (2 * math.pi * eta * 1e6) ** 2 / (2 * math.pi * KC * 1e6)
    assert pump_amplitude(P, KC, 6.0) == pytest.approx(eta, rel=1e-12)


def test_low_power_probe_keeps_cavity_nearly_empty():
    eta = low_power_eta(KAPPA)
    assert (2 * eta / KAPPA) ** 2 < 0.05


def test_linear_cavity_dip_depth():
    assert linear_cavity_s11(0.0, KC, KAPPA) == pytest.approx(1 - 2 * KC / KAPPA)
    assert abs(linear_cavity_s11(1e4, KC, KAPPA) - 1) < 1e-3


def test_linear_cavity_limit(harmonic):
    mode = harmonic.mode
    model = BiasModel(0.0, 0.05, *harmonic.args)
    shift = model.spec.lamb[1]
    for det in np.linspace(-6, 6, 13):
        exact = linear_cavity_s11(det - shift, mode.kappa_c, mode.kappa)
        assert abs(model.s11(det) - exact) < 1e-6


def test_reflection_wrapper(harmonic):
    model = BiasModel(0.0, 0.05, *harmonic.args)
    assert reflection(0.0, harmonic.mode.omega + 1e-3, 0.05, *harmonic.args) == pytest.approx(model.s11(1.0))


def test_passivity_on_a_map(paper):
    v = np.array([300.0, 350.0, 362.8, 376.0, 395.0])
    om = 6.0 + np.linspace(-0.06, 0.02, 41)
    for eta in (low_power_eta(KAPPA), 3.0, 12.0):
        res = spectrum_map(v, om, eta, *paper.args)
        assert np.max(np.abs(res.s11)) <= 1 + 1e-6


# -- lineshape fitting ------------------------------------------------------


def synthetic(center=6.0, kappa=KAPPA, gamma=0.0, n=161, half=0.02):
    om = center + np.linspace(-half, half, n) + 1.3e-4
    return om, np.abs(tls_s11(om, center, kappa, gamma, KC)) ** 2


def test_lorentzian_self_fit():
    om, a2 = synthetic()
    fit = fit_tls_lineshape(om, a2, KC, gamma=False)
    assert fit.kappa_fit == pytest.approx(KAPPA, rel=5e-3)
    assert fit.center == pytest.approx(6.0, abs=1e-6)
    assert fit.Gamma == 0.0


@pytest.mark.parametrize("gamma", [1.0, 3.0, 6.0])
def test_tls_roundtrip(gamma):
    om, a2 = synthetic(gamma=gamma, half=0.04)
    fit = fit_tls_lineshape(om, a2, KC)
    assert fit.Gamma == pytest.approx(gamma, rel=0.02)
    assert fit.fwhm == pytest.approx(math.sqrt(KAPPA**2 + 2 * gamma**2), rel=0.02)


def test_fit_failures():
    om, a2 = synthetic()
    with pytest.raises(FitFailed):
        fit_tls_lineshape(om[:8], a2[:8], KC)
    with pytest.raises(FitFailed) as info:
        fit_tls_lineshape(om, np.ones_like(om), KC)
    assert "depth" in info.value.diagnostics


def tls_spectrum(tls, eta, n=121):
    half = 4 * math.sqrt(KAPPA**2 + 8 * eta**2)
    det = np.linspace(-half, half, n)
    model = BiasModel(0.0, eta, *tls.args)
    return tls.mode.omega + det * 1e-3, np.array([model.s11(d) for d in det])


@pytest.mark.parametrize("eta", [0.3, 1.0, 2.5])
def test_two_level_power_broadening(tls, eta):
    om, s = tls_spectrum(tls, eta)
    fit = fit_tls_lineshape(om, np.abs(s) ** 2, KC)
    assert fit.Gamma == pytest.approx(2 * eta, rel=0.02)
    assert fit.kappa_fit == pytest.approx(KAPPA, rel=0.02)


def test_broadening_linear_in_intensity(tls):
    etas = np.array([0.2, 0.35, 0.5, 0.65])
    g2 = []
    for eta in etas:
        om, s = tls_spectrum(tls, eta)
        g2.append(fit_tls_lineshape(om, np.abs(s) ** 2, KC).Gamma ** 2)
    slope = np.polyfit(etas**2, g2, 1)[0]
    assert slope == pytest.approx(4.0, rel=0.05)


def test_two_line_fit_recovers_synthetic_lines():
    om = 6.0 + np.linspace(-0.03, 0.015, 91)
    d = (om - 6.0) * 1e3
    s = 1 - (0.3 + 0.1j) / (1.5 - 1j * (d + 2.0)) - (0.2 - 0.05j) / (2.5 - 1j * (d + 11.0))
    fit = fit_two_line(om, s, 6.0 - 0.002)
    assert fit.center == pytest.approx(6.0 - 0.011, abs=1e-9)
    assert fit.fwhm == pytest.approx(5.0, rel=1e-6)
    assert fit.visibility == pytest.approx(2 * abs(0.2 - 0.05j) / 5.0, rel=1e-6)
    with pytest.raises(FitFailed):
        fit_two_line(om[:5], s[:5], 6.0)


# -- spectrum maps ----------------------------------------------------------


def test_low_power_map_redshifts_and_collapses(paper):
    v = np.array([300.0, 330.0, 360.0, 370.0, 380.0, 395.0])
    om = 6.0 + np.linspace(-0.09, 0.02, 111)
    res = spectrum_map(v, om, low_power_eta(KAPPA), *paper.args)
    below = v < 375.19
    assert np.all(res.fit_ok[below])
    assert np.all(np.diff(res.center[below]) < 0)
    assert not np.any(res.fit_ok[~below])
    assert np.all(res.dip_depth_db()[~below] < 0.05)
    expected = np.array([resonant_detuning(x, *paper.args) for x in v[below]])
    assert np.allclose((res.center[below] - 6.0) * 1e3, expected, atol=0.1)


def test_threaded_map_is_identical(paper):
    v = np.array([320.0, 350.0, 365.0])
    om = 6.0 + np.linspace(-0.05, 0.01, 21)
    a = spectrum_map(v, om, 1.0, *paper.args, threads=1)
    b = spectrum_map(v, om, 1.0, *paper.args, threads=3)
    assert np.array_equal(a.s11, b.s11)


def test_energy_bookkeeping(paper):
    for V, eta in ((340.0, 2.0), (362.8, 6.0), (385.0, 4.0)):
        injected, lost = energy_balance(V, eta, resonant_detuning(V, *paper.args), *paper.args)
        assert lost == pytest.approx(injected, rel=0.01)


# -- saturation sweeps ------------------------------------------------------


def test_ideal_tls_curve():
    eta = np.array([KAPPA / math.sqrt(8)])
    assert ideal_tls_intensity(eta, KAPPA)[0] == pytest.approx(1 / 8)


def test_plateau_level_on_synthetic_curve():
    eta = np.geomspace(0.01, 100, 400)
    y = ideal_tls_intensity(eta, 1.0)
    y = np.where(eta > 0.36, 1 / 8, y)  # flat after the peak
    assert plateau_level(eta, y) == pytest.approx(1 / 8, rel=1e-3)
    assert math.isnan(plateau_level(eta, eta**2))
    assert math.isnan(plateau_level(eta, np.zeros_like(eta)))


def test_quadratic_growth_far_below_threshold(paper):
    eta = np.geomspace(0.01, 0.1, 11)
    res = zeno_sweep(250.0, eta, *paper.args)
    slope = np.polyfit(np.log(eta), np.log(res.intensity), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.02)
    assert np.allclose(res.ideal_tls, ideal_tls_intensity(eta, KAPPA))


def test_zeno_width_fits(small):
    res = zeno_sweep(362.8, [0.3, 0.6], *small.args, fit_widths=True, n_freq=61)
    assert np.all(np.isfinite(res.gamma_fit))
    assert res.gamma_fit[1] > res.gamma_fit[0]


# -- two-tone ---------------------------------------------------------------


def test_two_tone_harmonic_limit(harmonic):
    v = np.array([300.0, 345.0])
    om = 6.0 + np.linspace(-0.03, 0.015, 91)
    res, pumps = two_tone(v, om, *harmonic.args)
    assert np.all(res.fit_ok)
    assert np.all(np.abs(res.center - pumps) <= np.maximum(3 * res.center_err, 2e-6))


def test_two_tone_tracks_transition_and_vanishes(small):
    v = np.array([320.0, 340.0, 348.0, 355.0, 362.0])
    om = 6.0 + np.linspace(-0.06, 0.02, 121)
    res, pumps = two_tone(v, om, *small.args)
    prof = rate_profile(v, *small.args, n_max=2)
    expected = prof.transition(1) - prof.transition(0)
    visible = v <= 350.37
    assert np.all(res.fit_ok[visible]) and not np.any(res.fit_ok[~visible])
    got = (res.center - pumps)[visible] * 1e3
    # lines closer than κ overlap and bias the split by a few percent
    resolved = np.abs(expected[visible]) > KAPPA
    assert np.allclose(got[resolved], expected[visible][resolved], atol=0.05)
    assert np.allclose(got[~resolved], expected[visible][~resolved], rtol=0.1)
    assert np.min(res.visibility[visible]) > 5 * np.max(res.visibility[~visible])
    assert res.meta["method"] == "saturation"


def test_two_tone_methods_agree(small):
    V = np.array([348.0])
    pumps = lowpower_centers(V, *small.args)
    om = pumps[0] + np.linspace(-0.03, 0.015, 61)
    sat, _ = two_tone(V, om, *small.args, pump_centers=pumps)
    bic, _ = two_tone(V, om, *small.args, pump_centers=pumps, method="bichromatic")
    err = math.hypot(sat.center_err[0], bic.center_err[0])
    assert abs(sat.center[0] - bic.center[0]) <= 2 * err
    assert bic.meta["harmonics"] == 6


def test_two_tone_rejects_unknown_method(small):
    with pytest.raises(ValueError):
        two_tone([340.0], 6.0 + np.linspace(-0.01, 0.01, 20), *small.args, method="other")


@pytest.mark.parametrize("l", [2, 3])
def test_center_cusp_and_width_step_share_a_column(paper, l):
    # the loss onset at each threshold steps the width and, through causality,
    # puts an upward cusp in the line position at the same bias
    vt = paper.p.gap_voltage - l * paper.mode.photon_voltage
    h = 0.25
    v = np.round(vt) + np.arange(-2.0, 2.0 + h / 2, h)
    om = 6.0 + np.linspace(-0.05, 0.01, 120)
    res = spectrum_map(v, om, 3.0, *paper.args)
    assert np.all(res.fit_ok)
    cusp = v[1 + np.argmin(np.diff(res.center, 2))]
    k = np.argmax(np.abs(np.diff(res.fwhm)))
    step = v[k : k + 2]
    assert abs(cusp - vt) <= h
    assert np.min(np.abs(step - cusp)) <= h + 1e-9
