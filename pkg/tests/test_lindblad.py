import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from zenojunction.errors import DimensionMismatch, SingularLiouvillian, StepSizeUnderflow
from zenojunction.fockfc import FcTable
from zenojunction.junction import JunctionParams, table_for_mode
from zenojunction.lindblad import (
    TWO_PI,
    LiouvillianSpec,
    basis_dm,
    build_liouvillian,
    coherent_dm,
    destroy,
    evolve,
    is_density_matrix,
    is_hermitian,
    observables,
    photon_flux_balance,
    population_decay_rate,
    spec_from_bias,
    steady_state,
    trace_residual,
    unvec,
    vec,
)
from zenojunction.rates import ModeParams, gamma_n, lamb_shift_n

KAPPA = 2.95


def cavity(dim=30, eta=0.05, detuning=0.0, kappa=KAPPA):
    return LiouvillianSpec(dim=dim, detuning=detuning, eta=eta, kappa=kappa)


def test_vec_identity():
    rng = np.random.default_rng(1)
    A, B, R = (rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)) for _ in range(3))
    assert np.allclose(vec(A @ R @ B), np.kron(B.T, A) @ vec(R))
    assert np.array_equal(unvec(vec(R)), R)


def test_operators():
    a = destroy(5)
    assert np.allclose(np.diag(a.conj().T @ a).real, np.arange(5))
    assert is_hermitian(a + a.conj().T)
    assert not is_hermitian(a)
    rho = coherent_dm(20, 0.7 + 0.2j)
    assert is_density_matrix(rho)
    assert observables(rho).intensity == pytest.approx(observables(rho).n_mean, rel=1e-6)


def test_spec_validation():
    with pytest.raises(ValueError):
        LiouvillianSpec(dim=3, variant="other")
    with pytest.raises(ValueError):
        LiouvillianSpec(dim=3, kappa=-1.0)
    with pytest.raises(DimensionMismatch):
        LiouvillianSpec(dim=3, lamb=np.zeros(4))
    with pytest.raises(DimensionMismatch):
        LiouvillianSpec(dim=3, jump_rates=np.zeros((2, 2)))
    with pytest.raises(ValueError):
        LiouvillianSpec(dim=2, jump_rates=-np.ones((2, 2)))


def test_trace_preservation_at_paper_bias(paper):
    for variant in ("collective", "dephased"):
        spec = spec_from_bias(383.0, *paper.args, eta=2.0, variant=variant)
        assert trace_residual(build_liouvillian(spec)) < 1e-10


@settings(max_examples=25, deadline=None)
@given(
    dim=st.integers(2, 6),
    eta=st.floats(0.0, 5.0),
    detuning=st.floats(-10.0, 10.0),
    kappa=st.floats(0.0, 5.0),
    seed=st.integers(0, 2**16),
    variant=st.sampled_from(["collective", "dephased"]),
)
def test_random_generators_are_trace_preserving(dim, eta, detuning, kappa, seed, variant):
    rng = np.random.default_rng(seed)
    spec = LiouvillianSpec(
        dim=dim,
        detuning=detuning,
        eta=eta,
        kappa=kappa,
        lamb=rng.normal(size=dim),
        jump_rates=np.triu(rng.uniform(0, 50, size=(dim, dim))),
        variant=variant,
    )
    L = build_liouvillian(spec)
    assert trace_residual(L) < 1e-10 * max(1.0, np.max(np.abs(L)))


def test_empty_bath_limit():
    spec = cavity(dim=12, eta=0.0, detuning=1.3)
    L = build_liouvillian(spec)
    ev = np.linalg.eigvals(L)
    # the <a> branch decays at κ/2 and rotates at the detuning
    target = TWO_PI * (-0.5 * KAPPA + 1j * 1.3)
    assert np.min(np.abs(ev - target)) < 1e-9 or np.min(np.abs(ev - target.conjugate())) < 1e-9
    rho = steady_state(L)
    assert np.allclose(rho, basis_dm(12, 0), atol=1e-12)


@pytest.mark.parametrize("detuning", [0.0, 1.7])
def test_driven_cavity_closed_form(detuning):
    eta = 0.05
    rho = steady_state(build_liouvillian(cavity(eta=eta, detuning=detuning)))
    alpha = -1j * eta / (0.5 * KAPPA - 1j * detuning)
    obs = observables(rho)
    assert abs(obs.mean_a - alpha) < 1e-6
    assert abs(obs.n_mean - abs(alpha) ** 2) < 1e-6
    assert abs(obs.intensity - obs.n_mean) < 1e-6
    if detuning == 0:
        assert abs(obs.mean_a - (-2j * eta / KAPPA)) < 1e-12


def test_steady_state_is_a_density_matrix(paper):
    spec = spec_from_bias(362.8, *paper.args, eta=3.0, detuning=-29.0)
    rho = steady_state(build_liouvillian(spec))
    assert is_density_matrix(rho, tol=1e-9, pos_tol=1e-8)
    assert abs(np.sum(observables(rho).populations) - 1.0) < 1e-9


def test_singular_generator_detected():
    # no dissipation at all: every diagonal state is stationary
    L = build_liouvillian(LiouvillianSpec(dim=4, detuning=0.3))
    with pytest.raises(SingularLiouvillian):
        steady_state(L)


def test_non_square_superoperator():
    with pytest.raises(DimensionMismatch):
        steady_state(np.zeros((5, 5)))


def test_fock_decay_closed_form():
    spec = cavity(dim=6, eta=0.0)
    L = build_liouvillian(spec)
    t = np.linspace(0.0, 1.0, 11)
    states = evolve(L, basis_dm(6, 1), t)
    n = np.array([observables(r).n_mean for r in states])
    assert np.max(np.abs(n - np.exp(-TWO_PI * KAPPA * t))) < 1e-6


def test_relaxation_to_steady_state():
    spec = cavity(dim=20, eta=0.01, detuning=0.4)
    L = build_liouvillian(spec)
    horizon = 20.0 / (TWO_PI * KAPPA)
    out = evolve(L, basis_dm(20, 0), np.array([0.0, horizon]))
    assert np.max(np.abs(out[-1] - steady_state(L))) < 1e-6


def test_evolution_drift_bounds(paper):
    spec = spec_from_bias(362.8, *paper.args, eta=2.0, detuning=-29.0, dim=8)
    L = build_liouvillian(spec)
    t = np.linspace(0.0, 10.0 / (TWO_PI * paper.mode.kappa), 21)
    for rho in evolve(L, coherent_dm(8, 0.8), t):
        assert abs(np.trace(rho) - 1.0) < 1e-8
        assert np.max(np.abs(rho - rho.conj().T)) < 1e-9


def test_evolve_argument_checks():
    L = build_liouvillian(cavity(dim=4))
    with pytest.raises(ValueError):
        evolve(L, basis_dm(4, 0), [0.0, 0.2, 0.1])
    with pytest.raises(StepSizeUnderflow):
        evolve(L, basis_dm(4, 0), [0.0, 1.0], tol=0.0)


def test_two_level_plateau():
    def intensity(eta):
        rho = steady_state(build_liouvillian(cavity(dim=2, eta=eta)))
        return observables(rho).intensity

    res = minimize_scalar(lambda e: -intensity(e), bounds=(0.1, 5.0), method="bounded", options={"xatol": 1e-10})
    assert -res.fun == pytest.approx(1 / 8, abs=1e-6)
    assert res.x == pytest.approx(KAPPA / math.sqrt(8), rel=1e-3)


def test_decay_rates_read_from_generator(paper):
    V = 362.8
    L = build_liouvillian(spec_from_bias(V, *paper.args))
    for n in range(1, 5):
        expected = n * paper.mode.kappa + gamma_n(V, n, *paper.args)
        assert population_decay_rate(L, n) == pytest.approx(expected, rel=1e-12)


def test_lamb_diagonal_relative_to_vacuum(paper):
    spec = spec_from_bias(340.0, *paper.args)
    assert spec.lamb[0] == 0.0
    d1 = lamb_shift_n(340.0, 1, *paper.args) - lamb_shift_n(340.0, 0, *paper.args)
    assert spec.lamb[1] == pytest.approx(d1, rel=1e-12)
    assert spec_from_bias(340.0, *paper.args, lamb_shift=False).lamb is None


def test_dim_above_cutoff_rejected(paper):
    with pytest.raises(DimensionMismatch):
        spec_from_bias(340.0, *paper.args, dim=paper.mode.cutoff + 2)


@pytest.mark.parametrize("variant", ["collective", "dephased"])
def test_photon_flux_balance(paper, variant):
    spec = spec_from_bias(362.8, *paper.args, eta=4.0, detuning=-29.0, variant=variant)
    rho = steady_state(build_liouvillian(spec))
    injected, lost = photon_flux_balance(spec, rho)
    assert injected > 0
    assert lost == pytest.approx(injected, rel=1e-8)


def test_variants_share_populations_without_coherence(paper):
    # with no drive nothing distinguishes the two jump forms on diagonal states
    rho0 = basis_dm(paper.mode.cutoff + 1, 3)
    t = np.array([0.0, 0.01, 0.05])
    runs = []
    for variant in ("collective", "dephased"):
        L = build_liouvillian(spec_from_bias(380.0, *paper.args, variant=variant))
        runs.append([np.real(np.diag(r)) for r in evolve(L, rho0, t)])
    assert np.allclose(runs[0], runs[1], atol=1e-12)


def test_cutoff_convergence_at_largest_pump():
    vals = []
    for N in (15, 20):
        mode = ModeParams(cutoff=N)
        iv = table_for_mode(JunctionParams(), mode.photon_voltage, N, v_max=400.0)
        fc = FcTable.build(mode.lam, N, mode.l_max)
        spec = spec_from_bias(362.8, mode, iv, fc, dim=2)
        spec = spec_from_bias(362.8, mode, iv, fc, eta=30.0, detuning=spec.lamb[1])
        vals.append(observables(steady_state(build_liouvillian(spec))).intensity)
    assert abs(vals[0] - vals[1]) < 1e-4
