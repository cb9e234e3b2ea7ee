"""Driven-dissipative master equation on a truncated Fock space.

Density matrices are flattened column-major (``vec``), so that
``vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)``.  Rates in :class:`LiouvillianSpec` are
ordinary frequencies in MHz; the generator itself is angular, in rad/µs.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import DimensionMismatch, SingularLiouvillian, StepSizeUnderflow
from .rates import gamma_terms, lamb_shift_n

TWO_PI = 2.0 * math.pi
VARIANTS = ("collective", "dephased")


def destroy(dim):
    """Annihilation operator on ``dim`` Fock levels."""
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def number(dim):
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def basis_dm(dim, n):
    rho = np.zeros((dim, dim), dtype=complex)
    rho[n, n] = 1.0
    return rho


def coherent_dm(dim, alpha):
    """Projector on a coherent state, normalized after truncation."""
    n = np.arange(dim)
    logfact = np.array([math.lgamma(k + 1) for k in n])
    amp = np.exp(-0.5 * abs(alpha) ** 2 - 0.5 * logfact) * alpha**n
    amp = amp / np.linalg.norm(amp)
    return np.outer(amp, amp.conj())


def is_hermitian(op, tol=1e-12):
    return float(np.max(np.abs(op - op.conj().T))) < tol


def vec(rho):
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v, dim=None):
    dim = int(round(math.sqrt(v.size))) if dim is None else dim
    return np.asarray(v).reshape(dim, dim, order="F")


@dataclass(frozen=True)
class LiouvillianSpec:
    """Everything that defines the generator, in the pump rotating frame.

    ``detuning`` is ω_pump − ω_bare, ``eta`` the drive amplitude, ``kappa``
    the total single-photon loss, ``lamb[n]`` the level shifts δω_n and
    ``jump_rates[n, l]`` the rate of the l-photon process ``|n+l> → |n>``
    (all MHz).  ``variant`` selects one jump operator per l that keeps
    coherences between Fock ladders (``"collective"``) or one per (n, l)
    pair (``"dephased"``).
    """

    dim: int
    detuning: float = 0.0
    eta: float = 0.0
    kappa: float = 0.0
    lamb: np.ndarray = field(default=None, repr=False)
    jump_rates: np.ndarray = field(default=None, repr=False)
    variant: str = "collective"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.kappa < 0:
            raise ValueError("kappa must be non-negative")
        if self.lamb is not None and np.shape(self.lamb) != (self.dim,):
            raise DimensionMismatch(f"lamb has shape {np.shape(self.lamb)}, expected ({self.dim},)")
        if self.jump_rates is not None:
            r = np.asarray(self.jump_rates)
            if r.shape != (self.dim, self.dim):
                raise DimensionMismatch(
                    f"jump_rates has shape {r.shape}, expected ({self.dim}, {self.dim})"
                )
            if np.any(r < 0):
                raise ValueError("jump rates must be non-negative")

    def jump_operators(self):
        """Collapse operators scaled by sqrt(angular rate)."""
        d = self.dim
        ops = []
        if self.kappa > 0:
            ops.append(math.sqrt(TWO_PI * self.kappa) * destroy(d))
        if self.jump_rates is None:
            return ops
        r = TWO_PI * np.asarray(self.jump_rates, dtype=float)
        for l in range(1, d):
            amps = np.sqrt(r[: d - l, l])
            if not np.any(amps):
                continue
            if self.variant == "collective":
                ops.append(np.diag(amps, l).astype(complex))
            else:
                for n in np.flatnonzero(amps):
                    op = np.zeros((d, d), dtype=complex)
                    op[n, n + l] = amps[n]
                    ops.append(op)
        return ops

    def hamiltonian(self):
        d = self.dim
        a = destroy(d)
        h = -self.detuning * number(d) + self.eta * (a + a.conj().T)
        if self.lamb is not None:
            h = h + np.diag(np.asarray(self.lamb, dtype=float))
        return TWO_PI * h


def spec_from_bias(V, mode, iv, fc, detuning=0.0, eta=0.0, variant="collective", lamb_shift=True, dim=None):
    """Assemble a :class:`LiouvillianSpec` for bias ``V`` from the rate engine."""
    d = mode.cutoff + 1 if dim is None else dim
    if d - 1 > mode.cutoff:
        raise DimensionMismatch(f"dim={d} exceeds mode cutoff {mode.cutoff} + 1")
    rates = np.zeros((d, d))
    for m in range(1, d):
        terms = gamma_terms(V, m, mode, iv, fc)
        for l in range(1, m + 1):
            rates[m - l, l] = terms[l - 1]
    lamb = None
    if lamb_shift:
        shifts = np.array([lamb_shift_n(V, n, mode, iv, fc) for n in range(d)])
        lamb = shifts - shifts[0]
    return LiouvillianSpec(
        dim=d,
        detuning=detuning,
        eta=eta,
        kappa=mode.kappa,
        lamb=lamb,
        jump_rates=rates,
        variant=variant,
    )


def _dissipator(op):
    d = op.shape[0]
    eye = np.eye(d)
    ops = op.conj().T @ op
    return np.kron(op.conj(), op) - 0.5 * np.kron(eye, ops) - 0.5 * np.kron(ops.T, eye)


def build_liouvillian(spec):
    """Dense generator acting on ``vec(ρ)``, in rad/µs."""
    d = spec.dim
    eye = np.eye(d)
    h = spec.hamiltonian()
    L = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for op in spec.jump_operators():
        if op.shape != (d, d):
            raise DimensionMismatch(f"jump operator of shape {op.shape} in dim {d}")
        L = L + _dissipator(op)
    return L


def detuning_generator(dim):
    """∂L/∂(detuning) for detuning in MHz; lets sweeps reuse one assembly."""
    n = number(dim)
    eye = np.eye(dim)
    return 1j * TWO_PI * (np.kron(eye, n) - np.kron(n.T, eye))


def trace_residual(L):
    """max |vec(1)ᵀ L|: zero for a trace-preserving generator."""
    d = int(round(math.sqrt(L.shape[0])))
    return float(np.max(np.abs(vec(np.eye(d)) @ L)))


def steady_state(L):
    """Unique stationary state of ``L``.

    One equation is replaced by the trace condition and the system is solved
    directly.  Raises :class:`SingularLiouvillian` when the stationary space
    is degenerate.
    """
    n = L.shape[0]
    d = int(round(math.sqrt(n)))
    if d * d != n:
        raise DimensionMismatch(f"superoperator size {n} is not a square")
    A = np.array(L, dtype=complex)
    A[0, :] = vec(np.eye(d))
    b = np.zeros(n, dtype=complex)
    b[0] = 1.0
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("error", sla.LinAlgWarning)
            x = sla.solve(A, b, check_finite=False)
    except (np.linalg.LinAlgError, sla.LinAlgWarning) as exc:
        sv = sla.svdvals(L)
        null = int(np.sum(sv < 1e-10 * max(sv[0], 1.0)))
        raise SingularLiouvillian(f"stationary space has dimension {null}") from exc
    scale = max(1.0, float(np.max(np.abs(L))))
    resid = float(np.max(np.abs(L @ x)))
    if resid > 1e-9 * scale:
        raise SingularLiouvillian(f"steady-state residual {resid:.3g} exceeds tolerance")
    rho = unvec(x, d)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def _rk4_propagator(L, h):
    n = L.shape[0]
    hl = h * L
    p = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(1, 5):
        term = term @ hl / k
        p = p + term
    return p


def evolve(L, rho0, t_grid, tol=1e-10):
    """Integrate ``dρ/dt = L ρ`` with classical RK4, returning ρ at each time.

    ``L`` is linear and constant, so each RK4 step is a fixed matrix (the
    degree-4 Taylor polynomial of ``exp(hL)``).  The step is halved until
    the Richardson estimate of the local error is below ``tol``.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.size and np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    d = rho0.shape[0]
    horizon = float(t[-1] - t[0]) if t.size > 1 else 0.0
    norm = float(np.max(np.sum(np.abs(L), axis=0))) if L.size else 0.0
    h = min(horizon, 0.5 / norm) if norm > 0 else horizon
    if horizon > 0 and norm > 0:
        while True:
            one = _rk4_propagator(L, h)
            err = float(np.max(np.abs(one @ one - _rk4_propagator(L, 2 * h)))) / 15.0
            if err <= tol:
                break
            h *= 0.5
            if h < 1e-14 * horizon:
                raise StepSizeUnderflow(f"RK4 step fell to {h:.3g} µs")
    out = [np.array(rho0, dtype=complex)]
    x = vec(rho0).astype(complex)
    cache = {}
    for dt in np.diff(t):
        steps = max(1, math.ceil(dt / h - 1e-9)) if h > 0 else 1
        key = (steps, float(dt))
        if key not in cache:
            cache[key] = np.linalg.matrix_power(_rk4_propagator(L, dt / steps), steps)
        x = cache[key] @ x
        out.append(unvec(x, d).copy())
    return out


@dataclass(frozen=True)
class Observables:
    mean_a: complex
    n_mean: float
    populations: np.ndarray = field(repr=False)

    @property
    def intensity(self):
        """|<a>|²."""
        return abs(self.mean_a) ** 2


def observables(rho):
    d = rho.shape[0]
    pops = np.real(np.diag(rho)).copy()
    mean_a = complex(np.trace(rho @ destroy(d)))
    return Observables(mean_a, float(np.dot(np.arange(d), pops)), pops)


def population_decay_rate(L, k):
    """Total loss rate of population out of ``|k>`` (MHz), read off the generator."""
    d = int(round(math.sqrt(L.shape[0])))
    idx = k + k * d
    return float(-L[idx, idx].real / TWO_PI)


def photon_flux_balance(spec, rho):
    """Drive-injected photon rate and the sum of all photon loss channels (MHz·photons).

    The two agree at steady state: single-photon loss ``κ<n>`` plus
    ``Σ_l l × (l-photon jump rate)``.
    """
    d = spec.dim
    mean_a = np.trace(rho @ destroy(d))
    injected = -2.0 * spec.eta * mean_a.imag
    pops = np.real(np.diag(rho))
    lost = spec.kappa * float(np.dot(np.arange(d), pops))
    if spec.jump_rates is not None:
        r = np.asarray(spec.jump_rates)
        for l in range(1, d):
            lost += l * float(np.dot(r[: d - l, l], pops[l:]))
    return float(injected), float(lost)


def is_density_matrix(rho, tol=1e-9, pos_tol=1e-8):
    if abs(np.trace(rho) - 1.0) > tol:
        return False
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        return False
    return float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)))) >= -pos_tol
