"""Quasiparticle I(V) of a voltage-biased SIS junction and its KK transform.

Units: energies µeV, voltages µV, resistances kΩ, currents nA.  With these
choices ``I = (1/R) ∫ dE ...`` needs no conversion factor since
1 µV / 1 kΩ = 1 nA.
"""

import math
import warnings
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy.integrate import IntegrationWarning, quad, trapezoid
from scipy.interpolate import CubicSpline
from scipy.special import expit

from .errors import GridTooNarrow, OutOfRange, QuadratureNotConverged

QUAD_RTOL = 1e-6
GUARD = 1.25  # internal grid half-width relative to the trusted span
TAIL_DECADES = 3.0


@dataclass(frozen=True)
class JunctionParams:
    """SIS junction parameters.

    ``r_eff`` absorbs the Coulomb-blockade renormalization from the other
    resonator modes and is the resistance used by default.  ``temperature``
    is k_B·T in µeV and ``dynes`` is the broadening γ_D/Δ.
    """

    delta: float = 200.0
    r_tunnel: float = 150.0
    r_eff: float = 430.0
    temperature: float = 0.0
    dynes: float = 0.0
    use_effective: bool = True

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not 0 < self.r_tunnel <= self.r_eff:
            raise ValueError(
                f"need 0 < r_tunnel <= r_eff, got r_tunnel={self.r_tunnel}, r_eff={self.r_eff}"
            )
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if not 0 <= self.dynes <= 1e-3:
            raise ValueError(f"dynes must lie in [0, 1e-3], got {self.dynes}")

    @property
    def resistance(self):
        return self.r_eff if self.use_effective else self.r_tunnel

    @property
    def gap_voltage(self):
        """2Δ/e in µV."""
        return 2.0 * self.delta

    @property
    def sharp_gap(self):
        """True when I(V) vanishes identically inside the gap."""
        return self.temperature == 0 and self.dynes == 0


def bcs_dos(E, delta, dynes=0.0):
    """Normalized BCS density of states, optionally Dynes-broadened.

    ``dynes`` is γ_D/Δ.  Without broadening the density is ``|E|/sqrt(E²-Δ²)``
    outside the gap and exactly zero inside.
    """
    E = np.asarray(E, dtype=float)
    if dynes > 0:
        z = E + 1j * dynes * delta
        return np.abs(np.real(z / np.sqrt(z * z - delta * delta)))
    out = np.zeros_like(E)
    mask = np.abs(E) > delta
    Em = np.abs(E[mask])
    out[mask] = Em / np.sqrt((Em - delta) * (Em + delta))
    return out if out.ndim else float(out)


def _fermi(E, temperature):
    if temperature == 0:
        return np.where(E < 0, 1.0, np.where(E > 0, 0.0, 0.5))
    return expit(-E / temperature)


def _quad(func, a, b, points=None):
    # convergence is judged below from the returned error, not from scipy's warning
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err = quad(func, a, b, epsabs=1e-14, epsrel=1e-10, limit=400, points=points)
    if err > QUAD_RTOL * abs(val) + 1e-12:
        raise QuadratureNotConverged(
            f"quadrature on [{a:.6g}, {b:.6g}] reached error {err:.3g} for value {val:.6g}"
        )
    return val


def _edge_integral(func, a, b):
    """∫_a^b func, with inverse-square-root edges removed by E = mid - half·cos θ."""
    mid, half = 0.5 * (a + b), 0.5 * (b - a)

    def integrand(theta):
        return func(mid - half * math.cos(theta)) * half * math.sin(theta)

    return _quad(integrand, 0.0, math.pi)


def _current_sharp_zero_t(v, delta):
    # T = 0, no broadening: integrate n(E) n(eV-E) over [Δ, eV-Δ].  The
    # arccos substitution cancels both band-edge singularities analytically.
    if v < 2.0 * delta:
        return 0.0
    a, b = delta, v - delta
    mid, half = 0.5 * (a + b), 0.5 * (b - a)

    def integrand(theta):
        E = mid - half * math.cos(theta)
        return E * (v - E) / math.sqrt((E + delta) * (v - E + delta))

    return _quad(integrand, 0.0, math.pi)


def _current_general(v, p):
    delta, temp, dyn = p.delta, p.temperature, p.dynes
    width = 40.0 * temp + 200.0 * dyn * delta
    lo, hi = -v - width, width
    if temp > 0:
        lo -= delta
        hi += delta

    def integrand(E):
        return float(
            bcs_dos(E, delta, dyn)
            * bcs_dos(E + v, delta, dyn)
            * (_fermi(E, temp) - _fermi(E + v, temp))
        )

    edges = sorted({lo, hi, *[e for e in (-delta, delta, -v - delta, -v + delta) if lo < e < hi]})
    if dyn > 0:
        return _quad(integrand, lo, hi, points=edges[1:-1] or None)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        m = 0.5 * (a + b)
        if abs(m) <= delta or abs(m + v) <= delta or b - a <= 0:
            continue
        total += _edge_integral(integrand, a, b)
    return total


def qp_current(V, p):
    """Quasiparticle current I(V) in nA through the bare junction.

    Evaluated directly by adaptive quadrature of the BCS tunnelling integral
    with resistance ``p.resistance``.  Odd in V by construction.
    """
    v = abs(float(V))
    if v == 0.0:
        return 0.0
    if p.sharp_gap:
        val = _current_sharp_zero_t(v, p.delta)
    else:
        val = _current_general(v, p)
    return math.copysign(val / p.resistance, V)


def _uniform_symmetric(x):
    x = np.asarray(x, dtype=float)
    h = x[1] - x[0]
    if not np.allclose(np.diff(x), h, rtol=1e-9, atol=1e-12 * max(1.0, abs(h))):
        raise ValueError("grid must be uniformly spaced")
    if not np.allclose(x, -x[::-1], atol=1e-9 * max(1.0, abs(x[-1]))):
        raise ValueError("grid must be symmetric about zero")
    return h


def _atanh_ratio(x, L):
    """``2·atanh(x/L)/x`` with its x → 0 limit."""
    x = np.asarray(x, dtype=float)
    t = x / L
    small = np.abs(t) < 1e-4
    safe = np.where(small, 1.0, x)
    return np.where(small, (2.0 / L) * (1.0 + t * t / 3.0), 2.0 * np.arctanh(np.where(small, 0.0, t)) / safe)


def analytic_tail(L, coeff, parity="odd"):
    """Outside-grid contribution for a function decaying as ``c/x`` (odd) or ``d/x²`` (even).

    Returns a callable giving ``∫_{|x'|>L} y(x')/(x'-x) dx'`` (without 1/π).
    """

    def tail(x):
        x = np.asarray(x, dtype=float)
        if parity == "odd":
            return coeff * _atanh_ratio(x, L)
        t = x / L
        small = np.abs(t) < 1e-3
        safe = np.where(small, 1.0, x)
        big = coeff * (_atanh_ratio(x, L) / safe - 2.0 / (safe * L))
        series = coeff * (2.0 * x / (3.0 * L**3)) * (1.0 + 0.6 * t * t)
        return np.where(small, series, big)

    return tail


def hilbert_pv(x, y, parity="odd", tail="analytic"):
    """``(1/π) P∫ y(x')/(x'-x) dx'`` on a uniform grid symmetric about 0.

    Grid points are paired symmetrically around each evaluation point so the
    pole cancels; the paired integrand ``[y(x+s) - y(x-s)]/s`` is integrated
    with the trapezoid rule (its ``s = 0`` value is twice the central
    difference slope) and the unpaired remainder with a plain trapezoid.
    ``parity`` states the symmetry of ``y`` and fixes the symmetry of the
    output.  ``tail`` is ``"analytic"`` (power-law decay fitted at the grid
    edge), ``None``, or a callable returning the outside contribution.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    h = _uniform_symmetric(x)
    mid = n // 2
    out = np.zeros(n)
    for i in range(mid, n - 1):
        k = n - 1 - i
        acc = 0.0
        if k > 0:
            s = np.arange(1, k + 1) * h
            g = (y[i + 1 : i + k + 1] - y[i - 1 : i - k - 1 if i - k - 1 >= 0 else None : -1]) / s
            g0 = (y[i + 1] - y[i - 1]) / h
            acc += h * (0.5 * g0 + g[:-1].sum() + 0.5 * g[-1])
        j = i - k  # first paired index on the left
        if j > 0:
            seg = y[: j + 1] / (x[: j + 1] - x[i])
            acc += h * (seg.sum() - 0.5 * (seg[0] + seg[-1]))
        out[i] = acc
    if tail == "analytic":
        L = x[-1]
        coeff = y[-1] * L if parity == "odd" else y[-1] * L * L
        tail = analytic_tail(L, coeff, parity)
    if tail is not None:
        out[mid:-1] += tail(x[mid:-1])
    # the pole sits on the last grid point; extrapolate it
    out[-1] = 2.0 * out[-2] - out[-3]
    sign = 1.0 if parity == "odd" else -1.0
    out[:mid] = sign * out[::-1][:mid]
    return out / math.pi


def _mirror(values_pos, parity):
    """Extend samples on x ≥ 0 (x = 0 first) to the symmetric grid."""
    sign = -1.0 if parity == "odd" else 1.0
    return np.concatenate([sign * values_pos[:0:-1], values_pos])


def _step_kk(v, gap, jump, eps):
    """KK transform of the analytic gap-edge part ``J·(2Δ/V)·θ(|V|-2Δ)`` (odd).

    Even in V; its log singularity at |V| = 2Δ is cut off at ``eps``, the
    value of a grid-cell average.
    """
    v = np.abs(np.asarray(v, dtype=float))
    inner = v < 0.5 * gap
    safe = np.where(inner, 1.0, v)
    near = np.log((gap + v) / np.maximum(np.abs(gap - v), eps)) / safe
    phi = np.where(inner, _atanh_ratio(np.where(inner, v, 0.0), gap), near)
    return gap * jump / math.pi * phi


def _step_part(v, gap, jump):
    v = np.asarray(v, dtype=float)
    a = np.abs(v)
    return np.where(a >= gap, np.sign(v) * jump * gap / np.where(a > 0, a, 1.0), 0.0)


@dataclass(frozen=True)
class IvTable:
    """Sampled I(V) and I^KK(V) on a uniform grid symmetric about zero.

    ``span`` is the half-width over which I^KK is trusted; the grid itself
    extends a little further to keep the principal-value scheme away from
    its edges.  ``gap`` and ``jump`` describe the discontinuity of I at
    ±2Δ/e (``jump = 0`` when the current is continuous); at the gap edge
    ``i_of_v`` stores the value on the conducting side.
    """

    grid: np.ndarray = field(repr=False)
    i_of_v: np.ndarray = field(repr=False)
    resistance: float
    span: float
    gap: float = 0.0
    jump: float = 0.0
    inner_edge: float = 0.0
    sharp_gap: bool = False
    ikk_of_v: np.ndarray = field(default=None, repr=False)
    ikk_smooth: np.ndarray = field(default=None, repr=False)
    tail_u: np.ndarray = field(default=None, repr=False)
    tail_i: np.ndarray = field(default=None, repr=False)
    params: JunctionParams = None

    @classmethod
    def from_params(cls, p, span, step=0.5, transform=True):
        """Tabulate I(V) by quadrature on ``|V| ≤ GUARD·span`` with spacing ≤ ``step``.

        The gap voltage always falls on a grid point.  Samples of I on a
        geometric grid beyond the table feed the KK tail.
        """
        gap = p.gap_voltage
        if span <= gap:
            raise GridTooNarrow(f"span {span:.6g} µV does not reach past the gap voltage {gap:.6g} µV")
        h = gap / math.ceil(gap / step)
        m = math.ceil(GUARD * span / h)
        v_pos = h * np.arange(m + 1)
        i_pos = np.array([qp_current(v, p) for v in v_pos])
        grid = h * np.arange(-m, m + 1)
        i_of_v = _mirror(i_pos, "odd")
        jump, inner_edge = 0.0, 0.0
        if p.dynes == 0:
            above = qp_current(gap, p) if p.sharp_gap else qp_current(gap * (1 + 1e-9), p)
            inner_edge = 0.0 if p.sharp_gap else qp_current(gap * (1 - 1e-9), p)
            jump = above - inner_edge
            k = int(round(gap / h))
            i_of_v[m + k] = above
            i_of_v[m - k] = -above
        L = v_pos[-1]
        tail_u = np.geomspace(L, L * 10**TAIL_DECADES, 241)[1:]
        tail_i = np.array([qp_current(u, p) for u in tail_u])
        table = cls(
            grid=grid,
            i_of_v=i_of_v,
            resistance=p.resistance,
            span=float(span),
            gap=gap if p.dynes == 0 else 0.0,
            jump=jump,
            inner_edge=inner_edge,
            sharp_gap=p.sharp_gap,
            tail_u=tail_u,
            tail_i=tail_i,
            params=p,
        )
        for arr in (grid, i_of_v):
            arr.setflags(write=False)
        return kk_transform(table) if transform else table

    @property
    def step(self):
        return float(self.grid[1] - self.grid[0])

    @cached_property
    def _i_splines(self):
        g, i = self.grid, self.i_of_v
        if self.gap <= 0:
            return None, CubicSpline(g[g >= 0], i[g >= 0])
        outer = g >= self.gap - 1e-9 * self.gap
        inner = (g >= 0) & (g <= self.gap + 1e-9 * self.gap)
        inner_vals = i[inner].copy()
        inner_vals[-1] = self.inner_edge
        inner_spline = None if self.sharp_gap else CubicSpline(g[inner], inner_vals)
        return inner_spline, CubicSpline(g[outer], i[outer])

    @cached_property
    def _kk_spline(self):
        if self.ikk_smooth is None:
            raise ValueError("table has no KK transform; call kk_transform first")
        g = self.grid
        return CubicSpline(g[g >= 0], self.ikk_smooth[g >= 0])

    def regularization(self):
        """Cutoff on |V - 2Δ/e| equal to the grid-cell average of the log."""
        return 0.5 * self.step / math.e


def _check_range(v, limit, what):
    v = np.asarray(v, dtype=float)
    if np.any(np.abs(v) > limit * (1 + 1e-12)):
        bad = float(np.max(np.abs(v)))
        raise OutOfRange(f"{what} requested at |V| = {bad:.6g} µV beyond table span {limit:.6g} µV")
    return v


def i_at(iv, V):
    """Interpolated current in nA; exactly zero inside a sharp gap."""
    v = _check_range(V, iv.grid[-1], "I(V)")
    a = np.abs(v)
    inner_spline, outer_spline = iv._i_splines
    if iv.gap <= 0:
        out = outer_spline(a)
    else:
        conducting = a >= iv.gap
        out = np.where(conducting, outer_spline(np.maximum(a, iv.gap)), 0.0)
        if inner_spline is not None:
            out = np.where(conducting, out, inner_spline(np.minimum(a, iv.gap)))
    out = np.sign(v) * out
    return float(out) if out.ndim == 0 else out


def ikk_at(iv, V):
    """Interpolated KK-transformed current in nA (even in V)."""
    v = _check_range(V, iv.span, "I^KK(V)")
    a = np.abs(v)
    out = iv._kk_spline(a)
    if iv.jump:
        out = out + _step_kk(a, iv.gap, iv.jump, iv.regularization())
    return float(out) if np.ndim(out) == 0 else out


def _table_tail(iv, L_int):
    """Outside contribution from sampled current beyond the grid plus an analytic remainder."""
    u = iv.tail_u
    c = iv.tail_i - u / iv.resistance - _step_part(u, iv.gap, iv.jump)
    c_far = c[-1] * u[-1]
    log_u = np.log(u)
    # prepend the grid edge so the sampled integral starts at L_int
    c_edge = iv.i_of_v[-1] - L_int / iv.resistance - float(_step_part(L_int, iv.gap, iv.jump))
    u = np.concatenate([[L_int], u])
    c = np.concatenate([[c_edge], c])
    log_u = np.concatenate([[math.log(L_int)], log_u])

    def tail(x):
        x = np.asarray(x, dtype=float)
        kern = c[None, :] * 2.0 * u[None, :] ** 2 / (u[None, :] ** 2 - x[:, None] ** 2)
        sampled = trapezoid(kern, log_u, axis=1)
        return sampled + c_far * _atanh_ratio(x, u[-1])

    far = lambda x: c_far * _atanh_ratio(x, u[-1])  # noqa: E731
    return tail, far


def kk_transform(iv):
    """Return a copy of ``iv`` with ``ikk_of_v`` filled.

    The ohmic part V/R is removed first (its transform has no dispersive
    structure) and, when I jumps at the gap edge, so is the analytic piece
    ``J·(2Δ/V)·θ(|V|-2Δ)`` whose transform is known in closed form.  The
    continuous remainder goes through :func:`hilbert_pv`.
    """
    g = iv.grid
    reg = iv.i_of_v - g / iv.resistance
    if iv.jump:
        reg = reg - _step_part(g, iv.gap, iv.jump)
    L_int = float(g[-1])
    if iv.tail_u is not None:
        tail, far = _table_tail(iv, L_int)
    else:
        coeff = reg[-1] * L_int
        tail = far = analytic_tail(L_int, coeff, "odd")
    smooth = hilbert_pv(g, reg, "odd", tail=tail)
    full = smooth.copy()
    if iv.jump:
        full = full + _step_kk(g, iv.gap, iv.jump, 0.5 * (g[1] - g[0]) / math.e)
    trusted = np.abs(g) <= iv.span * 0.8
    scale = np.max(np.abs(full[trusted])) if np.any(trusted) else 0.0
    leftover = np.max(np.abs(far(g[trusted]))) / math.pi if np.any(trusted) else 0.0
    if scale > 0 and leftover > 0.01 * scale:
        raise GridTooNarrow(
            f"analytic tail contributes {leftover:.3g} nA, above 1% of |I^KK| max {scale:.3g} nA"
        )
    smooth.setflags(write=False)
    full.setflags(write=False)
    return replace(iv, ikk_of_v=full, ikk_smooth=smooth)


def table_for_mode(p, photon_voltage, cutoff, l_max=12, v_max=None, step=0.5):
    """Build a table wide enough for rates and Lamb shifts up to ``cutoff`` photons.

    ``photon_voltage`` is ħω/e in µV; ``v_max`` the largest bias of interest
    (default 2Δ/e).
    """
    v_max = p.gap_voltage if v_max is None else v_max
    need = max(v_max + (cutoff + 1) * photon_voltage, abs(v_max - l_max * photon_voltage))
    span = max(need, p.gap_voltage + 12 * photon_voltage) + 4 * step
    return IvTable.from_params(p, span, step)
