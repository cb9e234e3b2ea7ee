"""Command line entry point: one subcommand per computed figure.

    zenojunction rates --config run.yaml --set junction.delta=205 --threads 4

Exit status is 0 on success, 1 when the physics refuses (grid too narrow,
singular generator, failed fit) and 2 for configuration problems.  No file
is written unless the whole run succeeds.
"""

import argparse
import math
import os
import sys
import warnings

import numpy as np

from .config import ConfigError, RunConfig
from .errors import PhysicsError
from .fockfc import FcTable, TruncationWarning
from .io import result_files, write_outputs
from .junction import i_at, ikk_at, qp_current, table_for_mode
from .lindblad import build_liouvillian, population_decay_rate, spec_from_bias
from .rates import fundamental_shift_series, gamma_n, rate_profile
from .spectroscopy import (
    low_power_eta,
    plateau_level,
    spectrum_map,
    two_tone,
    zeno_sweep,
)


class Context:
    """Junction table, Franck-Condon table and solver settings for one run."""

    def __init__(self, cfg, v_max):
        self.cfg = cfg
        self.p = cfg.junction()
        self.mode = cfg.mode()
        s = cfg["solver"]
        self.iv = table_for_mode(
            self.p, self.mode.photon_voltage, self.mode.cutoff, self.mode.l_max, v_max=v_max, step=s["step"]
        )
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            self.fc = FcTable.build(self.mode.lam, self.mode.cutoff, self.mode.l_max)
        self.variant = s["variant"]
        self.threads = s["threads"]


def _base(cfg, name):
    out = cfg["output"]
    return os.path.join(out["dir"], out["prefix"] or name)


def _long_columns(res):
    vv, ww = np.meshgrid(res.v, res.omega, indexing="ij")
    return [
        ("V", "uV", vv),
        ("omega", "GHz", ww),
        ("re_s11", "1", res.s11.real),
        ("im_s11", "1", res.s11.imag),
        ("abs2", "1", res.abs2),
    ]


def cmd_iv(cfg):
    v = cfg.grid("voltage")
    p = cfg.junction()
    cur = np.array([qp_current(x, p) for x in v])
    cols = [("V", "uV", v), ("I", "nA", cur)]
    extra = {"gap_voltage": p.gap_voltage, "resistance": p.resistance}
    return result_files(_base(cfg, "iv"), "iv", cfg, cols, extra)


def cmd_kk(cfg):
    v = cfg.grid("voltage")
    ctx = Context(cfg, float(np.max(np.abs(v))))
    cols = [("V", "uV", v), ("I", "nA", i_at(ctx.iv, v)), ("I_kk", "nA", ikk_at(ctx.iv, v))]
    extra = {
        "span": ctx.iv.span,
        "step": ctx.iv.step,
        "ikk_zero": ikk_at(ctx.iv, 0.0),
        "ikk_zero_expected": -math.pi * ctx.p.delta / (2.0 * ctx.p.resistance),
    }
    return result_files(_base(cfg, "kk"), "kk", cfg, cols, extra)


BASELINE_BIAS = 0.0  # µV, reference for the rel_* shift columns


def _thresholds(p, mode, n):
    return [p.gap_voltage - l * mode.photon_voltage for l in range(n + 1)]


def cmd_rates(cfg):
    v = cfg.grid("voltage")
    n_max = cfg["sweep"]["n_max"]
    ctx = Context(cfg, float(np.max(np.abs(v))))
    prof = rate_profile(v, ctx.mode, ctx.iv, ctx.fc, n_max=n_max)
    cols = [("V", "uV", v)]
    cols += [(f"gamma_{n}", "MHz", prof.gamma[:, n]) for n in range(n_max + 1)]
    cols += [
        (f"gamma_{n}_l{l}", "MHz", prof.gamma_l[:, n, l]) for n in range(1, n_max + 1) for l in range(1, n + 1)
    ]
    extra = {"thresholds": _thresholds(ctx.p, ctx.mode, n_max), "lam": ctx.mode.lam}
    return result_files(_base(cfg, "rates"), "rates", cfg, cols, extra)


def cmd_lamb(cfg):
    v = cfg.grid("voltage")
    n_max = max(cfg["sweep"]["n_max"], 2)
    if n_max > cfg["solver"]["cutoff"]:
        raise ConfigError("lamb needs solver.cutoff >= 2", "solver.cutoff")
    ctx = Context(cfg, float(np.max(np.abs(v))))
    prof = rate_profile(v, ctx.mode, ctx.iv, ctx.fc, n_max=n_max)
    series = np.array([fundamental_shift_series(x, ctx.mode, ctx.iv) for x in v])
    # far below the gap the shifts settle; that value is absorbed into ω
    base = rate_profile([BASELINE_BIAS], ctx.mode, ctx.iv, ctx.fc, n_max=n_max)
    rel = prof.relative_shifts(base.delta_omega[0])
    rel01, rel12 = rel[:, 1] - rel[:, 0], rel[:, 2] - rel[:, 1]
    cols = [("V", "uV", v)]
    cols += [(f"domega_{n}", "MHz", prof.delta_omega[:, n]) for n in range(n_max + 1)]
    cols += [(f"rel_domega_{n}", "MHz", rel[:, n]) for n in range(n_max + 1)]
    cols += [
        ("shift_01", "MHz", prof.transition(0)),
        ("shift_12", "MHz", prof.transition(1)),
        ("nonlinearity", "MHz", prof.transition(1) - prof.transition(0)),
        ("rel_shift_01", "MHz", rel01),
        ("rel_shift_12", "MHz", rel12),
        ("rel_nonlinearity", "MHz", rel12 - rel01),
        ("classical_01", "MHz", prof.classical),
        ("series_01", "MHz", series),
    ]
    extra = {
        "thresholds": _thresholds(ctx.p, ctx.mode, n_max),
        "lam": ctx.mode.lam,
        "baseline_bias": BASELINE_BIAS,
        "baseline_domega": base.delta_omega[0],
    }
    return result_files(_base(cfg, "lamb"), "lamb", cfg, cols, extra)


def _fits_columns(res, depth=True):
    cols = [("V", "uV", res.v), ("center", "GHz", res.center), ("fwhm", "MHz", res.fwhm), ("fit_ok", "1", res.fit_ok)]
    if depth:
        cols.append(("dip_depth", "dB", res.dip_depth_db()))
    return cols


def cmd_spectrum(cfg):
    v = cfg.grid("voltage")
    ctx = Context(cfg, float(np.max(np.abs(v))))
    eta = cfg["sweep"]["eta_probe"] or low_power_eta(ctx.mode.kappa)
    res = spectrum_map(
        v,
        cfg.grid("frequency"),
        eta,
        ctx.mode,
        ctx.iv,
        ctx.fc,
        variant=ctx.variant,
        threads=ctx.threads,
        lamb_shift=cfg["solver"]["lamb_shift"],
    )
    base = _base(cfg, "spectrum")
    extra = {"eta": eta, "max_abs_s11": float(np.max(np.abs(res.s11)))}
    files = result_files(base, "spectrum", cfg, _long_columns(res), extra)
    files.update(result_files(base + "_fits", "spectrum", cfg, _fits_columns(res), extra))
    return files


def cmd_zeno(cfg):
    sw = cfg["sweep"]
    V = sw["bias"]
    ctx = Context(cfg, abs(V))
    eta = cfg.grid("eta")
    res = zeno_sweep(
        V, eta, ctx.mode, ctx.iv, ctx.fc, variant=ctx.variant, fit_widths=sw["fit_widths"], threads=ctx.threads
    )
    L = build_liouvillian(spec_from_bias(V, ctx.mode, ctx.iv, ctx.fc, variant=ctx.variant))
    loss1 = population_decay_rate(L, 1)
    loss2 = population_decay_rate(L, 2) if ctx.mode.cutoff >= 2 else math.nan
    cols = [
        ("eta", "MHz", eta),
        ("intensity", "1", res.intensity),
        ("n_mean", "1", res.n_mean),
        ("ideal_tls", "1", res.ideal_tls),
    ]
    cols += [(f"p{n}", "1", res.populations[:, n]) for n in range(min(4, res.populations.shape[1]))]
    if sw["fit_widths"]:
        cols += [("Gamma_fit", "MHz", res.gamma_fit), ("kappa_fit", "MHz", res.kappa_fit)]
    extra = {
        "bias": V,
        "detuning": res.detuning,
        "plateau": plateau_level(eta, res.intensity),
        "loss_1": loss1,
        "loss_2": loss2,
        "loss_ratio": loss2 / loss1 if loss1 > 0 else math.nan,
        "gamma_1": gamma_n(V, 1, ctx.mode, ctx.iv, ctx.fc),
        "gamma_2": gamma_n(V, 2, ctx.mode, ctx.iv, ctx.fc) if ctx.mode.cutoff >= 2 else math.nan,
    }
    return result_files(_base(cfg, "zeno"), "zeno", cfg, cols, extra)


def cmd_twotone(cfg):
    v = cfg.grid("voltage")
    tt = cfg["twotone"]
    ctx = Context(cfg, float(np.max(np.abs(v))))
    res, pumps = two_tone(
        v,
        cfg.grid("frequency"),
        ctx.mode,
        ctx.iv,
        ctx.fc,
        eta_probe=cfg["sweep"]["eta_probe"],
        method=tt["method"],
        saturation_rate=tt["saturation_rate"],
        eta_pump=tt["eta_pump"],
        harmonics=tt["harmonics"],
        variant=ctx.variant,
        threads=ctx.threads,
        min_visibility=tt["min_visibility"],
    )
    base = _base(cfg, "twotone")
    fits = _fits_columns(res, depth=False)
    fits += [
        ("pump", "GHz", pumps),
        ("center_err", "GHz", res.center_err),
        ("visibility", "1", res.visibility),
        ("nonlinearity", "MHz", (res.center - pumps) * 1e3),
    ]
    extra = dict(res.meta)
    files = result_files(base, "twotone", cfg, _long_columns(res), extra)
    files.update(result_files(base + "_fits", "twotone", cfg, fits, extra))
    return files


COMMANDS = {
    "iv": (cmd_iv, "quasiparticle current I(V)"),
    "kk": (cmd_kk, "I(V) and its Kramers-Kronig transform"),
    "rates": (cmd_rates, "Fock-state loss rates vs bias"),
    "lamb": (cmd_lamb, "level and transition shifts vs bias"),
    "spectrum": (cmd_spectrum, "reflection map over bias and probe frequency"),
    "zeno": (cmd_zeno, "resonant saturation sweep over drive amplitude"),
    "twotone": (cmd_twotone, "1->2 transition with the 0->1 line pumped"),
}


def build_parser():
    ap = argparse.ArgumentParser(prog="zenojunction", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", help="YAML run configuration")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
        sp.add_argument("--threads", type=int, help="worker threads (solver.threads)")
    return ap


def _report(kind, exc):
    key = getattr(exc, "key", None)
    where = f" [{key}]" if key else ""
    print(f"zenojunction: {kind}{where}: {exc}", file=sys.stderr)


def main(argv=None):
    args = build_parser().parse_args(argv)
    overrides = list(args.set)
    if args.threads is not None:
        overrides.append(f"solver.threads={args.threads}")
    try:
        cfg = RunConfig.load(args.config, overrides)
        files = COMMANDS[args.command][0](cfg)
        written = write_outputs(files)
    except ConfigError as exc:
        _report("config error", exc)
        return 2
    except PhysicsError as exc:
        _report(type(exc).__name__, exc)
        return 1
    except ValueError as exc:
        _report("invalid parameters", exc)
        return 2
    except OSError as exc:
        exc.key = "output.dir"
        _report("cannot write output", exc)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
