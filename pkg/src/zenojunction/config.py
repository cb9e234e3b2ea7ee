"""Run configuration: YAML in, validated nested blocks out.

Every key has a default, so an empty file is a valid config.  Unknown keys
and values of the wrong type are rejected with a :class:`ConfigError` that
names the dotted key at fault.
"""

import copy
import hashlib
import json
import math

import numpy as np
import yaml

from .junction import JunctionParams
from .lindblad import VARIANTS
from .rates import ModeParams
from .spectroscopy import TWO_TONE_METHODS

SCHEMA = {
    "junction": {
        "delta": (float, 200.0),  # µeV
        "r_tunnel": (float, 150.0),  # kΩ
        "r_eff": (float, 430.0),  # kΩ
        "temperature": (float, 0.0),  # k_B T in µeV
        "dynes": (float, 0.0),
        "use_effective": (bool, True),
    },
    "mode": {
        "omega": (float, 6.0),  # GHz
        "z_c": (float, 4.5),  # kΩ
        "lam": (float, None),  # overrides z_c when set
        "kappa_c": (float, 0.45),  # MHz
        "kappa_int": (float, 2.5),  # MHz
    },
    "solver": {
        "cutoff": (int, 15),
        "l_max": (int, 12),
        "variant": (str, "collective"),
        "step": (float, 0.5),  # µV, I(V) table spacing
        "threads": (int, 1),
        "lamb_shift": (bool, True),
    },
    "sweep": {
        "voltage": {"start": (float, 250.0), "stop": (float, 420.0), "num": (int, 171)},  # µV
        "frequency": {"start": (float, 5.94), "stop": (float, 6.01), "num": (int, 141)},  # GHz
        "eta": {"start": (float, 0.05), "stop": (float, 30.0), "num": (int, 60), "log": (bool, True)},  # MHz
        "bias": (float, 362.8),  # µV, fixed bias of the zeno sweep
        "eta_probe": (float, None),  # MHz, low-power value when unset
        "n_max": (int, 4),
        "fit_widths": (bool, False),
    },
    "twotone": {
        "method": (str, "saturation"),
        "saturation_rate": (float, None),  # MHz, κ when unset
        "eta_pump": (float, None),  # MHz, κ/2 when unset
        "harmonics": (int, 6),
        "min_visibility": (float, 0.02),
    },
    "output": {
        "dir": (str, "out"),
        "prefix": (str, None),
    },
}


class ConfigError(Exception):
    """Invalid configuration (mapped to exit code 2 by the CLI)."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


def _is_leaf(entry):
    return isinstance(entry, tuple)


def _defaults(schema):
    return {k: (v[1] if _is_leaf(v) else _defaults(v)) for k, v in schema.items()}


def _coerce(value, kind, key):
    if value is None:
        return None
    if kind is bool:
        if isinstance(value, bool):
            return value
        raise ConfigError(f"expected true/false, got {value!r}", key)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(f"expected an integer, got {value!r}", key)
        return int(value)
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"expected a number, got {value!r}", key)
        if not math.isfinite(value):
            raise ConfigError(f"expected a finite number, got {value!r}", key)
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"expected a string, got {value!r}", key)
    return value


def _merge(schema, base, data, prefix=""):
    if not isinstance(data, dict):
        raise ConfigError(f"expected a mapping, got {type(data).__name__}", prefix.rstrip(".") or None)
    for k, v in data.items():
        key = f"{prefix}{k}"
        if k not in schema:
            raise ConfigError("unknown key", key)
        entry = schema[k]
        if _is_leaf(entry):
            base[k] = _coerce(v, entry[0], key)
        else:
            _merge(entry, base[k], v if v is not None else {}, key + ".")
    return base


def _set_dotted(schema, data, dotted, value):
    parts = dotted.split(".")
    node, sch = data, schema
    for i, part in enumerate(parts):
        key = ".".join(parts[: i + 1])
        if not isinstance(sch, dict) or part not in sch:
            raise ConfigError("unknown key", key)
        if i == len(parts) - 1:
            if not _is_leaf(sch[part]):
                raise ConfigError("cannot assign a scalar to a block", key)
            node[part] = value
        else:
            if _is_leaf(sch[part]):
                raise ConfigError("not a block", key)
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError("expected a mapping", key)
            sch = sch[part]


def parse_override(text):
    """Split ``key=value``; the value is read as a YAML scalar."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value")
    key, raw = text.split("=", 1)
    key = key.strip()
    try:
        value = yaml.safe_load(raw) if raw.strip() else None
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse value {raw!r}: {exc}", key) from exc
    return key, value


class RunConfig:
    """Validated configuration tree with typed accessors for each block."""

    def __init__(self, data=None):
        self.data = _merge(SCHEMA, _defaults(SCHEMA), data or {})
        self._check()

    @classmethod
    def load(cls, path=None, overrides=()):
        raw = {}
        if path is not None:
            try:
                with open(path, encoding="utf-8") as fh:
                    raw = yaml.safe_load(fh)
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from exc
            except yaml.YAMLError as exc:
                raise ConfigError(f"malformed YAML: {exc}") from exc
            if raw is None:
                raw = {}
            if not isinstance(raw, dict):
                raise ConfigError("top level of the config must be a mapping")
        raw = copy.deepcopy(raw)
        for item in overrides:
            key, value = parse_override(item)
            _set_dotted(SCHEMA, raw, key, value)
        return cls(raw)

    def to_dict(self):
        return copy.deepcopy(self.data)

    def content_hash(self):
        """Git blob hash of the canonical JSON form."""
        body = canonical_json(self.data).encode()
        return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self.data == other.data

    def _check(self):
        for block, builder in (("junction", self.junction), ("mode", self.mode)):
            try:
                builder()
            except (TypeError, ValueError) as exc:
                raise ConfigError(str(exc), block) from exc
        s = self.data["solver"]
        if s["variant"] not in VARIANTS:
            raise ConfigError(f"must be one of {VARIANTS}", "solver.variant")
        if s["step"] <= 0:
            raise ConfigError("must be positive", "solver.step")
        if s["threads"] < 1:
            raise ConfigError("must be >= 1", "solver.threads")
        if self.data["twotone"]["method"] not in TWO_TONE_METHODS:
            raise ConfigError(f"must be one of {TWO_TONE_METHODS}", "twotone.method")
        for name in ("voltage", "frequency", "eta"):
            g = self.data["sweep"][name]
            if g["num"] < 1:
                raise ConfigError("must be >= 1", f"sweep.{name}.num")
            if g["num"] > 1 and g["stop"] <= g["start"]:
                raise ConfigError("stop must exceed start", f"sweep.{name}.stop")
        eta = self.data["sweep"]["eta"]
        if eta["log"] and eta["start"] <= 0:
            raise ConfigError("log grid needs a positive start", "sweep.eta.start")
        n_max = self.data["sweep"]["n_max"]
        if not 0 <= n_max <= s["cutoff"]:
            raise ConfigError(f"must lie in 0..solver.cutoff={s['cutoff']}", "sweep.n_max")

    def junction(self):
        return JunctionParams(**self.data["junction"])

    def mode(self):
        m = dict(self.data["mode"])
        s = self.data["solver"]
        if m["lam"] is not None:
            m["z_c"] = None
        return ModeParams(cutoff=s["cutoff"], l_max=s["l_max"], **m)

    def grid(self, name):
        g = self.data["sweep"][name]
        if g["num"] == 1:
            return np.array([g["start"]])
        if g.get("log"):
            return np.geomspace(g["start"], g["stop"], g["num"])
        return np.linspace(g["start"], g["stop"], g["num"])

    def __getitem__(self, block):
        return self.data[block]


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
