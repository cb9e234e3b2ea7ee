"""Flat-file output: CSV with a unit row, plus a JSON metadata sidecar.

Files are staged under temporary names and only renamed into place once
every file of a run has been written, so a failed run leaves nothing
behind.
"""

import json
import os
from importlib import metadata

import numpy as np

FLOAT_FMT = "{:.12g}"

# conventions recorded in every sidecar
CONVENTIONS = {
    "rates": "gamma/2pi in MHz",
    "shifts": "delta_omega/2pi in MHz; raw columns, rel_* columns minus the value at results.baseline_bias",
    "s11": "1 - i kappa_c <a>/eta with eta real positive",
    "liouvillian": "angular, rad/us",
}


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if np.isnan(x):
        return "nan"
    return FLOAT_FMT.format(x + 0.0)  # +0.0 folds -0.0 into 0.0


def csv_text(columns):
    """``columns`` is a list of ``(name, unit, values)`` of equal length."""
    names = [c[0] for c in columns]
    units = [c[1] for c in columns]
    data = [np.asarray(c[2]).ravel() for c in columns]
    n = {len(d) for d in data}
    if len(n) > 1:
        raise ValueError(f"columns have different lengths {sorted(n)}")
    lines = [",".join(names), ",".join(units)]
    for row in zip(*data):
        lines.append(",".join(_fmt(x) for x in row))
    return "\n".join(lines) + "\n"


def read_csv(path):
    """Return ``(names, units, array)`` from a file written by :func:`csv_text`."""
    with open(path, encoding="utf-8") as fh:
        names = fh.readline().strip().split(",")
        units = fh.readline().strip().split(",")
        arr = np.loadtxt(fh, delimiter=",", ndmin=2)
    return names, units, arr


def package_version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def sidecar(command, config, columns, extra=None):
    meta = {
        "command": command,
        "config": config.to_dict(),
        "config_hash": config.content_hash(),
        "variant": config["solver"]["variant"],
        "columns": {c[0]: c[1] for c in columns},
        "conventions": CONVENTIONS,
        "version": package_version(),
    }
    if extra:
        meta["results"] = _jsonable(extra)
    return json.dumps(meta, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return None if not np.isfinite(x) else float(_fmt(x))
    return obj


def write_outputs(files):
    """Atomically write ``{path: text}``; all or nothing."""
    staged = []
    try:
        for path, text in files.items():
            d = os.path.dirname(path)
            if d:
                os.makedirs(d, exist_ok=True)
            tmp = f"{path}.tmp-{os.getpid()}"
            staged.append((tmp, path))
            with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
    except BaseException:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.remove(tmp)
        raise
    for tmp, path in staged:
        os.replace(tmp, path)
    return [p for _, p in staged]


def result_files(base, command, config, columns, extra=None):
    """CSV text and its sidecar keyed by path."""
    return {
        base + ".csv": csv_text(columns),
        base + ".csv.meta.json": sidecar(command, config, columns, extra),
    }
