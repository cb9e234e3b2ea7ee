import json
import os

import numpy as np
import pytest
import yaml

from zenojunction.cli import COMMANDS, main
from zenojunction.config import ConfigError, RunConfig
from zenojunction.io import read_csv

FAST = [
    "solver.cutoff=4",
    "solver.l_max=8",
    "sweep.n_max=3",
    "sweep.voltage.start=330",
    "sweep.voltage.stop=360",
    "sweep.voltage.num=4",
    "sweep.frequency.start=5.97",
    "sweep.frequency.stop=6.005",
    "sweep.frequency.num=31",
    "sweep.eta.num=6",
    "sweep.eta.stop=5",
]


def run(tmp_path, command, *extra, sets=FAST, config=None):
    argv = [command, "--set", f"output.dir={tmp_path}"]
    for s in list(sets) + list(extra):
        argv += ["--set", s]
    if config is not None:
        argv += ["--config", str(config)]
    return main(argv)


def listing(path):
    return sorted(os.listdir(path)) if os.path.isdir(path) else []


@pytest.mark.parametrize("command", sorted(COMMANDS))
def test_subcommand_writes_csv_and_sidecar(tmp_path, capsys, command):
    assert run(tmp_path, command) == 0
    printed = capsys.readouterr().out.split()
    csvs = [p for p in printed if p.endswith(".csv")]
    assert csvs and all(os.path.exists(p) for p in printed)
    for path in csvs:
        names, units, arr = read_csv(path)
        assert len(names) == len(units) == arr.shape[1]
        meta = json.loads(open(path + ".meta.json").read())
        assert meta["command"] == command
        assert set(meta["columns"]) == set(names)
        cfg = RunConfig(meta["config"])
        assert cfg.content_hash() == meta["config_hash"]
        assert cfg == RunConfig.load(None, FAST + [f"output.dir={tmp_path}"])
    assert not [f for f in listing(tmp_path) if ".tmp-" in f]


def test_reruns_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(d, "spectrum", "output.prefix=map") == 0
    for name in listing(a):
        meta_a, meta_b = (open(d / name, "rb").read() for d in (a, b))
        if name.endswith(".json"):
            # only the output dir differs between the two runs
            ja, jb = json.loads(meta_a), json.loads(meta_b)
            for j in (ja, jb):
                j["config"]["output"]["dir"] = None
                j.pop("config_hash")
            assert ja == jb
        else:
            assert meta_a == meta_b


def test_threads_flag_does_not_change_numbers(tmp_path):
    one, four = tmp_path / "one", tmp_path / "four"
    assert run(one, "spectrum") == 0
    assert main(["spectrum", "--threads", "4", "--set", f"output.dir={four}"] + sum((["--set", s] for s in FAST), [])) == 0
    assert open(one / "spectrum.csv", "rb").read() == open(four / "spectrum.csv", "rb").read()
    meta = json.loads(open(four / "spectrum.csv.meta.json").read())
    assert meta["config"]["solver"]["threads"] == 4


def test_config_file_and_override_precedence(tmp_path):
    cfg = tmp_path / "run.yaml"
    cfg.write_text(yaml.safe_dump({"junction": {"delta": 210.0}, "sweep": {"voltage": {"num": 3}}}))
    out = tmp_path / "out"
    assert run(out, "iv", "junction.delta=205", config=cfg) == 0
    meta = json.loads(open(out / "iv.csv.meta.json").read())
    assert meta["config"]["junction"]["delta"] == 205.0
    assert meta["config"]["sweep"]["voltage"]["num"] == 4  # FAST wins over the file too
    assert meta["results"]["gap_voltage"] == 410.0


def test_rates_metadata_carries_thresholds(tmp_path):
    assert run(tmp_path, "rates") == 0
    meta = json.loads(open(tmp_path / "rates.csv.meta.json").read())
    assert meta["results"]["thresholds"][:3] == pytest.approx([400.0, 375.19, 350.37], abs=0.01)
    names, _, arr = read_csv(tmp_path / "rates.csv")
    assert np.all(arr[:, names.index("gamma_0")] == 0.0)


def test_spectrum_is_passive(tmp_path):
    assert run(tmp_path, "spectrum", "sweep.eta_probe=8") == 0
    names, _, arr = read_csv(tmp_path / "spectrum.csv")
    assert np.max(arr[:, names.index("abs2")]) <= (1 + 1e-6) ** 2


@pytest.mark.parametrize(
    "setting, key",
    [
        ("junction.colour=3", "junction.colour"),
        ("mode.kappa_c=fast", "mode.kappa_c"),
        ("solver.variant=other", "solver.variant"),
        ("solver.cutoff=2.5", "solver.cutoff"),
        ("sweep.voltage.num=0", "sweep.voltage.num"),
        ("sweep.n_max=9", "sweep.n_max"),
        ("junction.r_tunnel=-1", "junction"),
    ],
)
def test_bad_settings_exit_2(tmp_path, capsys, setting, key):
    out = tmp_path / "out"
    assert run(out, "rates", setting) == 2
    err = capsys.readouterr().err
    assert f"[{key}]" in err
    assert listing(out) == []


def test_malformed_yaml_exit_2(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("junction: {delta: [200\n")
    out = tmp_path / "out"
    assert run(out, "iv", config=cfg) == 2
    assert "malformed YAML" in capsys.readouterr().err
    assert listing(out) == []


def test_unknown_key_in_file_exit_2(tmp_path, capsys):
    cfg = tmp_path / "run.yaml"
    cfg.write_text("mode:\n  omega: 6.0\n  q_factor: 1000\n")
    assert run(tmp_path / "out", "iv", config=cfg) == 2
    assert "[mode.q_factor]" in capsys.readouterr().err


def test_physics_failure_exit_1_without_files(tmp_path, capsys):
    # no loss anywhere below threshold: the generator has no unique steady state
    out = tmp_path / "out"
    code = run(out, "zeno", "mode.kappa_c=0", "mode.kappa_int=0", "sweep.bias=250")
    assert code == 1
    assert "SingularLiouvillian" in capsys.readouterr().err
    assert listing(out) == []


def test_unwritable_output_exit_1(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run(blocker / "sub", "iv") == 1
    assert "[output.dir]" in capsys.readouterr().err


def test_override_parsing_errors():
    with pytest.raises(ConfigError):
        RunConfig.load(None, ["solver.cutoff"])
    with pytest.raises(ConfigError) as info:
        RunConfig.load(None, ["sweep.voltage=3"])
    assert info.value.key == "sweep.voltage"


def test_lambda_overrides_impedance():
    cfg = RunConfig.load(None, ["mode.lam=0.3"])
    assert cfg.mode().lam == 0.3
    assert RunConfig.load(None).mode().lam == pytest.approx(0.740, abs=1e-3)


def test_lamb_relative_columns(tmp_path):
    assert run(tmp_path, "lamb", "sweep.voltage.start=0", "sweep.voltage.num=3") == 0
    names, _, arr = read_csv(tmp_path / "lamb.csv")
    meta = json.loads(open(tmp_path / "lamb.csv.meta.json").read())
    assert meta["results"]["baseline_bias"] == 0.0
    first = dict(zip(names, arr[0]))
    assert first["V"] == 0.0
    assert all(abs(first[f"rel_domega_{n}"]) < 1e-9 for n in range(4))
    assert abs(first["rel_nonlinearity"]) < 1e-9
    raw = arr[:, names.index("domega_2")] - arr[:, names.index("domega_1")]
    rel = arr[:, names.index("rel_shift_12")]
    assert np.allclose(raw - rel, raw[0], rtol=0, atol=1e-9)
