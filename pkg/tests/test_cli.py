import json
import os
import subprocess
import sys

import pytest

from uqkit import cli
from uqkit.experiments import COMMANDS

SMALL_BAYES = ["--L-max", "100", "--n-replicates", "5"]


def read_bytes(folder):
    return {n: open(os.path.join(folder, n), "rb").read() for n in sorted(os.listdir(folder)) if n.endswith(".csv")}


def test_no_command_is_config_error(capsys):
    assert cli.main([]) == 2


def test_every_command_has_a_subparser():
    parser = cli.build_parser()
    for name in COMMANDS:
        args = parser.parse_args([name])
        assert args.command == name


def test_bayes_scan_outputs(tmp_path):
    out = tmp_path / "b"
    assert cli.main(["bayes-scan", "--out", str(out), "--seed", "7", *SMALL_BAYES]) == 0
    with open(out / "bayes_scan.csv", newline="") as fh:
        header = fh.readline().strip()
    assert header.split(",")[:6] == ["L", "replicate", "mu_a", "R_a", "signal", "dispersion"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["schema"] == 1
    assert manifest["seed"] == 7
    assert manifest["inputs"]["L_max"] == 100
    assert set(manifest["outputs"]) >= {"bayes_scan.csv", "bayes_scan.json", "bayes_summary.csv"}
    for key in ("versions", "wall_time_s", "summary", "command"):
        assert key in manifest


def test_rerun_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert cli.main(["bayes-scan", "--out", str(out), *SMALL_BAYES]) == 0
    assert read_bytes(a) == read_bytes(b)
    c = tmp_path / "c"
    assert cli.main(["bayes-scan", "--out", str(c), "--seed", "8", *SMALL_BAYES]) == 0
    assert read_bytes(c)["bayes_scan.csv"] != read_bytes(a)["bayes_scan.csv"]


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "bayes-scan", "seed": 3, "out": str(tmp_path / "from_cfg"),
                               "params": {"L_max": 50, "n_replicates": 2}}))
    assert cli.main(["bayes-scan", "--config", str(cfg)]) == 0
    m = json.loads((tmp_path / "from_cfg" / "manifest.json").read_text())
    assert (m["seed"], m["inputs"]["L_max"], m["inputs"]["n_replicates"]) == (3, 50, 2)
    assert cli.main(["bayes-scan", "--config", str(cfg), "--L-max", "20", "--seed", "4",
                     "--out", str(tmp_path / "flags")]) == 0
    m = json.loads((tmp_path / "flags" / "manifest.json").read_text())
    assert (m["seed"], m["inputs"]["L_max"]) == (4, 20)


@pytest.mark.parametrize("payload", [
    {"params": {"no_such_key": 1}},
    {"command": "lada-scan"},
    {"seed": -1},
    {"params": {"n_replicates": "many"}},
])
def test_bad_config_exit_code(tmp_path, payload, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(payload))
    assert cli.main(["bayes-scan", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_unreadable_config(tmp_path):
    assert cli.main(["bayes-scan", "--config", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    assert cli.main(["bayes-scan", "--config", str(bad)]) == 2


def test_bad_flag_value(tmp_path):
    assert cli.main(["bayes-scan", "--L-grid", "cubic", "--out", str(tmp_path)]) == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["bayes-scan", "--no-such-flag", "1"])
    assert exc.value.code == 2


def test_instability_exit_code(tmp_path, capsys):
    args = ["lada-scan", "--out", str(tmp_path), "--dt", "0.05", "--sigma-x", "0.01", "--horizon", "2",
            "--L-values", "5", "--init-scale", "1"]
    assert cli.main(args) == 3
    assert "numerical instability" in capsys.readouterr().err


def test_module_entry_point_and_threads(tmp_path):
    env = dict(os.environ, UQKIT_THREADS="1")
    out = tmp_path / "p"
    proc = subprocess.run([sys.executable, "-m", "uqkit", "param-estimate", "--out", str(out), "--n-samples", "1000"],
                          env=env, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    m = json.loads((out / "manifest.json").read_text())
    assert m["threads"] == "1"
    assert [round(r["a_estimate"], 3) for r in m["summary"]["table"]] == [1.0, 0.667, 0.4]
