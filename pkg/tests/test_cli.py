import json
import os
import re
import subprocess
import sys
import time
from pathlib import Path

import pytest

from irs_secopt import cli
from irs_secopt.bench import emit_csv, monte_carlo_sweep
from irs_secopt.channel import ScenarioConfig
from irs_secopt.errors import NumericalFailure

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

SMALL_TOML = """
[scenario]
n_t = 2
n_r = 2
n_e = 2
m = 4
master_seed = 11
[bench]
realizations = 2
"""


def run_main(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def rate_of(out):
    return float(re.search(r"^secrecy_rate_bps_hz: (\S+)$", out, re.M).group(1))


@pytest.fixture
def small_cfg(tmp_path):
    path = tmp_path / "small.toml"
    path.write_text(SMALL_TOML)
    return str(path)


def test_missing_config_exit_2(tmp_path, capsys):
    missing = str(tmp_path / "absent.toml")
    code, _, err = run_main(["run", "--config", missing], capsys)
    assert code == 2 and missing in err


def test_unknown_key_exit_2(tmp_path, capsys):
    path = tmp_path / "typo.toml"
    path.write_text("[scenario]\nn_tx = 3\n")
    code, _, err = run_main(["run", "--config", str(path)], capsys)
    assert code == 2 and "n_tx" in err


def test_run_seed_deterministic(tmp_path, capsys):
    argv = ["run", "--config", str(CONFIGS / "reference.toml"), "--seed", "42", "--manifest", str(tmp_path / "m.json")]
    code_a, out_a, _ = run_main(argv, capsys)
    code_b, out_b, _ = run_main(argv, capsys)
    assert code_a == code_b == 0
    assert rate_of(out_a) == rate_of(out_b)
    manifest = json.loads((tmp_path / "m.json").read_text())
    assert manifest["master_seed"] == 42 and manifest["finished"] is not None
    assert manifest["result"]["secrecy_rate_bps_hz"] == rate_of(out_a)
    assert manifest["config"]["scenario"]["master_seed"] == 42


def test_run_discrete_not_above_continuous(tmp_path, capsys):
    base = ["run", "--config", str(CONFIGS / "reference.toml"), "--seed", "42", "--manifest", str(tmp_path / "m.json")]
    _, cont, _ = run_main(base + ["--q-levels", "0"], capsys)
    _, disc, _ = run_main(base + ["--q-levels", "8"], capsys)
    assert rate_of(disc) <= rate_of(cont) + 1e-9
    assert "q_levels: 8" in disc


def test_seed_recorded_before_failure(tmp_path, capsys, monkeypatch):
    def boom(*args, **kwargs):
        raise NumericalFailure("forced")

    monkeypatch.setattr(cli, "ao_optimize", boom)
    path = tmp_path / "m.json"
    code, _, err = run_main(["run", "--seed", "77", "--manifest", str(path)], capsys)
    assert code == 3 and "forced" in err
    manifest = json.loads(path.read_text())
    assert manifest["master_seed"] == 77 and manifest["finished"] is None


def test_sweep_outputs(tmp_path, capsys, small_cfg):
    csv_path, svg_path = tmp_path / "out" / "s.csv", tmp_path / "out" / "s.svg"
    os.makedirs(csv_path.parent)
    code, _, _ = run_main(["sweep", "--config", small_cfg, "--axis", "p_max", "--values", "0.2,0.5,1.0,2.0",
                           "--out-csv", str(csv_path), "--out-svg", str(svg_path), "--workers", "1"], capsys)
    assert code == 0
    rows = csv_path.read_text().strip().split("\n")
    assert len(rows) == 1 + 4 * 5
    assert svg_path.read_text().startswith("<?xml")
    manifest = json.loads((tmp_path / "out" / "s.manifest.json").read_text())
    assert manifest["master_seed"] == 11 and manifest["realizations"] == 2
    assert str(csv_path) in manifest["outputs"]


def test_sweep_matches_library(tmp_path, capsys, small_cfg):
    out = tmp_path / "cli.csv"
    code, _, _ = run_main(["sweep", "--config", small_cfg, "--axis", "m_elements", "--values", "2,4",
                           "--scheme", "no_irs", "--scheme", "ao_q2", "--out-csv", str(out)], capsys)
    assert code == 0
    from irs_secopt.bench import Scheme

    cfg = ScenarioConfig(n_t=2, n_r=2, n_e=2, m=4, master_seed=11)
    res = monte_carlo_sweep(cfg, "m_elements", [2, 4], 2, schemes=[Scheme("no_irs"), Scheme("ao_discrete", 2)])
    emit_csv(res, tmp_path / "lib.csv")
    assert out.read_bytes() == (tmp_path / "lib.csv").read_bytes()


def test_sweep_swap_and_env_workers(tmp_path, capsys, small_cfg, monkeypatch):
    monkeypatch.setenv(cli.WORKERS_ENV, "2")
    out = tmp_path / "sw.csv"
    code, _, _ = run_main(["sweep", "--config", small_cfg, "--axis", "n_r", "--values", "1,2",
                           "--scheme", "no_irs", "--swap-user-eve", "--out-csv", str(out)], capsys)
    assert code == 0
    manifest = json.loads((tmp_path / "sw.manifest.json").read_text())
    assert manifest["workers"] == 2
    assert manifest["config"]["scenario"]["user_pos"] == [55.0, 0.0]
    monkeypatch.setenv(cli.WORKERS_ENV, "many")
    code, _, _ = run_main(["sweep", "--config", small_cfg, "--axis", "n_r", "--values", "1", "--out-csv", str(out)], capsys)
    assert code == 2


def test_sweep_bad_values(tmp_path, capsys, small_cfg):
    for values in ("1.0,0.5", "a,b"):
        code, _, _ = run_main(["sweep", "--config", small_cfg, "--axis", "p_max", "--values", values,
                               "--out-csv", str(tmp_path / "x.csv")], capsys)
        assert code == 2


def test_selftest_quick(capsys):
    start = time.perf_counter()
    code_a, out_a, _ = run_main(["selftest", "--scale", "quick", "--seed", "3"], capsys)
    assert time.perf_counter() - start < 60
    code_b, out_b, _ = run_main(["selftest", "--scale", "quick", "--seed", "3"], capsys)
    assert code_a == code_b == 0
    strip = lambda s: re.sub(r"\(.*? s\)", "", s)
    assert strip(out_a) == strip(out_b)
    assert "all suites passed" in out_a


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "irs_secopt", "run", "--config", str(tmp_path / "none.toml")],
                          capture_output=True, text=True)
    assert proc.returncode == 2 and "none.toml" in proc.stderr


@pytest.mark.slow
def test_selftest_full_passes(capsys):
    code, out, _ = run_main(["selftest", "--scale", "full", "--seed", "0"], capsys)
    assert code == 0
    assert "all suites passed" in out


def test_selftest_failure_exit_code(monkeypatch, capsys):
    monkeypatch.setattr(cli, "run_selftest", lambda scale, seed, stream=None: {"kkt_residuals": [True, False]})
    code, out, _ = run_main(["selftest"], capsys)
    assert code == 1
    assert "FAILED kkt_residuals" in out
