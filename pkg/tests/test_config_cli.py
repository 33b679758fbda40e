import json
import math
from pathlib import Path

import pytest

from circlelab.cli import main
from circlelab.config import ConfigError, load_config, validate_config
from circlelab.reports import canonical_report_bytes, load_report

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def _write(tmp_path, name, cfg):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def _rot_pair_system():
    a = math.sqrt(2.0) - 1.0
    c, s = math.cos(math.pi * a), math.sin(math.pi * a)
    return {
        "generators": [{"moebius": [c, s, -s, c]}, {"moebius": [c, -s, s, c]}],
        "weights": [0.5, 0.5],
    }


def test_validate_defaults_resolved():
    eff = validate_config("lyapunov", {"system": _rot_pair_system(), "seed": 1})
    assert eff["horizon"] == 10_000
    assert eff["n_paths"] == 100
    assert eff["bins"] == 512
    assert eff["experiment"] == "lyapunov"


def test_validate_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="unknown keys.*frobnicate"):
        validate_config("stationary", {"system": _rot_pair_system(), "frobnicate": 1})


def test_validate_rejects_bad_ranges():
    with pytest.raises(ConfigError, match="n_paths"):
        validate_config("lyapunov", {"system": _rot_pair_system(), "n_paths": 1})
    with pytest.raises(ConfigError, match="horizon"):
        validate_config("lyapunov", {"system": _rot_pair_system(), "horizon": 10})
    with pytest.raises(ConfigError, match="capture_radius"):
        validate_config(
            "basin",
            {"system": _rot_pair_system(), "attractors": [0.0], "capture_radius": -0.1},
        )


def test_validate_weights_sum_error_names_weights():
    bad = {"generators": [{"moebius": [1, 0, 0, 1]}], "weights": [0.9]}
    with pytest.raises(ConfigError, match="weights"):
        validate_config("stationary", {"system": bad})


def test_validate_experiment_mismatch():
    with pytest.raises(ConfigError, match="experiment"):
        validate_config("stationary", {"experiment": "lyapunov", "system": _rot_pair_system()})


def test_load_config_reports_json_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "system": [,]\n}\n')
    with pytest.raises(ConfigError, match="line 2"):
        load_config(path)


def test_cli_exit_2_on_bad_weights(tmp_path, capsys):
    cfg = _write(
        tmp_path,
        "bad.json",
        {"system": {"generators": [{"moebius": [1, 0, 0, 1]}], "weights": [0.9]}, "seed": 1},
    )
    code = main(["stationary", "--config", cfg])
    assert code == 2
    assert "weights" in capsys.readouterr().err


def test_cli_exit_2_without_seed(tmp_path, capsys):
    cfg = _write(tmp_path, "noseed.json", {"system": _rot_pair_system()})
    code = main(["stationary", "--config", cfg, "--out", str(tmp_path / "o")])
    assert code == 2
    assert "seed" in capsys.readouterr().err


def test_cli_exit_3_on_half_lambda_without_contraction(tmp_path, capsys):
    cfg = _write(
        tmp_path,
        "c.json",
        {
            "system": _rot_pair_system(),
            "x0": 0.3,
            "half_width": 0.01,
            "horizon": 100,
            "n_trajectories": 2,
            "lyap_horizon": 200,
            "lyap_n_paths": 4,
            "seed": 5,
        },
    )
    code = main(["contract", "--config", cfg, "--out", str(tmp_path / "o"), "--no-plots"])
    assert code == 3
    assert "negative exponent" in capsys.readouterr().err


def test_cli_stationary_run_and_artifacts(tmp_path):
    cfg = _write(
        tmp_path, "s.json", {"system": _rot_pair_system(), "bins": 64, "seed": 3}
    )
    out = tmp_path / "out"
    assert main(["stationary", "--config", cfg, "--out", str(out)]) == 0
    report = load_report(out / "report.json")
    assert report["experiment"] == "stationary"
    assert report["config"]["bins"] == 64
    assert report["config"]["seed"] == 3
    assert report["results"]["converged"] is True
    assert (out / "stationary_measure.csv").exists()
    assert (out / "stationary.png").exists()
    assert "timestamp" in report


def test_cli_seed_flag_overrides_config(tmp_path):
    cfg = _write(tmp_path, "s.json", {"system": _rot_pair_system(), "bins": 32, "seed": 3})
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["stationary", "--config", cfg, "--out", str(out1), "--seed", "9", "--no-plots"]) == 0
    rep = load_report(out1 / "report.json")
    assert rep["config"]["seed"] == 9


def test_cli_bundled_config_loads():
    # the shipped example configs must stay valid
    for path in CONFIGS.glob("*.json"):
        raw = load_config(path)
        validate_config(raw["experiment"], raw)


def test_canonical_bytes_strip_timestamp():
    a = {"experiment": "x", "timestamp": "t1", "results": {"v": 1}}
    b = {"experiment": "x", "timestamp": "t2", "results": {"v": 1}}
    assert canonical_report_bytes(a) == canonical_report_bytes(b)


def test_cli_lyapunov_small_run(tmp_path):
    cfg = _write(
        tmp_path,
        "l.json",
        {
            "system": _rot_pair_system(),
            "horizon": 200,
            "n_paths": 4,
            "bins": 32,
            "seed": 7,
        },
    )
    out = tmp_path / "out"
    assert main(["lyapunov", "--config", cfg, "--out", str(out), "--no-plots"]) == 0
    rep = load_report(out / "report.json")
    assert rep["results"]["value"] == 0.0
    assert (out / "per_path.csv").exists()
