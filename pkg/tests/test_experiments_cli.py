"""Config handling, CSV determinism, CLI exit codes."""

import json

import pytest

import qdlab.experiments as ex
from qdlab.cli import main, worker_cap


def test_config_digest_is_order_invariant():
    a = {"experiment": "identities", "params": {"s_max": 2, "r_max": 3}}
    b = {"params": {"r_max": 3, "s_max": 2}, "experiment": "identities"}
    assert ex.config_digest(a) == ex.config_digest(b)
    c = {"experiment": "identities", "params": {"s_max": 3, "r_max": 3}}
    assert ex.config_digest(a) != ex.config_digest(c)


def test_float_formatting_round_trips():
    for v in (1.0 / 3.0, 1e-300, 123456.789, 0.1):
        assert float(ex._fmt(v)) == v


def test_write_csv_uses_lf_and_header(tmp_path):
    path = tmp_path / "out.csv"
    ex.write_csv(path, ["a", "b"], [(1, 0.5), (2, 0.25)])
    raw = path.read_bytes()
    assert b"\r" not in raw
    assert raw.split(b"\n")[0] == b"a,b"


def test_identities_runner_passes():
    rec = ex.run_experiment({"experiment": "identities",
                             "params": {"s_max": 2, "r_max": 3}})
    assert rec.passed
    assert rec.summary["cases"] == 3 + 9


def test_unknown_experiment_rejected():
    with pytest.raises(ex.ConfigError):
        ex.run_experiment({"experiment": "nope"})
    with pytest.raises(ex.ConfigError):
        ex.run_experiment({"experiment": "discrepancy_decay",
                           "map": {"kind": "mystery", "alpha": "golden"},
                           "params": {"n_grid": [100]}})


def test_malformed_frequency_names_the_field():
    with pytest.raises(ex.ConfigError) as err:
        ex.run_experiment({"experiment": "discrepancy_decay",
                           "map": {"kind": "shift", "alpha": "gol den"},
                           "params": {"n_grid": [100]}})
    assert err.value.path == "map.alpha"


def test_seed_is_mandatory_for_randomized_runs():
    with pytest.raises(ex.ConfigError) as err:
        ex.run_experiment({"experiment": "brs_remainder",
                           "params": {"variant": "interval",
                                      "alpha": "golden",
                                      "q": 1, "p": 0, "nmax": 1000}})
    assert err.value.path == "seed"


def test_explicit_x0_needs_no_seed():
    rec = ex.run_experiment({"experiment": "brs_remainder",
                             "params": {"variant": "interval",
                                        "alpha": "golden", "q": 1, "p": 0,
                                        "nmax": 1000, "x0": [0.25]}})
    assert rec.passed


def test_slope_threshold_needs_enough_scales():
    with pytest.raises(ex.ConfigError):
        ex.run_experiment({"experiment": "discrepancy_decay",
                           "map": {"kind": "shift", "alpha": "golden"},
                           "params": {"n_grid": [100, 200, 400],
                                      "max_slope": -0.5}})


def test_discrepancy_decay_with_fit(tmp_path):
    out = tmp_path / "decay.csv"
    rec = ex.run_experiment({
        "experiment": "discrepancy_decay",
        "map": {"kind": "shift", "alpha": "golden"},
        "params": {"n_grid": [100, 316, 1000, 3162, 10000],
                   "max_slope": -0.8},
        "output": str(out)})
    assert rec.passed
    assert rec.summary["slope"] <= -0.8
    lines = out.read_text().splitlines()
    assert lines[0] == "n,d_n,method,error_bound"
    assert len(lines) == 6


def test_byte_identical_reruns(tmp_path):
    cfg = {"experiment": "lyapunov_scan",
           "map": {"kind": "shift", "alpha": "golden"},
           "potential": {"kind": "cosine", "coupling": 3.0},
           "params": {"energies": [-1.0, 1.0, 3], "n": 300, "phases": 4},
           "seed": 77,
           "output": str(tmp_path / "a.csv")}
    ex.run_experiment(cfg)
    first = (tmp_path / "a.csv").read_bytes()
    cfg["output"] = str(tmp_path / "b.csv")
    ex.run_experiment(cfg)
    assert (tmp_path / "b.csv").read_bytes() == first


def test_skew_map_parsing_and_covering_runner():
    rec = ex.run_experiment({"experiment": "covering",
                             "map": {"kind": "skew", "alpha": "golden",
                                     "d": 2},
                             "params": {"radii": [0.8, 0.3], "mmax": 5000}})
    assert rec.passed
    assert rec.rows[0][1] == 1


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------

def write_config(tmp_path, payload, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def test_cli_run_success(tmp_path, capsys):
    path = write_config(tmp_path, {
        "experiment": "identities", "params": {"s_max": 2, "r_max": 2}})
    assert main(["run", path]) == 0
    summary = json.loads(capsys.readouterr().out.strip())
    assert summary["passed"] is True
    assert summary["rows"] == 6


def test_cli_run_reports_threshold_failure(tmp_path, capsys):
    path = write_config(tmp_path, {
        "experiment": "discrepancy_decay",
        "map": {"kind": "shift", "alpha": "golden"},
        "params": {"n_grid": [100, 316, 1000, 3162, 10000],
                   "max_slope": -5.0}})
    assert main(["run", path]) == 1
    summary = json.loads(capsys.readouterr().out.strip())
    assert summary["passed"] is False


def test_cli_config_errors_exit_two(tmp_path, capsys):
    bad = write_config(tmp_path, {"experiment": "identities",
                                  "params": {"s_max": "two"}})
    assert main(["run", bad]) == 2
    assert "config error" in capsys.readouterr().err
    missing = str(tmp_path / "absent.json")
    assert main(["run", missing]) == 2
    capsys.readouterr()
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert main(["run", str(broken)]) == 2


def test_cli_list_experiments(capsys):
    assert main(["list-experiments"]) == 0
    out = capsys.readouterr().out
    for kind in ex.EXPERIMENT_KINDS:
        assert kind in out


def test_worker_cap_env(monkeypatch):
    monkeypatch.delenv("QDLAB_WORKERS", raising=False)
    assert worker_cap() == 1
    monkeypatch.setenv("QDLAB_WORKERS", "6")
    assert worker_cap() == 6
    monkeypatch.setenv("QDLAB_WORKERS", "zero")
    assert worker_cap() == 1
    monkeypatch.setenv("QDLAB_WORKERS", "-3")
    assert worker_cap() == 1
