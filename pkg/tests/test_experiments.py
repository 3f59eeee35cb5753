import json
import subprocess
import sys

import pytest

from stmm_sim import cli, experiments
from stmm_sim.errors import ConfigError
from stmm_sim.experiments import (HEADERS, SweepConfig, load_config, read_csv, run,
                                  run_drift, run_oracle_check, run_reflection_loss,
                                  stream_seed, to_csv)

SMALL = {"m_ux": 10, "m_uy": 10}


def small(scenario, **kw):
    data = {"scenario": scenario, "mc_trials": 4, "base": {"stmm": dict(SMALL)}}
    data.update(kw)
    return SweepConfig.from_dict(data)


def test_defaults():
    cfg = SweepConfig.from_dict({}, "reflection_loss")
    assert cfg.sweep_values[0] == 0.1e9 and cfg.sweep_values[-1] == 4.5e9
    assert len(cfg.sweep_values) == 9
    assert cfg.theta_list_deg == [float(x) for x in range(10, 91, 5)]
    assert cfg.cluster_k_list == [1, 2, 5, 10, 100]
    assert cfg.mc_trials == 200
    assert cfg.base.stmm.m_ux == 100 and cfg.base.geometry.carrier_freq == 30e9


def test_oracle_defaults_use_small_stmm():
    cfg = SweepConfig.from_dict({}, "oracle_check")
    assert cfg.base.stmm.m_ux == 8 and cfg.base.link.uplink_bandwidth == 2e9


@pytest.mark.parametrize("data,path", [
    ({"scenario": "drift", "bogus": 1}, "bogus"),
    ({"scenario": "drift", "base": {"link": {"antennas": 3}}}, "base.link.antennas"),
    ({"scenario": "drift", "seed": "x"}, "seed"),
    ({"scenario": "drift", "sweep_values": []}, "sweep_values"),
    ({"scenario": "drift", "sweep_values": [0.2, 0.1]}, "sweep_values"),
    ({"scenario": "drift", "mc_trials": 0}, "mc_trials"),
    ({"scenario": "teleport"}, "scenario"),
    ({"scenario": "se_vs_angle", "cluster_k_list": [3]}, "cluster_k_list[0]"),
    ({"scenario": "oracle_check", "base": {"stmm": {"m_ux": 32, "m_uy": 32}}}, "base.stmm"),
    ({"scenario": "reflection_loss", "sweep_values": [1e9, 6e9]}, "sweep_values"),
    ({"scenario": "drift", "base": {"stmm": {"m_ux": 0}}}, "base"),
])
def test_config_errors_name_the_field(data, path):
    with pytest.raises(ConfigError) as exc:
        SweepConfig.from_dict(data)
    assert exc.value.path == path


def test_scenario_mismatch():
    with pytest.raises(ConfigError):
        SweepConfig.from_dict({"scenario": "drift"}, "oracle_check")


def test_config_roundtrip(tmp_path):
    cfg = small("se_vs_bandwidth", sweep_values=[1e9, 2e9], cluster_k_list=[1, 5])
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert load_config(str(path)) == cfg


def test_stream_seed_is_stable():
    assert stream_seed(0, 3) == stream_seed(0, 3)
    assert stream_seed(0, 3) != stream_seed(0, 4) != stream_seed(1, 3)


def test_reflection_loss_rows():
    cfg = small("reflection_loss", sweep_values=[1e9, 4e9], theta_list_deg=[30.0, 90.0])
    rows = run_reflection_loss(cfg)
    assert [(r[0], r[1]) for r in rows] == [(1e9, 30.0), (1e9, 90.0), (4e9, 30.0), (4e9, 90.0)]
    assert rows[1][2] == pytest.approx(0.0, abs=1e-12)
    assert rows[2][2] < rows[0][2] < 0


def test_se_rows_have_all_variants():
    cfg = small("se_vs_bandwidth", sweep_values=[4e9], cluster_k_list=[1, 10])
    rows = run(cfg)
    assert [r[3] for r in rows] == ["ideal", "uncompensated", "compensated", "compensated"]
    eta = {(r[3], r[1]): r[2] for r in rows}
    assert eta[("uncompensated", "")] <= eta[("compensated", 1)] <= eta[("ideal", "")] + 1e-12
    assert eta[("compensated", 10)] == pytest.approx(eta[("ideal", "")])


def test_drift_rows():
    cfg = SweepConfig.from_dict({"scenario": "drift", "sweep_values": [0.0, 0.1, 0.2],
                                 "theta_list_deg": [30.0]})
    rows = run_drift(cfg)
    assert rows[0][2] == pytest.approx(30.0) and rows[0][3] == pytest.approx(30.0)
    assert rows[1][2] == pytest.approx(17.706, abs=1e-3)
    assert abs(rows[1][3] - rows[1][2]) <= 0.05
    assert rows[2][2] == "evanescent" and rows[2][3] == ""


def test_oracle_check_report():
    report = run_oracle_check(SweepConfig.from_dict({"sweep_values": [45.0]}, "oracle_check"))
    assert report["passed"] and report["max_rel_l2_error"] < 1e-9


def test_csv_header_and_quoting():
    text = to_csv("drift", [(30.0, 0.2, "evanescent", "", 0.2)])
    lines = text.splitlines()
    assert lines[0] == ",".join(HEADERS["drift"])
    assert lines[1] == "30.0,0.2,evanescent,,0.2"
    assert read_csv(text)[0]["theta_bar_deg"] == "evanescent"


def test_workers_give_identical_csv():
    cfg = small("reflection_loss", sweep_values=[1e9, 3e9], theta_list_deg=[20.0, 45.0])
    assert to_csv(cfg.scenario, run(cfg, 1)) == to_csv(cfg.scenario, run(cfg, 3))


def test_cli_writes_csv_and_sidecar(tmp_path, capsys):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"scenario": "drift", "sweep_values": [0.0, 0.1],
                                "theta_list_deg": [60.0]}))
    out = tmp_path / "o.csv"
    rc = cli.main(["drift", "--config", str(conf), "--out", str(out), "--seed", "9", "--sidecar"])
    assert rc == 0
    assert out.read_text().startswith("theta_deg,kappa,theta_bar_deg")
    side = json.loads((tmp_path / "o.csv.json").read_text())
    assert side["config"]["seed"] == 9


def test_cli_stdout_and_defaults(capsys):
    assert cli.main(["--print-defaults"]) == 0
    dumped = json.loads(capsys.readouterr().out)
    assert dumped["base"]["link"]["tx_power_dbm"] == 20.0
    assert dumped["base"]["link"]["noise_psd_dbm_hz"] == -173.0
    assert cli.main(["oracle_check"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "theta_deg,rel_l2_error,status"


def test_cli_config_error_exit_code(tmp_path, capsys):
    conf = tmp_path / "bad.json"
    conf.write_text('{"scenario": "drift", "extra": true}')
    assert cli.main(["drift", "--config", str(conf)]) == 2
    assert "extra" in capsys.readouterr().err
    assert cli.main(["drift", "--config", str(tmp_path / "missing.json")]) == 2
    assert cli.main(["drift", "--workers", "0"]) == 2


def test_cli_oracle_failure_exit_code(monkeypatch, capsys):
    monkeypatch.setattr(experiments, "oracle_error", lambda cfg, theta, stream: 1.0)
    assert cli.main(["oracle_check"]) == 3
    assert "fail" in capsys.readouterr().out


def test_console_script_usage_error():
    proc = subprocess.run([sys.executable, "-m", "stmm_sim.cli", "nonsense"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
