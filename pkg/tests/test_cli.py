"""Exit codes, file outputs, and byte-level determinism of the command line."""

import json
import os

import numpy as np
import pytest

from piezobeam.cli import (
    EXIT_DIVERGED,
    EXIT_INFEASIBLE,
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VERIFICATION,
    main,
)
from piezobeam.scenario import load_config


def _write_cfg(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def _quick_cfg(**numerics):
    cfg = load_config("certified-decay")
    cfg["numerics"].update({"n": 101, "horizon_s": 20.0, "output_stride": 5,
                            "field_stride": 2000})
    cfg["numerics"].update(numerics)
    return cfg


@pytest.fixture(scope="module")
def sim_dir(tmp_path_factory):
    """One moderately long certified run shared by simulate/report tests."""
    tmp = tmp_path_factory.mktemp("sim")
    cfg_path = _write_cfg(tmp, _quick_cfg())
    out = str(tmp / "out")
    assert main(["simulate", "--config", cfg_path, "--out", out]) == EXIT_OK
    return out


class TestCheck:
    def test_certified_preset_passes(self, capsys):
        assert main(["check", "--config", "certified-decay"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "valid: True" in out
        assert "C1=" in out

    def test_infeasible_ratio_exits_2(self, tmp_path, capsys):
        cfg = load_config("certified-decay")
        cfg["weights"]["beta0"] = 0.95
        cfg["weights"]["delta2"]["ratio"] = 0.95
        code = main(["check", "--config", _write_cfg(tmp_path, cfg)])
        assert code == EXIT_INFEASIBLE
        assert "delay_weight_ratio" in capsys.readouterr().out

    def test_missing_file_exits_1(self, tmp_path):
        code = main(["check", "--config", str(tmp_path / "missing.json")])
        assert code == EXIT_USAGE


class TestSimulate:
    def test_outputs_exist(self, sim_dir):
        assert os.path.exists(os.path.join(sim_dir, "trajectory.csv"))
        assert os.path.exists(os.path.join(sim_dir, "fields_0.csv"))
        assert os.path.exists(os.path.join(sim_dir, "summary.json"))

    def test_summary_contents(self, sim_dir):
        with open(os.path.join(sim_dir, "summary.json")) as fh:
            summary = json.load(fh)
        assert summary["status"] == "ok"
        assert summary["certificate"]["valid"]
        assert summary["decay_fit"]["H2"] > 0
        assert summary["dissipation"]["n_violations"] == 0
        assert summary["equivalence"]["b1"] > 0

    def test_trajectory_header(self, sim_dir):
        with open(os.path.join(sim_dir, "trajectory.csv")) as fh:
            header = fh.readline().strip()
        assert header == ("t,E,kinetic_v,kinetic_p,elastic,coupling,"
                          "delay_term,K1,K2,K3,L,int_vt2,int_vt2_delayed")

    def test_locale_independent_floats(self, sim_dir):
        with open(os.path.join(sim_dir, "trajectory.csv"), "rb") as fh:
            blob = fh.read()
        assert b";" not in blob
        assert b"\r" not in blob

    def test_zero_initial_data_all_zero_columns(self, tmp_path):
        cfg = _quick_cfg(horizon_s=1.0)
        cfg["initial"]["preset"] = "zero"
        out = str(tmp_path / "out")
        code = main(["simulate", "--config", _write_cfg(tmp_path, cfg),
                     "--out", out])
        assert code == EXIT_OK
        data = np.loadtxt(os.path.join(out, "trajectory.csv"),
                          delimiter=",", skiprows=1)
        # every column except t is identically zero
        assert np.all(data[:, 1:] == 0.0)

    def test_rerun_byte_identical(self, tmp_path):
        cfg_path = _write_cfg(tmp_path, _quick_cfg(horizon_s=2.0))
        outs = []
        for sub in ("a", "b"):
            out = str(tmp_path / sub)
            assert main(["simulate", "--config", cfg_path,
                         "--out", out]) == EXIT_OK
            outs.append(out)
        for name in sorted(os.listdir(outs[0])):
            with open(os.path.join(outs[0], name), "rb") as fh:
                first = fh.read()
            with open(os.path.join(outs[1], name), "rb") as fh:
                second = fh.read()
            assert first == second, name

    def test_divergent_run_exits_4_with_partial_output(self, tmp_path):
        # force an unstable explicit step with a huge dt override
        cfg = _quick_cfg(horizon_s=5.0)
        cfg["numerics"]["dt_s"] = 0.1
        out = str(tmp_path / "out")
        code = main(["simulate", "--config", _write_cfg(tmp_path, cfg),
                     "--out", out])
        assert code == EXIT_DIVERGED
        assert os.path.exists(os.path.join(out, "summary.json"))
        with open(os.path.join(out, "summary.json")) as fh:
            assert json.load(fh)["status"] == "diverged"


class TestSweepCommand:
    def test_2x2_table_and_rerun(self, tmp_path):
        base = load_config("certified-decay")
        base["weights"]["delta2"]["ratio"] = 0.1
        sweep_cfg = {
            "base": base,
            "axes": [
                {"path": "weights.beta0", "values": [0.2, 0.95]},
                {"path": "weights.delta0", "values": [0.5, 1.0]},
            ],
            "n": 51, "horizon_s": 4.0,
        }
        cfg_path = _write_cfg(tmp_path, sweep_cfg, "sweep.json")
        out1 = str(tmp_path / "sweep1.csv")
        out2 = str(tmp_path / "sweep2.csv")
        assert main(["sweep", "--config", cfg_path, "--out", out1]) == EXIT_OK
        assert main(["sweep", "--config", cfg_path, "--out", out2]) == EXIT_OK
        with open(out1) as fh:
            lines = fh.read().splitlines()
        assert lines[0].startswith("weights.beta0,weights.delta0,valid,status")
        assert len(lines) == 5  # header + 4 data rows
        statuses = [line.split(",")[3] for line in lines[1:]]
        assert statuses == ["ok", "ok", "infeasible", "infeasible"]
        with open(out1, "rb") as fh1, open(out2, "rb") as fh2:
            assert fh1.read() == fh2.read()


class TestReport:
    def test_certified_dir_passes(self, sim_dir, capsys):
        assert main(["report", "--dir", sim_dir]) == EXIT_OK
        out = capsys.readouterr().out
        assert "decay: CERTIFIED" in out
        assert "PASS" in out

    def test_empty_dir_exits_1(self, tmp_path):
        assert main(["report", "--dir", str(tmp_path)]) == EXIT_USAGE

    def test_diverged_dir_exits_3(self, tmp_path):
        cfg = _quick_cfg(horizon_s=5.0)
        cfg["numerics"]["dt_s"] = 0.1
        out = str(tmp_path / "out")
        main(["simulate", "--config", _write_cfg(tmp_path, cfg), "--out", out])
        assert main(["report", "--dir", out]) == EXIT_VERIFICATION


class TestUsage:
    def test_no_command_exits_1(self):
        assert main([]) == EXIT_USAGE

    def test_seedless_flag_accepted(self):
        assert main(["--seedless", "check", "--config",
                     "certified-decay"]) == EXIT_OK

    def test_seedless_with_value_rejected(self):
        assert main(["--seedless=true", "check", "--config",
                     "certified-decay"]) == EXIT_USAGE
