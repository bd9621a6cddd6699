"""CLI: subcommands, exit codes, output files, determinism."""

import json
import os
import shutil

import pytest

from spinnsim.cli import default_golden_path, main
from spinnsim.config import save_config, synfire_default


@pytest.fixture
def synfire_config(tmp_path):
    import dataclasses

    path = tmp_path / "synfire.json"
    save_config(dataclasses.replace(synfire_default(), ticks=150), str(path))
    return str(path)


class TestRun:
    def test_run_writes_report_with_power_row(self, synfire_config, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(["run", synfire_config, "--out", str(out)])
        assert code == 0
        report = (out / "report.csv").read_text()
        assert "total_power_mW," in report
        assert (out / "trace.csv").exists()
        assert (out / "raster.csv").exists()
        assert "run complete" in capsys.readouterr().out

    def test_missing_config_exits_2(self, tmp_path):
        assert main(["run", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 2

    def test_invalid_config_exits_3_with_field_path(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        data = json.loads(open(default_config_json()).read())
        data["thresholds"] = {"l_th1": 99, "l_th2": 17}
        path.write_text(json.dumps(data))
        code = main(["run", str(path), "--out", str(tmp_path / "o")])
        assert code == 3
        assert "l_th" in capsys.readouterr().err

    def test_unknown_key_exits_3_naming_path(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        data = json.loads(open(default_config_json()).read())
        data["benchmark"]["mystery"] = 1
        path.write_text(json.dumps(data))
        assert main(["run", str(path), "--out", str(tmp_path / "o")]) == 3
        assert "benchmark.mystery" in capsys.readouterr().err

    def test_same_seed_twice_identical_bytes(self, synfire_config, tmp_path):
        outs = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            assert main(["run", synfire_config, "--seed", "9", "--out", str(out)]) == 0
            outs.append({
                f.name: f.read_bytes() for f in sorted(out.iterdir())
            })
        assert outs[0] == outs[1]

    def test_mode_pair_comparison_table(self, synfire_config, tmp_path, capsys):
        pl3 = tmp_path / "pl3"
        dvfs = tmp_path / "dvfs"
        assert main(["run", synfire_config, "--mode", "pl3", "--out", str(pl3)]) == 0
        assert main([
            "run", synfire_config, "--mode", "dvfs", "--out", str(dvfs),
            "--compare-baseline", str(pl3 / "report.csv"),
        ]) == 0
        lines = (dvfs / "power_compare.csv").read_text().splitlines()
        assert lines[0] == "component,only_pl3_mW,dvfs_mW,reduction_pct"
        components = [line.split(",")[0] for line in lines[1:]]
        assert components == ["baseline", "neuron", "synapse", "total"]


class TestVerify:
    def test_pristine_checkout_passes(self, capsys):
        assert main(["verify"]) == 0
        assert "passed" in capsys.readouterr().out

    def test_corrupted_golden_fails_naming_case(self, tmp_path, capsys):
        vectors = json.load(open(default_golden_path()))
        frame = bytearray(bytes.fromhex(vectors[0]["hex"]))
        frame[-1] ^= 0x01
        vectors[0]["hex"] = bytes(frame).hex()
        bad = tmp_path / "golden.json"
        bad.write_text(json.dumps(vectors))
        assert main(["verify", "--golden", str(bad)]) == 1
        out = capsys.readouterr().out
        assert vectors[0]["name"] in out

    def test_missing_golden_exits_2(self, tmp_path):
        assert main(["verify", "--golden", str(tmp_path / "none.json")]) == 2


class TestTables:
    def test_prints_parameter_tables(self, capsys):
        assert main(["tables"]) == 0
        out = capsys.readouterr().out
        assert "22.38" in out and "66.44" in out
        assert "20000" in out and "l_th1" in out


class TestSweep:
    def test_sweep_over_threshold(self, synfire_config, tmp_path, capsys):
        out = tmp_path / "sweep"
        code = main([
            "sweep", synfire_config, "--param", "thresholds.l_th1",
            "--values", "10,17", "--ticks", "60", "--out", str(out),
        ])
        assert code == 0
        summary = (out / "sweep_summary.csv").read_text().splitlines()
        assert summary[0].startswith("thresholds.l_th1,")
        assert len(summary) == 3

    def test_bad_param_exits_3(self, synfire_config, tmp_path):
        assert main([
            "sweep", synfire_config, "--param", "no.such.knob",
            "--values", "1", "--out", str(tmp_path / "s"),
        ]) == 3


def default_config_json() -> str:
    here = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    return os.path.join(here, "configs", "synfire.json")
