"""Config files, result files and the command line."""

import csv
import json

import numpy as np
import pytest

from uavntn import cli
from uavntn.config import ConfigError, ScenarioConfig, preset
from uavntn.engine import MetricsSummary, PopulationStats, run_campaign
from uavntn.io import (
    CSV_HEADER,
    emit_results,
    format_config,
    load_csv,
    load_json,
    parse_config,
    parse_config_text,
    summary_to_dict,
)

TINY = ["--set", "deployment.area=1e6", "--drops", "1"]


def three_sample_summary():
    empty = PopulationStats(np.zeros(0), np.zeros(0))
    stats = {
        ("GUE", "DL"): PopulationStats(np.array([-7.0, 1.5]), np.zeros(0)),
        ("GUE", "UL"): empty,
        ("UAV", "DL"): PopulationStats(np.zeros(0), np.array([12.5])),
        ("UAV", "UL"): empty,
    }
    return MetricsSummary("tiny", ScenarioConfig(name="tiny"), 1, stats)


@pytest.fixture(scope="module")
def small_summary():
    cfg = preset("case3.relief").replace(**{"deployment.area": 2e6, "simulation.n_drops": 2})
    return run_campaign(cfg)


class TestConfigFiles:
    def test_empty_file_lists_required_keys(self, tmp_path):
        p = tmp_path / "empty.ini"
        p.write_text("")
        with pytest.raises(ConfigError, match="scenario.preset.*simulation.mode"):
            parse_config(p)

    def test_preset_reference(self, tmp_path):
        p = tmp_path / "p.ini"
        p.write_text('preset = "case3.standalone"\n')
        assert parse_config(p) == preset("case3.standalone")

    def test_overrides_on_preset(self, tmp_path):
        p = tmp_path / "p.ini"
        p.write_text("[scenario]\npreset = case3.offload_90_frf1\nname = low\n\n[deployment]\nelevation = 87 ; deg\n")
        cfg = parse_config(p)
        assert cfg.deployment.elevation == 87.0 and cfg.name == "low"

    def test_out_of_range_names_range(self, tmp_path):
        p = tmp_path / "p.ini"
        p.write_text("[simulation]\nmode = tn_ntn_offload\n[deployment]\nelevation = 95\n")
        with pytest.raises(ConfigError, match=r"deployment\.elevation.*\(0, 90\]"):
            parse_config(p)

    def test_unknown_key_has_location(self, tmp_path):
        p = tmp_path / "p.ini"
        p.write_text("[simulation]\nmode = standalone_tn\nspeed = 3\n")
        with pytest.raises(ConfigError, match=r"p\.ini: unknown key simulation\.speed"):
            parse_config(p)

    def test_unknown_section(self):
        with pytest.raises(ConfigError, match=r"unknown section \[antenna\]"):
            parse_config_text("[simulation]\nmode = standalone_tn\n[antenna]\ntilt = 3\n")

    def test_bad_type(self):
        with pytest.raises(ConfigError, match="simulation.n_drops"):
            parse_config_text("[simulation]\nmode = standalone_tn\nn_drops = many\n")

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            parse_config(tmp_path / "nope.ini")

    @pytest.mark.parametrize("name", ["case2.partition", "case3.offload_87_frf3"])
    def test_format_round_trip(self, name):
        cfg = preset(name).replace(**{"simulation.exclude_edge": True, "deployment.ring_azimuth": 12.345678901234})
        assert parse_config_text(format_config(cfg)) == cfg


class TestResultFiles:
    def test_three_samples_three_rows(self, tmp_path):
        path = emit_results(three_sample_summary(), "csv", tmp_path / "r.csv")
        raw = path.read_bytes()
        assert b"\r" not in raw
        rows = list(csv.reader(raw.decode("utf-8").splitlines()))
        assert tuple(rows[0]) == CSV_HEADER
        assert len(rows) == 4
        assert rows[1] == ["tiny", "GUE", "DL", "sinr_db", "-7.0"]

    def test_json_round_trip(self, tmp_path, small_summary):
        path = emit_results(small_summary, "json", tmp_path / "r.json", timestamp="t0")
        back = load_json(path)
        assert back.config == small_summary.config
        assert back.relief == small_summary.relief
        for key, st in small_summary.stats.items():
            assert np.array_equal(back[key].sinr_db, st.sinr_db)
            assert np.array_equal(back[key].rate_bps, st.rate_bps)
        assert summary_to_dict(back, timestamp="t0") == json.loads(path.read_text())

    def test_outage_recount_from_csv(self, tmp_path, small_summary):
        emit_results(small_summary, "csv", tmp_path / "r.csv")
        doc = summary_to_dict(small_summary)
        samples = load_csv(tmp_path / "r.csv")
        for table in doc["tables"]:
            s = samples[(small_summary.scenario, table["population"], table["direction"], "sinr_db")]
            assert table["scalars"]["outage"] == np.count_nonzero(s < -5.0) / len(s)
            assert np.array_equal(s, np.asarray(table["sinr_db"]))

    def test_csv_values_are_plain_decimals(self, tmp_path, small_summary):
        emit_results(small_summary, "csv", tmp_path / "r.csv")
        for row in list(csv.reader(open(tmp_path / "r.csv", encoding="utf-8")))[1:50]:
            float(row[4])
            assert "," not in row[4]

    def test_metadata(self, small_summary):
        meta = summary_to_dict(small_summary, timestamp="2024-01-01T00:00:00+00:00")["metadata"]
        assert meta["master_seed"] == small_summary.config.simulation.master_seed
        assert meta["timestamp"] == "2024-01-01T00:00:00+00:00"
        assert meta["version"].startswith("0.1.0")

    def test_source_date_epoch(self, small_summary, monkeypatch):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
        assert summary_to_dict(small_summary)["metadata"]["timestamp"] == "1970-01-01T00:00:00+00:00"

    def test_unwritable_path(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(OSError, match="cannot write"):
            emit_results(three_sample_summary(), "csv", blocker / "r.csv")

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            emit_results(three_sample_summary(), "xml", tmp_path / "r.xml")


class TestCli:
    def test_presets(self, capsys):
        assert cli.main(["presets"]) == 0
        assert len(capsys.readouterr().out.split()) == 14

    def test_validate_preset(self):
        assert cli.main(["validate", "--preset", "case3.standalone"]) == 0

    def test_validate_bad_config(self, tmp_path, capsys):
        p = tmp_path / "bad.ini"
        p.write_text("[deployment]\nelevation = 95\n")
        assert cli.main(["validate", "--config", str(p)]) == cli.EXIT_CONFIG
        assert "config error" in capsys.readouterr().err

    def test_run_zero_drops(self, tmp_path):
        code = cli.main(["run", "--preset", "case3.standalone", "--drops", "0", "--out", str(tmp_path)])
        assert code == cli.EXIT_CONFIG

    def test_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["explode"])
        assert exc.value.code == cli.EXIT_USAGE
        assert "usage:" in capsys.readouterr().err

    def test_run_and_rerun_from_result(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        args = ["--timestamp", "t", "--format", "json"]
        assert cli.main(["run", "--preset", "case3.relief", *TINY, "--out", str(out1), *args]) == 0
        first = out1 / "case3.relief.json"
        assert cli.main(["run", "--config", str(first), "--out", str(out2), *args]) == 0
        assert first.read_bytes() == (out2 / "case3.relief.json").read_bytes()

    def test_sweep_cartesian(self, tmp_path):
        code = cli.main(
            ["sweep", "--preset", "case3.offload_90_frf1", *TINY, "--vary", "elevation=87,90",
             "--vary", "deployment.frf=1,3", "--out", str(tmp_path), "--format", "csv"]
        )
        assert code == 0
        assert len(list(tmp_path.glob("*.csv"))) == 4

    def test_bad_sweep_key(self, tmp_path):
        code = cli.main(["sweep", "--preset", "case3.standalone", "--vary", "warp=1,2", "--out", str(tmp_path)])
        assert code == cli.EXIT_CONFIG

    def test_bad_format(self, tmp_path):
        code = cli.main(["run", "--preset", "case3.standalone", "--format", "xls", "--out", str(tmp_path)])
        assert code == cli.EXIT_CONFIG
