"""Command line interface: subcommands, config files, and artifacts."""

from __future__ import annotations

import csv
import json
from datetime import datetime, timedelta

import pytest

from trajacast.cli import main, read_config
from trajacast.series import load_series


def run_cli(*argv) -> int:
    return main(list(argv))


@pytest.fixture(scope="module")
def series_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "series.csv"
    code = run_cli(
        "synth", "--kind", "daily-sinusoid", "--length", str(96 * 24),
        "--seed", "7", "-o", str(path),
    )
    assert code == 0
    return path


@pytest.fixture(scope="module")
def split_json(tmp_path_factory, series_csv):
    path = tmp_path_factory.mktemp("split") / "split.json"
    code = run_cli(
        "split", "--series", str(series_csv), "--length", "8",
        "--tune-start", "2024-01-09", "--test-start", "2024-01-17",
        "-o", str(path),
    )
    assert code == 0
    return path


class TestSynth:
    def test_writes_loadable_series(self, series_csv):
        ts = load_series(series_csv)
        assert len(ts) == 96 * 24
        assert ts.start == datetime(2024, 1, 1)

    def test_deterministic_given_seed(self, tmp_path, series_csv):
        other = tmp_path / "series2.csv"
        run_cli("synth", "--kind", "daily-sinusoid", "--length", str(96 * 24),
                "--seed", "7", "-o", str(other))
        assert other.read_bytes() == series_csv.read_bytes()

    def test_rejects_unknown_kind(self, tmp_path, capsys):
        with pytest.raises(SystemExit):
            run_cli("synth", "--kind", "fractal", "--length", "100",
                    "-o", str(tmp_path / "x.csv"))


class TestIngest:
    def test_pipeline_and_report(self, tmp_path):
        start = datetime(2024, 1, 1)
        n = 4 * 7 * 96 * 3  # four weeks of 5-minute rows
        rows = ["timestamp,flow"]
        gap = range(3 * 7 * 96 * 3 + 30, 3 * 7 * 96 * 3 + 39)  # 9 rows -> 3 slots
        for i in range(n):
            when = start + i * timedelta(minutes=5)
            flow = "" if i in gap else "5"
            rows.append(f"{when:%Y-%m-%d %H:%M:%S},{flow}")
        raw = tmp_path / "raw.csv"
        raw.write_text("\n".join(rows) + "\n")
        out = tmp_path / "clean.csv"
        report = tmp_path / "report.txt"
        code = run_cli("ingest", "--input", str(raw), "-o", str(out),
                       "--report", str(report))
        assert code == 0
        ts = load_series(out)
        assert len(ts) == n // 3
        text = report.read_text()
        assert "imputed(previous-week): 3" in text
        assert "missing(15min): 3" in text

    def test_bad_input_exits_nonzero(self, tmp_path, capsys):
        raw = tmp_path / "raw.csv"
        raw.write_text("timestamp,flow\nnot-a-date,1\n")
        code = run_cli("ingest", "--input", str(raw),
                       "-o", str(tmp_path / "clean.csv"))
        assert code == 1
        assert "ingest error" in capsys.readouterr().err


class TestSplit:
    def test_json_payload_round_trips(self, split_json, capsys):
        payload = json.loads(split_json.read_text())
        assert set(payload) == {"u", "s", "w", "last", "length", "step"}
        assert payload["length"] == 8
        assert payload["u"] < payload["s"] <= payload["last"]

    def test_missing_dates_fail(self, series_csv, capsys):
        code = run_cli("split", "--series", str(series_csv))
        assert code == 1
        assert "--tune-start" in capsys.readouterr().err

    def test_w_policy_floor_one(self, series_csv, capsys):
        code = run_cli(
            "split", "--series", str(series_csv), "--length", "8",
            "--tune-start", "2024-01-09", "--test-start", "2024-01-17",
            "--w-policy", "floor-one",
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["w"] == 1


class TestTune:
    def test_leaderboard_csv(self, tmp_path, series_csv, split_json):
        out = tmp_path / "leaderboard.csv"
        code = run_cli(
            "tune", "--series", str(series_csv),
            "--split-json", str(split_json),
            "--models", "mean", "--lengths", "6,10", "--ks", "5,15",
            "-o", str(out),
        )
        assert code == 0
        with open(out, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 4
        assert [r["rank"] for r in rows] == ["1", "2", "3", "4"]
        assert all(r["status"] == "ok" for r in rows)
        tune = [float(r["tune_metric"]) for r in rows]
        assert tune == sorted(tune)


class TestRun:
    def test_reports_and_artifacts(self, tmp_path, series_csv, split_json):
        outdir = tmp_path / "out"
        code = run_cli(
            "run", "--series", str(series_csv),
            "--split-json", str(split_json),
            "--models", "mean,naive", "--intervals", "none,st",
            "--k", "15", "--dm", "--outdir", str(outdir),
        )
        assert code == 0
        with open(outdir / "summary.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        by_status = {}
        for row in rows:
            by_status.setdefault(row["status"].split(":")[0], 0)
            by_status[row["status"].split(":")[0]] += 1
        # mean/none, mean/st, naive/none are ok; naive/st is skipped.
        assert by_status["ok"] == 6
        assert by_status["skipped"] == 2
        assert (outdir / "forecasts_mean.csv").exists()
        assert (outdir / "forecasts_mean_st.csv").exists()
        assert (outdir / "forecasts_naive.csv").exists()
        assert (outdir / "dm_matrix.csv").exists()

    def test_forecast_frame_columns(self, tmp_path, series_csv, split_json):
        outdir = tmp_path / "out"
        run_cli("run", "--series", str(series_csv),
                "--split-json", str(split_json), "--models", "naive",
                "--outdir", str(outdir))
        with open(outdir / "forecasts_naive.csv", newline="") as fh:
            reader = csv.DictReader(fh)
            assert reader.fieldnames == ["t", "actual", "forecast",
                                         "lower", "upper"]
            first = next(reader)
        payload = json.loads(split_json.read_text())
        want_t = payload["s"] + payload["length"] + payload["step"] - 1
        assert int(first["t"]) == want_t
        assert first["lower"] == ""

    def test_real_failure_exits_nonzero(self, tmp_path, series_csv,
                                        split_json, capsys):
        outdir = tmp_path / "out"
        code = run_cli(
            "run", "--series", str(series_csv),
            "--split-json", str(split_json),
            "--models", "mean", "--intervals", "hs",
            "--hs-window", "5000", "--outdir", str(outdir),
        )
        assert code == 1
        with open(outdir / "summary.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert all(r["status"].startswith("error:") for r in rows)

    def test_unknown_interval_method(self, tmp_path, series_csv, split_json,
                                     capsys):
        code = run_cli(
            "run", "--series", str(series_csv),
            "--split-json", str(split_json), "--intervals", "bootstrap",
            "--outdir", str(tmp_path / "out"),
        )
        assert code == 1
        assert "unknown interval method" in capsys.readouterr().err

    def test_hourly_breakdown(self, tmp_path, series_csv, split_json):
        outdir = tmp_path / "out"
        code = run_cli(
            "run", "--series", str(series_csv),
            "--split-json", str(split_json),
            "--models", "naive,snaive:96:1", "--hourly", "--dm",
            "--outdir", str(outdir),
        )
        assert code == 0
        with open(outdir / "hourly_metrics.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert {r["model"] for r in rows} == {"naive", "snaive:96:1"}
        assert len(rows) == 48  # 2 models x 24 hours
        assert (outdir / "dm_hourly.csv").exists()


class TestCompare:
    def test_dm_matrix_between_saved_runs(self, tmp_path, series_csv,
                                          split_json):
        outdir = tmp_path / "out"
        run_cli("run", "--series", str(series_csv),
                "--split-json", str(split_json),
                "--models", "mean,naive,snaive:96:1",
                "--outdir", str(outdir))
        out = tmp_path / "dm_compare.csv"
        code = run_cli(
            "compare",
            "--forecasts",
            str(outdir / "forecasts_mean.csv"),
            str(outdir / "forecasts_naive.csv"),
            str(outdir / "forecasts_snaive-96-1.csv"),
            "-o", str(out),
        )
        assert code == 0
        with open(out, newline="") as fh:
            rows = list(fh)
        assert rows[0].strip() == "model,mean,naive,snaive-96-1"
        cells = rows[1].strip().split(",")
        assert cells[1] == "n/a"

    def test_single_file_rejected(self, tmp_path, series_csv, split_json,
                                  capsys):
        outdir = tmp_path / "out"
        run_cli("run", "--series", str(series_csv),
                "--split-json", str(split_json), "--models", "naive",
                "--outdir", str(outdir))
        code = run_cli("compare", "--forecasts",
                       str(outdir / "forecasts_naive.csv"),
                       "-o", str(tmp_path / "dm.csv"))
        assert code == 1
        assert "at least two" in capsys.readouterr().err


class TestConfigFile:
    def test_config_sets_defaults_flags_win(self, tmp_path, series_csv,
                                            capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "length = 8\n"
            "tune-start = 2024-01-09\n"
            "test-start = 2024-01-17\n"
            "# comment line\n"
        )
        code = run_cli("split", "--series", str(series_csv),
                       "--config", str(cfg))
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["length"] == 8
        # An explicit flag overrides the file value.
        code = run_cli("split", "--series", str(series_csv),
                       "--config", str(cfg), "--length", "12")
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["length"] == 12

    def test_unknown_key_fails(self, tmp_path, series_csv, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("not-a-flag = 3\n")
        code = run_cli("split", "--series", str(series_csv),
                       "--config", str(cfg))
        assert code == 1
        assert "unknown config key" in capsys.readouterr().err

    def test_read_config_parses_pairs(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("a-b = 1\n\n# note\nc = x y\n")
        assert read_config(cfg) == {"a_b": "1", "c": "x y"}

    def test_malformed_line_rejected(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("just-a-word\n")
        with pytest.raises(ValueError, match="key = value"):
            read_config(cfg)
