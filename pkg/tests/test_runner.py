import json

import pytest

from selbias.data import load_dataset
from selbias.errors import ConfigError, SelbiasError
from selbias.runner import (
    RunConfig,
    RunReport,
    main,
    make_config,
    marker_frequency,
    parse_config_text,
    run_experiment,
)
from selbias.selection import rfe_schedule


def null_config(tmp_path, **overrides):
    values = dict(synthetic="null", n=40, p=200, protocol="external", folds=10, seed=1,
                  out=str(tmp_path / "out"))
    values.update(overrides)
    return make_config(**values)


def test_external_run(tmp_path):
    report = run_experiment(null_config(tmp_path))
    assert len(report.tables) == 1
    assert report.tables[0].sizes == rfe_schedule(200).sizes
    assert (tmp_path / "out" / "table_external.tsv").exists()
    assert (tmp_path / "out" / "report.json").exists()


@pytest.mark.parametrize("bad", [
    dict(folds=1),
    dict(protocol="double", folds=2),
    dict(protocol="screened-internal"),
    dict(protocol="leaky-holdout"),
    dict(protocol="nonsense"),
    dict(class_sizes="30,20"),
    dict(cost=0.0),
])
def test_invalid_config(tmp_path, bad):
    with pytest.raises(SelbiasError):
        null_config(tmp_path, **bad)


def test_needs_exactly_one_input():
    with pytest.raises(ConfigError):
        RunConfig().validate()
    with pytest.raises(ConfigError):
        RunConfig(input="x.csv", synthetic="null").validate()


def test_byte_identical_tables(tmp_path):
    a = run_experiment(null_config(tmp_path, out=str(tmp_path / "a")))
    b = run_experiment(null_config(tmp_path, out=str(tmp_path / "b")))
    assert (tmp_path / "a" / "table_external.tsv").read_bytes() == (tmp_path / "b" / "table_external.tsv").read_bytes()
    assert a.tables == b.tables


@pytest.mark.parametrize("protocol, extra, files", [
    ("apparent", {}, ["table_apparent.tsv"]),
    ("internal", {}, ["table_internal.tsv"]),
    ("screened-internal", {"screen": 16}, ["table_screened-internal.tsv"]),
    ("screened-external", {"screen": 16}, ["table_screened-external.tsv"]),
    ("repeated", {"reps": 2, "folds": 4}, ["table_repeated.tsv"]),
    ("double", {"folds": 3}, ["double_cv.tsv"]),
    ("leaky-holdout", {"size": 4}, ["holdout.tsv"]),
])
def test_every_protocol(tmp_path, protocol, extra, files):
    cfg = null_config(tmp_path, n=20, p=32, protocol=protocol, **extra)
    report = run_experiment(cfg)
    for name in files:
        assert (tmp_path / "out" / name).exists()
    assert RunReport.from_json(report.to_json()) == report


def test_report_round_trip(tmp_path):
    report = run_experiment(null_config(tmp_path))
    text = (tmp_path / "out" / "report.json").read_text()
    assert RunReport.from_json(text) == report
    assert json.loads(text)["config"]["protocol"] == "external"


class TestMarkerFrequency:
    def test_counts(self, tmp_path):
        report = run_experiment(null_config(tmp_path))
        for d in (1, 8, 64):
            counts = marker_frequency(report, d)
            assert len(counts) == 200
            assert sum(counts.values()) == 10 * d
            assert max(counts.values()) <= 10 and min(counts.values()) >= 0

    def test_full_set_selected_everywhere(self, tmp_path):
        report = run_experiment(null_config(tmp_path))
        assert set(marker_frequency(report, 200).values()) == {10}

    def test_missing_size(self, tmp_path):
        report = run_experiment(null_config(tmp_path))
        with pytest.raises(ConfigError):
            marker_frequency(report, 3)


class TestConfigFile:
    def test_parse(self):
        values = parse_config_text("# comment\nsynthetic = null\nclass_sizes = 10,12\nfolds=5  # trailing\n")
        assert values == {"synthetic": "null", "class_sizes": (10, 12), "folds": 5}

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config_text("colour = blue\n")

    def test_flags_override_file(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("synthetic = null\nn = 20\np = 16\nprotocol = internal\nfolds = 4\n")
        out = tmp_path / "o"
        assert main(["run", "--config", str(cfg), "--protocol", "external", "--out", str(out)]) == 0
        assert (out / "table_external.tsv").exists()
        assert not (out / "table_internal.tsv").exists()


class TestCli:
    def test_generate_then_run(self, tmp_path, capsys):
        data_path = tmp_path / "d.csv"
        assert main(["generate", "--kind", "gaussian", "--n", "30", "--p", "8", "--seed", "3",
                     "--out", str(data_path)]) == 0
        data = load_dataset(data_path)
        assert (data.n, data.p) == (30, 8)
        assert main(["run", "--input", str(data_path), "--protocol", "external", "--folds", "5",
                     "--out", str(tmp_path / "r")]) == 0
        assert "table_external.tsv" in capsys.readouterr().out

    def test_error_exit_status(self, tmp_path, capsys):
        assert main(["run", "--synthetic", "null", "--folds", "1", "--out", str(tmp_path)]) == 1
        assert "[runner]" in capsys.readouterr().err

    def test_upstream_error_names_module(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n3,4\n")
        assert main(["run", "--input", str(bad), "--out", str(tmp_path / "o")]) == 1
        assert "[data]" in capsys.readouterr().err

    def test_report_subcommand(self, tmp_path, capsys):
        out = tmp_path / "o"
        main(["run", "--synthetic", "null", "--n", "20", "--p", "16", "--folds", "4", "--out", str(out)])
        capsys.readouterr()
        assert main(["report", str(out)]) == 0
        assert (out / "table_external.tsv").read_text() in capsys.readouterr().out
        assert main(["report", str(out / "report.json"), "--markers", "2"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert sum(int(line.split("\t")[1]) for line in lines) == 4 * 2
        assert main(["report", str(out), "--out", str(tmp_path / "again")]) == 0
        assert (tmp_path / "again" / "table_external.tsv").read_bytes() == (out / "table_external.tsv").read_bytes()

    def test_output_dir_from_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SELBIAS_OUT", str(tmp_path / "env"))
        run_experiment(make_config(synthetic="null", n=20, p=16, folds=4))
        assert (tmp_path / "env" / "report.json").exists()
