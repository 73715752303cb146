import json

import numpy as np
import pytest

from reann.cli import main
from reann.clusterer import EpsilonSchedule
from reann.pipeline import (ClusteringConfig, ExperimentConfig, PipelineError,
                            prepare_data, render_report, run_reann,
                            serialize_report)


def season_config(runs=1):
    return ExperimentConfig(dataset="season", runs=runs)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def test_config_round_trip_preserves_nested_specs(tmp_path):
    cfg = ExperimentConfig(dataset="iris", runs=3, base_seed=9,
                           learning_rate=0.4, weight_decay=2e-4)
    again = ExperimentConfig.from_dict(cfg.to_dict())
    assert again == cfg
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert ExperimentConfig.load(path) == cfg


def test_config_rejects_unknown_format():
    with pytest.raises(PipelineError, match="unsupported config format"):
        ExperimentConfig.from_dict({"format": "bogus", "dataset": "iris"})


def test_run_seeds_derive_from_base_seed_or_explicit_list():
    cfg = ExperimentConfig(dataset="iris", runs=3, base_seed=5)
    assert cfg.run_seeds() == (5, 6, 7)
    cfg = ExperimentConfig(dataset="iris", runs=2, seeds=(11, 4))
    assert cfg.run_seeds() == (11, 4)
    cfg = ExperimentConfig(dataset="iris", runs=3, seeds=(11, 4))
    with pytest.raises(PipelineError, match="length must equal runs"):
        cfg.run_seeds()


def test_clustering_config_builds_schedule():
    sched = ClusteringConfig(epsilon_start=0.4, epsilon_factor=0.25,
                             epsilon_floor=1e-2).schedule()
    assert sched == EpsilonSchedule(0.4, 0.25, 1e-2)


# ---------------------------------------------------------------------------
# data preparation
# ---------------------------------------------------------------------------

def test_prepare_data_uses_whole_table_when_train_count_equals_size():
    train, test, schema = prepare_data(season_config())
    assert len(train) == len(test) == 11
    assert np.array_equal(train.raw_matrix, test.raw_matrix)
    assert schema.name == "season"


def test_prepare_data_splits_and_normalizes_with_the_training_map():
    train, test, schema = prepare_data(ExperimentConfig(dataset="iris"))
    assert len(train) == 75 and len(test) == 75
    assert train.normalized_matrix.min() >= 0.0
    assert train.normalized_matrix.max() <= 1.0
    assert test.normalization_map == train.normalization_map


def test_prepare_data_accepts_a_path_with_an_explicit_schema(tmp_path):
    path = tmp_path / "mini.csv"
    path.write_text("sunny,green,high,summer\nsunny,green,low,winter\n")
    cfg = ExperimentConfig(dataset=str(path), schema="season")
    train, test, schema = prepare_data(cfg)
    assert schema.name == "season"
    assert len(train) == len(test) == 2


def test_prepare_data_rejects_unknown_schema(tmp_path):
    path = tmp_path / "mini.csv"
    path.write_text("1,a\n")
    cfg = ExperimentConfig(dataset=str(path), schema="nope")
    with pytest.raises(Exception, match="unknown schema"):
        prepare_data(cfg)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def test_reports_are_byte_identical_for_a_fixed_configuration():
    a = serialize_report(run_reann(season_config(runs=2)))
    b = serialize_report(run_reann(season_config(runs=2)))
    assert a == b


def test_report_aggregates_are_recomputable_from_the_runs():
    report = run_reann(season_config(runs=2))
    ok = [r for r in report["runs"] if r["status"] == "ok"]
    assert ok
    agg = report["aggregates"]
    counts = [r["rule_metrics"]["rule_count"] for r in ok]
    assert agg["rule_count"]["mean"] == pytest.approx(np.mean(counts))
    assert agg["rule_count"]["min"] == min(counts)
    assert agg["rule_count"]["max"] == max(counts)
    conns = [r["architecture"]["final"]["connection_count"] for r in ok]
    assert agg["final_connections"]["mean"] == pytest.approx(np.mean(conns))


def test_render_report_formats():
    report = run_reann(season_config())
    text = render_report(report, "text")
    assert "Experiment: season" in text
    assert "Default Rule:" in text
    structured = render_report(report, "structured")
    assert json.loads(structured) == json.loads(serialize_report(report))
    with pytest.raises(PipelineError, match="unknown format"):
        render_report(report, "yaml")
    with pytest.raises(PipelineError, match="nothing to render"):
        render_report({"runs": []})


# ---------------------------------------------------------------------------
# command-line interface
# ---------------------------------------------------------------------------

def test_cli_run_writes_a_parseable_structured_report(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["run", "--dataset", "season", "--format", "structured",
                 "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["dataset"] == "season"
    assert report["runs"][0]["status"] == "ok"


def test_cli_run_is_deterministic(tmp_path):
    outs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        assert main(["run", "--dataset", "season", "--format", "structured",
                     "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_cli_requires_a_dataset_or_config(capsys):
    assert main(["run"]) == 1
    assert "error:" in capsys.readouterr().err


def test_cli_rejects_unknown_dataset(capsys):
    assert main(["run", "--dataset", "nonesuch"]) == 1
    assert "unknown bundled dataset" in capsys.readouterr().err


def test_cli_rejects_bad_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"format": "bogus", "dataset": "season"}))
    assert main(["run", "--config", str(cfg)]) == 2
    assert "pipeline failure" in capsys.readouterr().err


def test_cli_train_extract_evaluate_round_trip(tmp_path, capsys):
    ckpt = tmp_path / "season.net.json"
    assert main(["train", "--dataset", "season", "--out", str(ckpt)]) == 0
    assert ckpt.exists()
    assert (tmp_path / "season.net.json.epochs.txt").exists()

    rules = tmp_path / "season.rules.json"
    assert main(["extract", "--dataset", "season", "--checkpoint", str(ckpt),
                 "--out", str(rules)]) == 0
    parsed = json.loads(rules.read_text())
    assert parsed["format"] == "reann-rules-v1"

    capsys.readouterr()
    assert main(["evaluate", "--dataset", "season", "--rules", str(rules),
                 "--min-accuracy", "0.9"]) == 0
    metrics = json.loads(capsys.readouterr().out)
    assert metrics["accuracy_train"] >= 0.9

    assert main(["evaluate", "--dataset", "season", "--rules", str(rules),
                 "--min-accuracy", "1.01"]) == 3


def test_cli_report_renders_a_stored_report(tmp_path, capsys):
    stored = tmp_path / "report.json"
    assert main(["run", "--dataset", "season", "--format", "structured",
                 "--out", str(stored)]) == 0
    capsys.readouterr()
    assert main(["report", "--report", str(stored)]) == 0
    assert "Experiment: season" in capsys.readouterr().out
