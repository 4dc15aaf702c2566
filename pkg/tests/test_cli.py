"""Config loading, orchestration, and subcommand behavior."""

import json
from pathlib import Path

import numpy as np
import pytest

from attnsum.cli import main
from attnsum.config import PipelineConfig, effective_dict, load_config, write_effective
from attnsum.errors import ConfigError
from attnsum.io import ingest_eeg, ingest_gaze
from attnsum.model import DEFAULT_MONTAGE
from attnsum.pipeline import run_extraction, timeline_for
from attnsum.synth import SynthPlan, synth_eeg, synth_gaze, write_plan

PLAN = {
    "duration_s": 10.0,
    "events": [[2.0, 4.0]],
    "eeg_rate_hz": 500.0,
    "gaze_rate_hz": 100.0,
    "fps": 83.0,
    "burst_band_hz": [20.0, 30.0],
    "snr_db": 10.0,
    "seed": 7,
    "scene_cuts": [5.0],
}

CONFIG = {
    "cwt": {"fc": 2.0, "n_scales": 32},
    "threshold": {"ratio": 0.30},
    "fps": 83.0,
    "kmeans": {"k": 2},
}


def _write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, indent=2) + "\n")
    return path


def _setup(tmp_path: Path, plan_overrides=None) -> tuple[Path, Path]:
    """Synthesize a dataset and write a config pointing at it."""
    plan = dict(PLAN, **(plan_overrides or {}))
    plan_path = _write_json(tmp_path / "plan.json", plan)
    assert main(["synth", str(plan_path), "--out", str(tmp_path / "data")]) == 0
    config = dict(CONFIG)
    config["paths"] = {"eeg": "data/eeg.csv", "gaze": "data/gaze.csv"}
    return _write_json(tmp_path / "config.json", config), plan_path


# ---------------------------------------------------------------- config


def test_empty_config_is_all_defaults(tmp_path):
    cfg = load_config(_write_json(tmp_path / "c.json", {}))
    assert cfg.fps == 83.0
    assert cfg.threshold.ratio == 0.5
    assert cfg.bandpass.low_hz == 12.0
    assert cfg.montage is not None
    assert cfg.montage.regions == DEFAULT_MONTAGE.regions


def test_unknown_section_rejected(tmp_path):
    with pytest.raises(ConfigError, match="unknown config section"):
        load_config(_write_json(tmp_path / "c.json", {"bogus": {}}))


def test_unknown_key_names_spec_class(tmp_path):
    with pytest.raises(ConfigError, match="IvtSpec"):
        load_config(_write_json(tmp_path / "c.json", {"ivt": {"speed": 3}}))


def test_bad_value_names_spec_class(tmp_path):
    with pytest.raises(ConfigError, match="ThresholdSpec"):
        load_config(_write_json(tmp_path / "c.json", {"threshold": {"ratio": 2.0}}))


def test_paths_resolve_relative_to_config(tmp_path):
    sub = tmp_path / "nested"
    sub.mkdir()
    cfg = load_config(_write_json(sub / "c.json", {"paths": {"eeg": "../x.csv"}}))
    assert cfg.path("eeg") == (tmp_path / "x.csv").resolve()
    with pytest.raises(ConfigError, match="no 'gaze' path"):
        cfg.path("gaze")


def test_effective_config_is_a_fixed_point(tmp_path):
    cfg = load_config(_write_json(tmp_path / "c.json", {"threshold": {"ratio": 0.3}}))
    eff = tmp_path / "effective.json"
    write_effective(cfg, eff)
    again = load_config(eff)
    assert effective_dict(again) == effective_dict(cfg)


def test_custom_montage_round_trip(tmp_path):
    obj = {"montage": {"occipital": ["OZ", "O1"], "frontal": ["F1"]}}
    cfg = load_config(_write_json(tmp_path / "c.json", obj))
    assert cfg.montage.labels == ("OZ", "O1", "F1")
    with pytest.raises(ConfigError, match="Montage"):
        load_config(
            _write_json(tmp_path / "bad.json", {"montage": {"a": ["X"], "b": ["X"]}})
        )


# ---------------------------------------------------------------- pipeline


def test_extraction_is_deterministic_under_threading(tmp_path):
    config_path, _ = _setup(tmp_path)
    cfg = load_config(config_path)
    rec = ingest_eeg(cfg.path("eeg"), cfg.montage)
    gz = ingest_gaze(cfg.path("gaze"))
    timeline = timeline_for(cfg, rec)
    a = run_extraction(rec, gz, timeline, cfg)
    b = run_extraction(rec, gz, timeline, cfg)
    assert list(a.per_electrode) == list(b.per_electrode)
    for label in a.per_electrode:
        assert np.array_equal(
            a.per_electrode[label].active, b.per_electrode[label].active
        )
    assert np.array_equal(a.fused.active, b.fused.active)
    assert set(a.per_region) == set(DEFAULT_MONTAGE.regions)


def test_timeline_for_derives_frame_count(tmp_path):
    plan = SynthPlan(duration_s=10.0, events=(), eeg_rate_hz=500.0, fps=83.0)
    rec = synth_eeg(plan)
    cfg = PipelineConfig()
    assert timeline_for(cfg, rec).frame_count == 830
    cfg2 = PipelineConfig(frame_count=100)
    assert timeline_for(cfg2, rec).frame_count == 100


# ---------------------------------------------------------------- synth cmd


def test_synth_writes_four_files(tmp_path):
    _setup(tmp_path)
    data = tmp_path / "data"
    for name in ("eeg.csv", "gaze.csv", "frames.csv", "truth.json"):
        assert (data / name).is_file(), name
    assert (data / "effective-plan.json").is_file()


def test_synth_missing_plan_exits_2(tmp_path, capsys):
    rc = main(["synth", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "plan not found" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_synth_unwritable_out_exits_3(tmp_path, capsys):
    _, plan_path = _setup(tmp_path)
    blocker = tmp_path / "blocker.txt"
    blocker.write_text("not a directory\n")
    rc = main(["synth", str(plan_path), "--out", str(blocker / "o")])
    assert rc == 3
    assert capsys.readouterr().err.startswith("error:")


def test_synth_rerun_is_byte_identical(tmp_path):
    _, plan_path = _setup(tmp_path)
    assert main(["synth", str(plan_path), "--out", str(tmp_path / "data2")]) == 0
    for name in ("eeg.csv", "gaze.csv", "frames.csv", "truth.json"):
        assert (tmp_path / "data" / name).read_bytes() == (
            tmp_path / "data2" / name
        ).read_bytes(), name


def test_synth_seed_override_changes_output(tmp_path):
    _, plan_path = _setup(tmp_path)
    out = tmp_path / "data3"
    assert main(["synth", str(plan_path), "--out", str(out), "--seed-override", "99"]) == 0
    assert (out / "eeg.csv").read_bytes() != (tmp_path / "data" / "eeg.csv").read_bytes()
    assert json.loads((out / "effective-plan.json").read_text())["seed"] == 99


# ---------------------------------------------------------------- extract cmd


def test_extract_writes_all_trains(tmp_path):
    config_path, _ = _setup(tmp_path)
    out = tmp_path / "run"
    assert main(["extract", "--config", str(config_path), "--out", str(out)]) == 0
    for label in DEFAULT_MONTAGE.labels:
        assert (out / f"electrode-{label}.json").is_file()
    for region in DEFAULT_MONTAGE.regions:
        assert (out / f"region-{region}.json").is_file()
    for name in ("eeg-fused.json", "gaze.json", "fused.json", "keyframes.json"):
        assert (out / name).is_file()
    kf = json.loads((out / "keyframes.json").read_text())
    assert kf["frame_count"] == 830
    assert len(kf["frames"]) > 0
    eff = json.loads((out / "effective-config.json").read_text())
    assert eff["threshold"]["ratio"] == 0.30
    assert eff["bandpass"]["low_hz"] == 12.0  # default materialized


def test_extract_empty_events_gives_empty_keyframes(tmp_path):
    config_path, _ = _setup(tmp_path, plan_overrides={"events": []})
    out = tmp_path / "run"
    assert main(["extract", "--config", str(config_path), "--out", str(out)]) == 0
    assert json.loads((out / "keyframes.json").read_text())["frames"] == []


def test_extract_bad_bandpass_exits_2(tmp_path, capsys):
    config_path, _ = _setup(tmp_path)
    cfg = json.loads(config_path.read_text())
    cfg["bandpass"] = {"low_hz": 50.0, "high_hz": 12.0}
    bad = _write_json(tmp_path / "bad.json", cfg)
    out = tmp_path / "never"
    rc = main(["extract", "--config", str(bad), "--out", str(out)])
    assert rc == 2
    assert "BandpassSpec" in capsys.readouterr().err
    assert not out.exists()  # nothing written on failure


def test_extract_missing_input_names_stage(tmp_path, capsys):
    cfg = _write_json(
        tmp_path / "c.json",
        dict(CONFIG, paths={"eeg": "absent.csv", "gaze": "absent.csv"}),
    )
    rc = main(["extract", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert rc == 3
    assert "ingest-eeg" in capsys.readouterr().err


def test_extract_rerun_is_byte_identical(tmp_path):
    config_path, _ = _setup(tmp_path)
    assert main(["extract", "--config", str(config_path), "--out", str(tmp_path / "a")]) == 0
    assert main(["extract", "--config", str(config_path), "--out", str(tmp_path / "b")]) == 0
    a, b = tmp_path / "a", tmp_path / "b"
    for f in sorted(a.iterdir()):
        assert f.read_bytes() == (b / f.name).read_bytes(), f.name


# ---------------------------------------------------------------- evaluate cmd


def _extract(tmp_path):
    config_path, _ = _setup(tmp_path)
    out = tmp_path / "run"
    assert main(["extract", "--config", str(config_path), "--out", str(out)]) == 0
    return config_path, out


def test_evaluate_writes_report_and_figures(tmp_path):
    config_path, run = _extract(tmp_path)
    out = tmp_path / "eval"
    rc = main(
        [
            "evaluate",
            str(run / "keyframes.json"),
            str(tmp_path / "data" / "truth.json"),
            "--config",
            str(config_path),
            "--out",
            str(out),
        ]
    )
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert [r["method"] for r in report["rows"]] == ["EEG+ET"]
    assert report["rows"][0]["precision"] > 0.9
    text = (out / "report.txt").read_text()
    assert "Compression Factor" in text and "Detection Percentage" in text
    for name in ("report.csv", "metrics.png", "timeline.png", "effective-config.json"):
        assert (out / name).is_file(), name


def test_evaluate_ablation_rows_in_order(tmp_path):
    config_path, run = _extract(tmp_path)
    out = tmp_path / "eval"
    rc = main(
        [
            "evaluate",
            str(run / "keyframes.json"),
            str(tmp_path / "data" / "truth.json"),
            "--config",
            str(config_path),
            "--out",
            str(out),
            "--eeg-only",
            str(run / "eeg-fused.json"),
            "--gaze-only",
            str(run / "gaze.json"),
        ]
    )
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert [r["method"] for r in report["rows"]] == ["EEG", "ET", "EEG+ET"]


def test_evaluate_truth_as_keyframes_scores_perfectly(tmp_path, capsys):
    config_path, run = _extract(tmp_path)
    truth = tmp_path / "data" / "truth.json"
    out = tmp_path / "eval"
    rc = main(
        ["evaluate", str(truth), str(truth), "--config", str(config_path), "--out", str(out)]
    )
    assert rc == 0
    row = json.loads((out / "report.json").read_text())["rows"][0]
    assert row["precision"] == 1.0 and row["recall"] == 1.0 and row["f_value"] == 1.0
    assert "1.000" in capsys.readouterr().out


def test_evaluate_frame_count_mismatch_exits_3(tmp_path, capsys):
    config_path, run = _extract(tmp_path)
    bad = _write_json(tmp_path / "bad_truth.json", {"frame_count": 10, "frames": [1]})
    rc = main(
        [
            "evaluate",
            str(run / "keyframes.json"),
            str(bad),
            "--config",
            str(config_path),
            "--out",
            str(tmp_path / "eval"),
        ]
    )
    assert rc == 3
    assert "frames" in capsys.readouterr().err


def test_evaluate_extra_rows(tmp_path):
    config_path, run = _extract(tmp_path)
    out = tmp_path / "eval"
    rc = main(
        [
            "evaluate",
            str(run / "keyframes.json"),
            str(tmp_path / "data" / "truth.json"),
            "--config",
            str(config_path),
            "--out",
            str(out),
            "--extra",
            f"gaze-only={run / 'gaze.json'}",
        ]
    )
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert [r["method"] for r in report["rows"]] == ["EEG+ET", "gaze-only"]


def test_evaluate_rerun_is_byte_identical(tmp_path):
    config_path, run = _extract(tmp_path)
    truth = tmp_path / "data" / "truth.json"
    for out in ("e1", "e2"):
        assert (
            main(
                [
                    "evaluate",
                    str(run / "keyframes.json"),
                    str(truth),
                    "--config",
                    str(config_path),
                    "--out",
                    str(tmp_path / out),
                ]
            )
            == 0
        )
    a, b = tmp_path / "e1", tmp_path / "e2"
    for f in sorted(a.iterdir()):
        assert f.read_bytes() == (b / f.name).read_bytes(), f.name


# ---------------------------------------------------------------- baseline cmd


def test_baseline_histogram_recovers_cut(tmp_path):
    config_path, _ = _setup(tmp_path)
    out = tmp_path / "bh"
    rc = main(
        [
            "baseline",
            "histogram",
            str(tmp_path / "data" / "frames.csv"),
            "--config",
            str(config_path),
            "--out",
            str(out),
        ]
    )
    assert rc == 0
    frames = json.loads((out / "keyframes.json").read_text())["frames"]
    assert frames == [0, 415]  # planted cut at 5.0 s x 83 fps


def test_baseline_kmeans_uses_config_k(tmp_path):
    config_path, _ = _setup(tmp_path)
    out = tmp_path / "bk"
    rc = main(
        [
            "baseline",
            "kmeans",
            str(tmp_path / "data" / "frames.csv"),
            "--config",
            str(config_path),
            "--out",
            str(out),
        ]
    )
    assert rc == 0
    frames = json.loads((out / "keyframes.json").read_text())["frames"]
    assert len(frames) == 2
    assert (frames[0] < 415) != (frames[1] < 415) or len(set(frames)) == 2


def test_baseline_missing_features_exits_3(tmp_path, capsys):
    rc = main(
        [
            "baseline",
            "histogram",
            str(tmp_path / "absent.csv"),
            "--out",
            str(tmp_path / "o"),
        ]
    )
    assert rc == 3
    assert "load-features" in capsys.readouterr().err
