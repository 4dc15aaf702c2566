"""Batch front end: synth / extract / evaluate / baseline subcommands.

Every subcommand validates its inputs and computes all results before
writing a single file, so a failing run leaves no partial artifacts.
Exit codes: 0 success, 2 usage/config error, 3 data error, 4 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from . import io
from .baselines import (
    histogram_keyframes,
    kmeans_keyframes,
    load_frame_features,
    write_frame_features,
)
from .config import PipelineConfig, load_config, write_effective
from .errors import AttnsumError, ConfigError, DataError, InvariantError
from .fusion import to_keyframes
from .metrics import ablation_report, evaluate
from .model import VideoTimeline
from .pipeline import run_extraction, stage, timeline_for
from .report import (
    build_report,
    format_table,
    render_figures,
    write_report_csv,
    write_report_json,
    write_report_text,
)
from .synth import (
    plan_to_truth,
    read_plan,
    synth_eeg,
    synth_frames,
    synth_gaze,
    write_plan,
)

__all__ = ["main"]


def _out_dir(arg: str) -> Path:
    out = Path(arg)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_synth(args) -> int:
    plan = read_plan(args.plan)
    if args.seed_override is not None:
        plan = dataclasses.replace(plan, seed=args.seed_override)
    rec = synth_eeg(plan)
    gaze = synth_gaze(plan)
    frames = synth_frames(plan)
    truth = plan_to_truth(plan)

    out = _out_dir(args.out)
    io.write_eeg(rec, out / "eeg.csv")
    io.write_gaze(gaze, out / "gaze.csv")
    write_frame_features(frames, out / "frames.csv")
    io.write_truth(truth, out / "truth.json")
    write_plan(plan, out / "effective-plan.json")
    print(f"wrote eeg.csv, gaze.csv, frames.csv, truth.json to {out}")
    return 0


def _safe_name(label: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in label)


def cmd_extract(args) -> int:
    config = load_config(args.config)
    with stage("ingest-eeg"):
        rec = io.ingest_eeg(config.path("eeg"), config.montage)
    with stage("ingest-gaze"):
        gaze = io.ingest_gaze(config.path("gaze"))
    timeline = timeline_for(config, rec)
    result = run_extraction(rec, gaze, timeline, config)

    out = _out_dir(args.out)
    for label, train in result.per_electrode.items():
        io.write_event_train(train, out / f"electrode-{_safe_name(label)}.json")
    for region, train in result.per_region.items():
        io.write_event_train(train, out / f"region-{_safe_name(region)}.json")
    io.write_event_train(result.eeg_fused, out / "eeg-fused.json")
    io.write_event_train(result.gaze, out / "gaze.json")
    io.write_event_train(result.fused, out / "fused.json")
    io.write_keyframes(result.keyframes, out / "keyframes.json")
    write_effective(config, out / "effective-config.json")
    print(
        f"extracted {len(result.keyframes.frame_indices)} key-frames "
        f"from {timeline.frame_count} frames -> {out}"
    )
    return 0


def cmd_evaluate(args) -> int:
    config = load_config(args.config) if args.config else PipelineConfig()
    if (args.eeg_only is None) != (args.gaze_only is None):
        raise ConfigError("ablation needs both --eeg-only and --gaze-only")

    with stage("read-truth"):
        truth = io.read_truth(args.truth)
    timeline = VideoTimeline(config.fps, truth.frame_count)

    def read_kf(path):
        # accepts a key-frame file or a frame-aligned event-train file
        with stage("read-keyframes"):
            if "active" in io._load_json(Path(path)):
                kf = to_keyframes(io.read_event_train(path), timeline)
            else:
                kf = io.read_keyframes(path, config.fps)
        if kf.timeline.frame_count != truth.frame_count:
            raise DataError(
                f"{path}: keyframes cover {kf.timeline.frame_count} frames, "
                f"truth covers {truth.frame_count}"
            )
        return kf

    fused_kf = read_kf(args.keyframes)
    tol = config.tolerance_frames
    sets = {}
    if args.eeg_only is not None:
        eeg_kf = read_kf(args.eeg_only)
        gaze_kf = read_kf(args.gaze_only)
        rows = ablation_report(eeg_kf, gaze_kf, fused_kf, truth, timeline, tol)
        sets = {"EEG": eeg_kf, "ET": gaze_kf, "EEG+ET": fused_kf}
    else:
        rows = {"EEG+ET": evaluate(fused_kf, truth, timeline, tol)}
        sets = {"EEG+ET": fused_kf}
    for item in args.extra or ():
        name, _, path = item.partition("=")
        if not name or not path:
            raise ConfigError(f"--extra expects NAME=PATH, got {item!r}")
        kf = read_kf(path)
        rows[name] = evaluate(kf, truth, timeline, tol)
        sets[name] = kf

    out = _out_dir(args.out)
    report = build_report(rows, timeline)
    write_report_json(report, out / "report.json")
    write_report_text(rows, out / "report.txt")
    write_report_csv(rows, out / "report.csv")
    render_figures(rows, sets, truth, timeline, out)
    write_effective(config, out / "effective-config.json")
    sys.stdout.write(format_table(rows))
    return 0


def cmd_baseline(args) -> int:
    config = load_config(args.config) if args.config else PipelineConfig()
    with stage("load-features"):
        features = load_frame_features(args.features)
    frame_count = features[-1].index + 1
    timeline = VideoTimeline(config.fps, frame_count)
    if args.method == "histogram":
        keyframes = histogram_keyframes(features, config.histogram, timeline)
    else:
        seed = config.kmeans.seed
        if args.seed_override is not None:
            seed = args.seed_override
        keyframes = kmeans_keyframes(
            features,
            config.kmeans.k,
            seed=seed,
            max_iter=config.kmeans.max_iter,
            timeline=timeline,
        )
    out = _out_dir(args.out)
    io.write_keyframes(keyframes, out / "keyframes.json")
    write_effective(config, out / "effective-config.json")
    print(
        f"{args.method} baseline kept {len(keyframes.frame_indices)} of "
        f"{frame_count} frames -> {out}"
    )
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="attnsum",
        description=(
            "Attention-driven video summarization: synthesize recordings, "
            "extract fused key-frames from EEG + gaze, and score them."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset from a plan")
    p.add_argument("plan", help="SynthPlan JSON file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed-override", type=int, default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="run the EEG+gaze extraction pipeline")
    p.add_argument("--config", required=True, help="pipeline config JSON")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("evaluate", help="score key-frames against ground truth")
    p.add_argument("keyframes", help="keyframes.json to score")
    p.add_argument("truth", help="ground-truth JSON")
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--eeg-only", default=None, help="EEG-only keyframes (ablation)")
    p.add_argument("--gaze-only", default=None, help="gaze-only keyframes (ablation)")
    p.add_argument(
        "--extra",
        action="append",
        metavar="NAME=PATH",
        help="additional key-frame set to score (repeatable)",
    )
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("baseline", help="classical key-frame baselines")
    p.add_argument("method", choices=("histogram", "kmeans"))
    p.add_argument("features", help="frame-features CSV or PPM directory")
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--seed-override", type=int, default=None)
    p.set_defaults(func=cmd_baseline)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (InvariantError, AttnsumError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
