"""Evaluation report rendering: JSON, aligned text, CSV, and figures.

The text table carries the comparison columns in the order the summary
tables are usually read: precision/recall/F first, then Compression Factor
and Detection Percentage.  All numeric output is formatted with repr-stable
conversions so identical runs produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import fmt9
from .metrics import EvaluationReport
from .model import GroundTruth, KeyFrameSet, VideoTimeline

__all__ = [
    "build_report",
    "format_table",
    "render_figures",
    "write_report_csv",
    "write_report_json",
    "write_report_text",
]

_COLUMNS = (
    ("Precision", "precision", "%.3f"),
    ("Recall", "recall", "%.3f"),
    ("F-value", "f_value", "%.3f"),
    ("Compression Factor", "compression_factor", "%.3f"),
    ("Detection Percentage", "detection_percentage", "%.1f"),
)


def build_report(
    rows: dict[str, EvaluationReport], timeline: VideoTimeline
) -> dict:
    return {
        "frame_rate_fps": timeline.frame_rate_fps,
        "frame_count": timeline.frame_count,
        "rows": [
            {
                "method": name,
                "n_extracted": rep.n_extracted,
                "n_ground_truth": rep.n_ground_truth,
                "n_matched": rep.n_matched,
                "precision": rep.precision,
                "recall": rep.recall,
                "f_value": rep.f_value,
                "compression_factor": rep.compression_factor,
                "detection_percentage": rep.detection_percentage,
                "flags": list(rep.flags),
            }
            for name, rep in rows.items()
        ],
    }


def write_report_json(report: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report, indent=2) + "\n")


def format_table(rows: dict[str, EvaluationReport]) -> str:
    headers = ["Method"] + [c[0] for c in _COLUMNS]
    body = []
    for name, rep in rows.items():
        body.append(
            [name] + [fmt % getattr(rep, attr) for _, attr, fmt in _COLUMNS]
        )
    widths = [
        max(len(headers[i]), *(len(r[i]) for r in body)) if body else len(headers[i])
        for i in range(len(headers))
    ]
    lines = [
        "  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip(),
        "  ".join("-" * w for w in widths),
    ]
    for r in body:
        lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip())
    return "\n".join(lines) + "\n"


def write_report_text(rows: dict[str, EvaluationReport], path: str | Path) -> None:
    Path(path).write_text(format_table(rows))


def write_report_csv(rows: dict[str, EvaluationReport], path: str | Path) -> None:
    lines = [
        "method,n_extracted,n_ground_truth,n_matched,precision,recall,"
        "f_value,compression_factor,detection_percentage,flags"
    ]
    for name, rep in rows.items():
        lines.append(
            ",".join(
                [
                    name,
                    str(rep.n_extracted),
                    str(rep.n_ground_truth),
                    str(rep.n_matched),
                    fmt9(rep.precision),
                    fmt9(rep.recall),
                    fmt9(rep.f_value),
                    fmt9(rep.compression_factor),
                    fmt9(rep.detection_percentage),
                    ";".join(rep.flags),
                ]
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


_SAVEFIG = {"dpi": 120, "metadata": {"Software": "attnsum"}}


def render_figures(
    rows: dict[str, EvaluationReport],
    keyframe_sets: dict[str, KeyFrameSet],
    truth: GroundTruth,
    timeline: VideoTimeline,
    out_dir: str | Path,
) -> list[Path]:
    """Write metrics.png (score bars) and timeline.png (key-frame raster)."""
    out_dir = Path(out_dir)
    paths = []

    fig, ax = plt.subplots(figsize=(7.0, 3.6))
    names = list(rows)
    x = np.arange(len(names))
    for offset, (attr, label) in enumerate(
        (("precision", "precision"), ("recall", "recall"), ("f_value", "F-value"))
    ):
        vals = [getattr(rows[n], attr) for n in names]
        ax.bar(x + (offset - 1) * 0.25, vals, width=0.25, label=label)
    ax.set_xticks(x)
    ax.set_xticklabels(names)
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("score")
    ax.legend(loc="lower right")
    ax.set_title("key-frame scores vs ground truth")
    fig.tight_layout()
    p = out_dir / "metrics.png"
    fig.savefig(p, **_SAVEFIG)
    plt.close(fig)
    paths.append(p)

    fig, ax = plt.subplots(figsize=(7.0, 0.9 + 0.5 * len(keyframe_sets)))
    fps = timeline.frame_rate_fps
    for lo, hi in _truth_spans(truth):
        ax.axvspan(lo / fps, (hi + 1) / fps, color="0.85", zorder=0)
    names = list(keyframe_sets)
    for row, name in enumerate(names):
        t = keyframe_sets[name].frame_indices / fps
        ax.eventplot(t, lineoffsets=row, linelengths=0.8, linewidths=0.6)
    ax.set_yticks(range(len(names)))
    ax.set_yticklabels(names)
    ax.set_xlim(0.0, timeline.frame_count / fps)
    ax.set_xlabel("time (s)")
    ax.set_title("key-frames (shaded: ground-truth events)")
    fig.tight_layout()
    p = out_dir / "timeline.png"
    fig.savefig(p, **_SAVEFIG)
    plt.close(fig)
    paths.append(p)
    return paths


def _truth_spans(truth: GroundTruth) -> list[tuple[int, int]]:
    spans = []
    frames = truth.valid_frames
    if frames.size == 0:
        return spans
    start = prev = int(frames[0])
    for f in frames[1:]:
        f = int(f)
        if f == prev + 1:
            prev = f
            continue
        spans.append((start, prev))
        start = prev = f
    spans.append((start, prev))
    return spans
