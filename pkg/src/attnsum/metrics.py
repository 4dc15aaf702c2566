"""Evaluation of a key-frame set against expert-labeled ground truth.

    precision = n_matched / n_extracted
    recall    = n_matched / n_ground_truth
    f_value   = 2PR / (P + R)
    compression_factor   = 1 - n_extracted / frame_count
    detection_percentage = 100 * n_matched / n_extracted

All ratios are computed in exact rational arithmetic and converted to
float once, so quantities like 1 - 420/12000 come out as exactly 0.965.
Zero denominators do not raise: they yield 0 and a flag ("no-extraction"
for an empty key-frame set, "empty-truth" for empty ground truth).

Matching is exact frame-index equality by default.  A tolerance radius
(in frames) switches to one-to-one nearest matching: each extracted frame
pairs with at most one ground-truth frame within the radius.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import DataError
from .model import GroundTruth, KeyFrameSet, VideoTimeline

__all__ = [
    "EvaluationReport",
    "ablation_report",
    "compression_factor",
    "evaluate",
    "match_count",
]


@dataclass(frozen=True)
class EvaluationReport:
    n_matched: int
    n_extracted: int
    n_ground_truth: int
    precision: float
    recall: float
    f_value: float
    compression_factor: float
    detection_percentage: float
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if not (self.n_matched <= self.n_extracted and self.n_matched <= self.n_ground_truth):
            raise DataError("matched count exceeds extracted or ground-truth count")


def compression_factor(n_extracted: int, frame_count: int) -> float:
    """Fraction of the video removed: 1 - extracted/total, computed exactly."""
    if frame_count <= 0:
        raise DataError("frame_count must be positive")
    if not 0 <= n_extracted <= frame_count:
        raise DataError(f"n_extracted {n_extracted} outside [0, {frame_count}]")
    return float(1 - Fraction(n_extracted, frame_count))


def match_count(extracted: list[int], truth: list[int], tolerance_frames: int = 0) -> int:
    """One-to-one matches between two sorted frame lists within a radius.

    Radius 0 is plain set intersection.  For positive radius, walk both
    lists in order and pair the earliest compatible frames — on a line
    this greedy pairing is maximal.
    """
    if tolerance_frames == 0:
        return len(set(extracted) & set(truth))
    i = j = matched = 0
    while i < len(extracted) and j < len(truth):
        if abs(extracted[i] - truth[j]) <= tolerance_frames:
            matched += 1
            i += 1
            j += 1
        elif extracted[i] < truth[j] - tolerance_frames:
            i += 1
        else:
            j += 1
    return matched


def evaluate(
    keyframes: KeyFrameSet,
    truth: GroundTruth,
    timeline: VideoTimeline,
    tolerance_frames: int = 0,
) -> EvaluationReport:
    """Score a key-frame set against ground truth on a shared timeline."""
    if keyframes.timeline.frame_count != timeline.frame_count:
        raise DataError(
            f"keyframes timeline has {keyframes.timeline.frame_count} frames, "
            f"expected {timeline.frame_count}"
        )
    if truth.frame_count != timeline.frame_count:
        raise DataError(
            f"ground truth covers {truth.frame_count} frames, "
            f"expected {timeline.frame_count}"
        )
    if tolerance_frames < 0:
        raise DataError("tolerance_frames must be >= 0")

    n_extracted = len(keyframes)
    n_truth = len(truth)
    n_matched = match_count(
        [int(i) for i in keyframes.frame_indices],
        [int(i) for i in truth.valid_frames],
        tolerance_frames,
    )

    flags: list[str] = []
    if n_extracted == 0:
        precision = Fraction(0)
        detection = Fraction(0)
        flags.append("no-extraction")
    else:
        precision = Fraction(n_matched, n_extracted)
        detection = 100 * precision
    if n_truth == 0:
        recall = Fraction(0)
        flags.append("empty-truth")
    else:
        recall = Fraction(n_matched, n_truth)
    if precision + recall == 0:
        f_value = Fraction(0)
    else:
        f_value = 2 * precision * recall / (precision + recall)

    return EvaluationReport(
        n_matched=n_matched,
        n_extracted=n_extracted,
        n_ground_truth=n_truth,
        precision=float(precision),
        recall=float(recall),
        f_value=float(f_value),
        compression_factor=compression_factor(n_extracted, timeline.frame_count),
        detection_percentage=float(detection),
        flags=tuple(flags),
    )


def ablation_report(
    eeg_only: KeyFrameSet,
    gaze_only: KeyFrameSet,
    fused: KeyFrameSet,
    truth: GroundTruth,
    timeline: VideoTimeline,
    tolerance_frames: int = 0,
) -> dict[str, EvaluationReport]:
    """Single-modality vs. combined scores, in EEG / ET / EEG+ET order."""
    return {
        "EEG": evaluate(eeg_only, truth, timeline, tolerance_frames),
        "ET": evaluate(gaze_only, truth, timeline, tolerance_frames),
        "EEG+ET": evaluate(fused, truth, timeline, tolerance_frames),
    }
