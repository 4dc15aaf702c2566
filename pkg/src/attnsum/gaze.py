"""Gaze samples -> fixation-based attention event train.

Pipeline: point velocities -> velocity-threshold classification (fixations
are maximal runs of slow samples) -> duration hysteresis (shorter than 1 s
is saccade-like, longer than 8 s is boredom staring; both are dropped) ->
frame mapping by interval overlap.

Conventions:

* velocity[i] is the angular speed over the segment (i-1, i); the first
  sample copies the second's value and validity;
* a sample's velocity is defined only when both endpoints of its segment
  are valid — blinks therefore break fixation runs;
* a fixation spans its run's first to last sample timestamps, closed on
  both ends, and single-sample runs carry no duration and are discarded;
* the duration gate is a closed interval: exactly 1 s and exactly 8 s both
  survive.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError
from .model import EventTrain, GazeRecording, VideoTimeline

__all__ = [
    "Fixation",
    "IvtSpec",
    "extract_gaze_events",
    "fixations_to_events",
    "hysteresis_filter",
    "ivt_classify",
    "point_velocity",
    "write_fixations",
]


@dataclass(frozen=True)
class IvtSpec:
    velocity_threshold_deg_s: float = 30.0
    min_fix_ms: float = 1000.0
    max_fix_ms: float = 8000.0

    def __post_init__(self):
        if self.velocity_threshold_deg_s <= 0:
            raise ConfigError("velocity threshold must be positive")
        if not 0 < self.min_fix_ms < self.max_fix_ms:
            raise ConfigError(
                f"need 0 < min_fix_ms < max_fix_ms, got "
                f"({self.min_fix_ms}, {self.max_fix_ms})"
            )


@dataclass(frozen=True)
class Fixation:
    start_s: float
    end_s: float
    centroid_deg: tuple[float, float]
    duration_ms: float

    def __post_init__(self):
        if self.duration_ms <= 0:
            raise DataError("fixation duration must be positive")
        if self.duration_ms != (self.end_s - self.start_s) * 1000.0:
            raise DataError("duration_ms inconsistent with start/end")


def point_velocity(rec: GazeRecording) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample angular speed in deg/s, with a per-sample defined mask.

    velocity[i] = sqrt(dx^2 + dy^2) / dt over segment (i-1, i); defined only
    when samples i-1 and i are both valid.  velocity[0] copies velocity[1].
    """
    if int(np.count_nonzero(rec.valid)) < 2:
        raise DataError("need at least 2 valid gaze points")
    n = len(rec)
    v = np.zeros(n, dtype=np.float64)
    defined = np.zeros(n, dtype=bool)
    dx = rec.x_deg[1:] - rec.x_deg[:-1]
    dy = rec.y_deg[1:] - rec.y_deg[:-1]
    dt = rec.t_s[1:] - rec.t_s[:-1]
    v[1:] = np.sqrt(dx * dx + dy * dy) / dt
    defined[1:] = rec.valid[1:] & rec.valid[:-1]
    v[0] = v[1]
    defined[0] = defined[1]
    return v, defined


def ivt_classify(rec: GazeRecording, spec: IvtSpec) -> list[Fixation]:
    """Maximal runs of defined, sub-threshold samples become fixations.

    Centroid is the mean position over the run; runs of a single sample
    have no extent and are dropped.
    """
    v, defined = point_velocity(rec)
    slow = defined & (v < spec.velocity_threshold_deg_s)
    fixations: list[Fixation] = []
    n = len(rec)
    i = 0
    while i < n:
        if not slow[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and slow[j + 1]:
            j += 1
        if j > i:
            start, end = float(rec.t_s[i]), float(rec.t_s[j])
            fixations.append(
                Fixation(
                    start_s=start,
                    end_s=end,
                    centroid_deg=(
                        float(rec.x_deg[i : j + 1].mean()),
                        float(rec.y_deg[i : j + 1].mean()),
                    ),
                    duration_ms=(end - start) * 1000.0,
                )
            )
        i = j + 1
    return fixations


def hysteresis_filter(fixations: list[Fixation], spec: IvtSpec) -> list[Fixation]:
    """Keep fixations with min_fix_ms <= duration <= max_fix_ms (closed)."""
    return [
        f for f in fixations if spec.min_fix_ms <= f.duration_ms <= spec.max_fix_ms
    ]


def fixations_to_events(
    fixations: list[Fixation], timeline: VideoTimeline
) -> EventTrain:
    """Frame i goes active iff some fixation [start, end] overlaps frame i's
    [i/fps, (i+1)/fps) window."""
    fps = timeline.frame_rate_fps
    duration = timeline.duration_s
    active = np.zeros(timeline.frame_count, dtype=bool)
    t_lo = np.arange(timeline.frame_count) / fps
    t_hi = np.arange(1, timeline.frame_count + 1) / fps
    for f in fixations:
        if f.end_s > duration:
            raise DataError(
                f"fixation ending at {f.end_s} s lies beyond the "
                f"{duration} s timeline"
            )
        active |= (t_lo <= f.end_s) & (t_hi > f.start_s)
    return EventTrain(rate_hz=fps, active=active, origin="gaze")


def extract_gaze_events(
    rec: GazeRecording, spec: IvtSpec, timeline: VideoTimeline
) -> EventTrain:
    """Full gaze pipeline: classify, gate by duration, map to frames."""
    kept = hysteresis_filter(ivt_classify(rec, spec), spec)
    return fixations_to_events(kept, timeline)


def write_fixations(fixations: list[Fixation], path: str | Path) -> None:
    """Debug dump of kept fixations."""
    payload = [
        {
            "start_s": f.start_s,
            "end_s": f.end_s,
            "x_deg": f.centroid_deg[0],
            "y_deg": f.centroid_deg[1],
            "duration_ms": f.duration_ms,
        }
        for f in fixations
    ]
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")
