"""Core domain types and the shared time-base alignment.

Everything downstream (EEG pipeline, gaze pipeline, fusion, metrics) trades
in these types.  All of them are immutable after construction: numpy arrays
are copied in and marked read-only, so instances are safe to share across
threads.

Time conventions used throughout the package:

* recordings are synchronized to the video: t = 0 is the first video frame;
* frame ``i`` of a timeline covers the half-open interval
  ``[i / fps, (i + 1) / fps)``;
* sample ``j`` of an :class:`EventTrain` carries the point timestamp
  ``j / rate_hz``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, InvariantError

__all__ = [
    "ChannelSeries",
    "EegRecording",
    "EventTrain",
    "GazePoint",
    "GazeRecording",
    "GroundTruth",
    "KeyFrameSet",
    "Montage",
    "VideoTimeline",
    "DEFAULT_MONTAGE",
    "align_to_frames",
]


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Montage:
    """Assignment of electrode labels to named scalp regions.

    Region membership drives fusion (AND within a region, OR across regions)
    and defines the set of labels ingestion will accept.
    """

    regions: dict[str, tuple[str, ...]]

    def __post_init__(self):
        seen: dict[str, str] = {}
        for region, labels in self.regions.items():
            if not labels:
                raise DataError(f"montage region '{region}' has no electrodes")
            for label in labels:
                if label in seen:
                    raise DataError(
                        f"electrode '{label}' appears in regions "
                        f"'{seen[label]}' and '{region}'"
                    )
                seen[label] = region
        object.__setattr__(self, "regions", {r: tuple(ls) for r, ls in self.regions.items()})

    @property
    def labels(self) -> tuple[str, ...]:
        """All electrode labels, in region order."""
        return tuple(l for labels in self.regions.values() for l in labels)

    def region_of(self, label: str) -> str:
        for region, labels in self.regions.items():
            if label in labels:
                return region
        raise KeyError(f"electrode '{label}' not in montage")


#: Electrode set that carries visual-attention activity, grouped by region.
DEFAULT_MONTAGE = Montage(
    {
        "occipital": ("OZ", "O1", "O2"),
        "frontal": ("F1", "F2", "F3", "F4", "F5", "F6", "F7"),
        "prefrontal": ("Fp1", "Fp2"),
        "anterior-frontal": ("AF3", "AF4", "AF7", "AF8"),
    }
)


@dataclass(frozen=True)
class ChannelSeries:
    """One electrode's voltage series, in microvolts."""

    label: str
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise DataError(f"channel '{self.label}': samples must be 1-D")
        if not np.all(np.isfinite(samples)):
            bad = int(np.flatnonzero(~np.isfinite(samples))[0])
            raise DataError(
                f"channel '{self.label}': non-finite sample at index {bad}"
            )
        object.__setattr__(self, "samples", _readonly(samples))

    def __len__(self) -> int:
        return self.samples.shape[0]


@dataclass(frozen=True)
class EegRecording:
    """Multi-channel EEG recording on a common sample clock."""

    sample_rate_hz: float
    channels: tuple[ChannelSeries, ...]
    start_time_s: float = 0.0
    duration_s: float = field(default=0.0)

    def __post_init__(self):
        if self.sample_rate_hz <= 0:
            raise DataError("sample_rate_hz must be positive")
        if not self.channels:
            raise DataError("recording has no channels")
        object.__setattr__(self, "channels", tuple(self.channels))
        n = len(self.channels[0])
        for ch in self.channels:
            if len(ch) != n:
                raise DataError(
                    f"channel '{ch.label}' has {len(ch)} samples, expected {n}"
                )
        labels = [ch.label for ch in self.channels]
        if len(set(labels)) != len(labels):
            dup = next(l for l in labels if labels.count(l) > 1)
            raise DataError(f"duplicate channel label '{dup}'")
        duration = self.duration_s if self.duration_s else n / self.sample_rate_hz
        if round(duration * self.sample_rate_hz) != n:
            raise DataError(
                f"duration {duration} s at {self.sample_rate_hz} Hz does not "
                f"match channel length {n}"
            )
        object.__setattr__(self, "duration_s", duration)

    @property
    def n_samples(self) -> int:
        return len(self.channels[0])

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(ch.label for ch in self.channels)

    def channel(self, label: str) -> ChannelSeries:
        for ch in self.channels:
            if ch.label == label:
                return ch
        raise KeyError(f"no channel '{label}'")

    def scaled(self, factor: float) -> "EegRecording":
        """Copy with every sample multiplied by ``factor``."""
        return EegRecording(
            sample_rate_hz=self.sample_rate_hz,
            channels=tuple(
                ChannelSeries(ch.label, ch.samples * factor) for ch in self.channels
            ),
            start_time_s=self.start_time_s,
            duration_s=self.duration_s,
        )


@dataclass(frozen=True)
class GazePoint:
    """Single gaze sample; position is meaningless when ``valid`` is False."""

    t_s: float
    x_deg: float
    y_deg: float
    valid: bool


@dataclass(frozen=True)
class GazeRecording:
    """Timestamped gaze samples.  Invalid samples are retained, not dropped."""

    sample_rate_hz: float
    t_s: np.ndarray
    x_deg: np.ndarray
    y_deg: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        if self.sample_rate_hz <= 0:
            raise DataError("sample_rate_hz must be positive")
        t = np.asarray(self.t_s, dtype=np.float64)
        if t.ndim != 1 or t.size == 0:
            raise DataError("gaze recording needs at least one sample")
        if np.any(np.diff(t) <= 0):
            # 1-based data-row number of the sample that breaks the order
            bad = int(np.flatnonzero(np.diff(t) <= 0)[0]) + 2
            raise DataError(f"gaze timestamps not strictly increasing at row {bad}")
        for name in ("t_s", "x_deg", "y_deg"):
            object.__setattr__(
                self, name, _readonly(np.asarray(getattr(self, name), dtype=np.float64))
            )
        object.__setattr__(self, "valid", _readonly(np.asarray(self.valid, dtype=bool)))
        if not (self.t_s.shape == self.x_deg.shape == self.y_deg.shape == self.valid.shape):
            raise DataError("gaze field lengths differ")

    @classmethod
    def from_points(cls, sample_rate_hz: float, points: list[GazePoint]) -> "GazeRecording":
        return cls(
            sample_rate_hz=sample_rate_hz,
            t_s=np.array([p.t_s for p in points]),
            x_deg=np.array([p.x_deg for p in points]),
            y_deg=np.array([p.y_deg for p in points]),
            valid=np.array([p.valid for p in points]),
        )

    @property
    def points(self) -> list[GazePoint]:
        return [
            GazePoint(float(t), float(x), float(y), bool(v))
            for t, x, y, v in zip(self.t_s, self.x_deg, self.y_deg, self.valid)
        ]

    def __len__(self) -> int:
        return self.t_s.shape[0]


@dataclass(frozen=True)
class VideoTimeline:
    """Frame grid of the stimulus video; frame i covers [i/fps, (i+1)/fps)."""

    frame_rate_fps: float
    frame_count: int

    def __post_init__(self):
        if self.frame_rate_fps <= 0:
            raise DataError("frame_rate_fps must be positive")
        if self.frame_count <= 0:
            raise DataError("frame_count must be positive")

    @property
    def duration_s(self) -> float:
        return self.frame_count / self.frame_rate_fps


@dataclass(frozen=True)
class EventTrain:
    """Boolean attention series at a declared rate.

    The universal intermediate currency of the pipeline: per-electrode
    trains, per-region trains, the gaze train and the fused train are all
    EventTrains.  ``origin`` records where the train came from (electrode
    label, region name, "gaze", "eeg-fused" or "fused").
    """

    rate_hz: float
    active: np.ndarray
    origin: str

    def __post_init__(self):
        if self.rate_hz <= 0:
            raise DataError("rate_hz must be positive")
        active = np.asarray(self.active)
        if active.dtype != np.bool_:
            raise DataError("active must be a boolean series")
        if active.ndim != 1:
            raise DataError("active must be 1-D")
        object.__setattr__(self, "active", _readonly(active))

    def __len__(self) -> int:
        return self.active.shape[0]

    @property
    def n_active(self) -> int:
        return int(np.count_nonzero(self.active))

    def with_origin(self, origin: str) -> "EventTrain":
        return EventTrain(self.rate_hz, self.active, origin)


def require_compatible(trains: list[EventTrain] | tuple[EventTrain, ...]) -> None:
    """Boolean algebra needs equal rates and equal lengths; raise otherwise."""
    if not trains:
        raise DataError("no event trains given")
    first = trains[0]
    for t in trains[1:]:
        if t.rate_hz != first.rate_hz:
            raise DataError(
                f"rate mismatch: {t.origin} at {t.rate_hz} Hz vs "
                f"{first.origin} at {first.rate_hz} Hz"
            )
        if len(t) != len(first):
            raise DataError(
                f"length mismatch: {t.origin} has {len(t)} samples vs "
                f"{first.origin} with {len(first)}"
            )


@dataclass(frozen=True)
class KeyFrameSet:
    """Frames selected into the summary, with optional per-frame provenance."""

    frame_indices: np.ndarray
    timeline: VideoTimeline
    provenance: dict[int, tuple[str, ...]] | None = None

    def __post_init__(self):
        idx = np.asarray(self.frame_indices, dtype=np.int64)
        idx = np.unique(idx)
        if idx.size and (idx[0] < 0 or idx[-1] >= self.timeline.frame_count):
            raise DataError(
                f"frame index {int(idx[-1] if idx[-1] >= self.timeline.frame_count else idx[0])} "
                f"outside timeline of {self.timeline.frame_count} frames"
            )
        object.__setattr__(self, "frame_indices", _readonly(idx))

    def __len__(self) -> int:
        return self.frame_indices.shape[0]


@dataclass(frozen=True)
class GroundTruth:
    """Expert-labeled valid frames for a given timeline length."""

    valid_frames: np.ndarray
    frame_count: int

    def __post_init__(self):
        idx = np.unique(np.asarray(self.valid_frames, dtype=np.int64))
        if idx.size and (idx[0] < 0 or idx[-1] >= self.frame_count):
            raise DataError(
                f"ground-truth frame {int(idx[-1])} outside {self.frame_count} frames"
            )
        object.__setattr__(self, "valid_frames", _readonly(idx))

    def __len__(self) -> int:
        return self.valid_frames.shape[0]


def align_to_frames(train: EventTrain, timeline: VideoTimeline) -> EventTrain:
    """Downsample an event train onto the video frame grid by OR-pooling.

    Frame i goes active iff any source sample whose timestamp falls inside
    [i/fps, (i+1)/fps) is active, so no detected event is ever dropped.
    Sample j's timestamp is j / rate_hz, i.e. its frame is
    floor(j * fps / rate_hz) — computed as ``(j * fps) / rate`` so the
    quotient is exact whenever the two rates are commensurate (83 -> 83,
    2500 -> 83, ...).  Samples past the end of the timeline fall in no
    frame and are ignored.
    """
    fps = timeline.frame_rate_fps
    if train.rate_hz < fps:
        raise DataError(
            f"cannot upsample: train at {train.rate_hz} Hz is slower than "
            f"{fps} fps"
        )
    out = np.zeros(timeline.frame_count, dtype=bool)
    src = np.flatnonzero(train.active)
    if src.size:
        frames = ((src * fps) / train.rate_hz).astype(np.int64)
        frames = frames[frames < timeline.frame_count]
        out[frames] = True
    result = EventTrain(rate_hz=fps, active=out, origin=train.origin)
    if len(result) != timeline.frame_count:
        raise InvariantError("frame-aligned train length != frame_count")
    return result
