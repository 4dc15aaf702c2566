"""Boolean fusion of attention trains into key-frames.

Electrode trains from one scalp region are ANDed (an event must show on
every electrode of the region to count, suppressing single-channel noise),
the region trains are ORed into one EEG train, and the EEG and gaze trains
are ANDed into the final fused train.  All fusion happens on frame-aligned
trains so the cross-modal AND is well-defined.

An optional dilation radius widens both modalities' trains before the
cross-modal AND, tolerating off-by-a-few-frames misalignment; the default
radius of 0 is a plain per-frame AND.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .model import (
    DEFAULT_MONTAGE,
    EventTrain,
    KeyFrameSet,
    Montage,
    VideoTimeline,
    require_compatible,
)

__all__ = [
    "FusionPlan",
    "dilate",
    "fuse_electrode_trains",
    "fuse_modalities",
    "fuse_region",
    "fuse_regions",
    "region_provenance",
    "to_keyframes",
]


@dataclass(frozen=True)
class FusionPlan:
    """Montage binding plus the cross-modal dilation radius (frames)."""

    montage: Montage = field(default_factory=lambda: DEFAULT_MONTAGE)
    dilation_radius: int = 0

    def __post_init__(self):
        if self.dilation_radius < 0:
            raise DataError("dilation_radius must be >= 0")


def fuse_region(trains: list[EventTrain], region: str) -> EventTrain:
    """Elementwise AND of one region's electrode trains."""
    require_compatible(trains)
    active = trains[0].active.copy()
    for t in trains[1:]:
        active &= t.active
    return EventTrain(rate_hz=trains[0].rate_hz, active=active, origin=region)


def fuse_regions(region_trains: list[EventTrain]) -> EventTrain:
    """Elementwise OR across region trains."""
    require_compatible(region_trains)
    active = region_trains[0].active.copy()
    for t in region_trains[1:]:
        active |= t.active
    return EventTrain(rate_hz=region_trains[0].rate_hz, active=active, origin="eeg-fused")


def dilate(train: EventTrain, radius: int) -> EventTrain:
    """Widen active stretches by ``radius`` frames on each side."""
    if radius < 0:
        raise DataError("radius must be >= 0")
    if radius == 0:
        return train
    active = train.active.copy()
    for idx in np.flatnonzero(train.active):
        lo = max(0, idx - radius)
        active[lo : idx + radius + 1] = True
    return EventTrain(train.rate_hz, active, train.origin)


def fuse_modalities(
    eeg: EventTrain, gaze: EventTrain, dilation_radius: int = 0
) -> EventTrain:
    """Cross-modal AND (after optional dilation of both sides)."""
    require_compatible([eeg, gaze])
    a = dilate(eeg, dilation_radius)
    b = dilate(gaze, dilation_radius)
    return EventTrain(rate_hz=eeg.rate_hz, active=a.active & b.active, origin="fused")


def fuse_electrode_trains(
    trains_by_label: dict[str, EventTrain], plan: FusionPlan
) -> tuple[EventTrain, dict[str, EventTrain]]:
    """AND within each montage region, OR across regions.

    Every supplied train must belong to exactly one region of the plan's
    montage.  Returns the combined EEG train and the per-region trains.
    """
    regions: dict[str, list[EventTrain]] = {}
    for label, train in trains_by_label.items():
        region = plan.montage.region_of(label)  # KeyError on foreign labels
        regions.setdefault(region, []).append(train)
    if not regions:
        raise DataError("no electrode trains to fuse")
    region_trains = {
        region: fuse_region(trains, region) for region, trains in regions.items()
    }
    return fuse_regions(list(region_trains.values())), region_trains


def region_provenance(
    region_trains: dict[str, EventTrain],
) -> dict[int, tuple[str, ...]]:
    """For each frame where any region fires, the regions that fired."""
    out: dict[int, tuple[str, ...]] = {}
    for region, train in region_trains.items():
        for idx in np.flatnonzero(train.active):
            key = int(idx)
            out[key] = out.get(key, ()) + (region,)
    return out


def to_keyframes(
    fused: EventTrain,
    timeline: VideoTimeline,
    provenance: dict[int, tuple[str, ...]] | None = None,
) -> KeyFrameSet:
    """Active frames of a frame-aligned train become the key-frame set."""
    if fused.rate_hz != timeline.frame_rate_fps:
        raise DataError(
            f"train rate {fused.rate_hz} Hz != frame rate {timeline.frame_rate_fps}"
        )
    if len(fused) != timeline.frame_count:
        raise DataError(
            f"train length {len(fused)} != frame count {timeline.frame_count}"
        )
    indices = np.flatnonzero(fused.active)
    kept = None
    if provenance is not None:
        kept = {int(i): provenance[int(i)] for i in indices if int(i) in provenance}
    return KeyFrameSet(frame_indices=indices, timeline=timeline, provenance=kept)
