"""End-to-end extraction: recordings in, fused key-frame set out.

Per-channel EEG work (filter + scalogram + threshold) runs on a thread
pool — the FFT work releases the GIL — but results are reduced strictly in
recording channel order, so parallelism never changes the output.
"""

from __future__ import annotations

import os
from contextlib import contextmanager
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .config import PipelineConfig
from .eeg import extract_channel_events
from .errors import ConfigError, DataError
from .fusion import (
    FusionPlan,
    fuse_electrode_trains,
    fuse_modalities,
    region_provenance,
    to_keyframes,
)
from .gaze import extract_gaze_events
from .model import (
    EegRecording,
    EventTrain,
    GazeRecording,
    KeyFrameSet,
    VideoTimeline,
)

__all__ = ["ExtractionResult", "run_extraction", "stage", "timeline_for"]


@contextmanager
def stage(name: str):
    """Prefix any pipeline error with the stage that raised it."""
    try:
        yield
    except ConfigError as exc:
        raise ConfigError(f"{name}: {exc}") from None
    except DataError as exc:
        raise DataError(f"{name}: {exc}") from None


@dataclass(frozen=True)
class ExtractionResult:
    per_electrode: dict[str, EventTrain]
    per_region: dict[str, EventTrain]
    eeg_fused: EventTrain
    gaze: EventTrain
    fused: EventTrain
    keyframes: KeyFrameSet


def timeline_for(config: PipelineConfig, rec: EegRecording) -> VideoTimeline:
    """Config-declared frame count, or one derived from the EEG duration."""
    if config.frame_count is not None:
        return VideoTimeline(config.fps, config.frame_count)
    return VideoTimeline(config.fps, int(round(rec.duration_s * config.fps)))


def run_extraction(
    rec: EegRecording,
    gaze: GazeRecording,
    timeline: VideoTimeline,
    config: PipelineConfig,
) -> ExtractionResult:
    with stage("eeg-attention"):
        config.bandpass.validate_for(rec.sample_rate_hz)
        cwt_spec = config.cwt.spec_for(rec.sample_rate_hz)
        workers = min(len(rec.channels), os.cpu_count() or 1, 8)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(
                    extract_channel_events,
                    ch,
                    rec.sample_rate_hz,
                    timeline,
                    config.bandpass,
                    cwt_spec,
                    config.threshold,
                )
                for ch in rec.channels
            ]
            per_electrode = {
                ch.label: f.result() for ch, f in zip(rec.channels, futures)
            }

    with stage("gaze-attention"):
        gaze_train = extract_gaze_events(gaze, config.ivt, timeline)

    with stage("fusion"):
        plan = FusionPlan(
            montage=config.montage, dilation_radius=config.dilation_radius
        )
        eeg_fused, per_region = fuse_electrode_trains(per_electrode, plan)
        fused = fuse_modalities(
            eeg_fused, gaze_train, dilation_radius=config.dilation_radius
        )
        keyframes = to_keyframes(fused, timeline, region_provenance(per_region))

    return ExtractionResult(
        per_electrode=per_electrode,
        per_region=per_region,
        eeg_fused=eeg_fused,
        gaze=gaze_train,
        fused=fused,
        keyframes=keyframes,
    )
