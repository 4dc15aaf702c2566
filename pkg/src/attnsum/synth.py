"""Synthetic recordings with a planted, exactly-known attention timeline.

Stands in for the human experiment: EEG channels are 1/f-shaped background
noise plus band-limited oscillatory bursts during the planted events; gaze
dwells on a point during events and jumps saccadically in between, with
occasional over-long dwells to exercise the boredom gate; frame features
are piecewise-constant histograms with planted scene cuts.

Everything is deterministic given the plan's seed.  Sub-generators are
derived as SeedSequence([seed, stream, index]) with streams 0 = EEG
channel (index = position in montage label order), 1 = gaze, 2 = frames,
3 = shared event parameters — so channels can be generated in parallel
without changing the output.

SNR is band-referenced: snr_db compares the burst's power to the noise
power inside burst_band_hz, per channel.  Each event uses one sinusoid at
a band-interior frequency shared by all channels, with per-channel phase;
the amplitude is set from the channel's measured in-band noise power, so
the planted ratio is exact by construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .model import (
    DEFAULT_MONTAGE,
    ChannelSeries,
    EegRecording,
    GazeRecording,
    GroundTruth,
    Montage,
    VideoTimeline,
)

__all__ = [
    "SynthPlan",
    "band_power",
    "full_cap_montage",
    "plan_to_truth",
    "read_plan",
    "synth_eeg",
    "synth_frames",
    "synth_gaze",
    "write_plan",
]

_STREAM_EEG, _STREAM_GAZE, _STREAM_FRAMES, _STREAM_EVENTS = 0, 1, 2, 3


@dataclass(frozen=True)
class SynthPlan:
    duration_s: float
    events: tuple[tuple[float, float], ...]
    eeg_rate_hz: float = 2500.0
    gaze_rate_hz: float = 100.0
    fps: float = 83.0
    burst_band_hz: tuple[float, float] = (20.0, 40.0)
    snr_db: float = 10.0
    seed: int = 0
    scene_cuts: tuple[float, ...] = ()

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ConfigError("duration_s must be positive")
        for rate in (self.eeg_rate_hz, self.gaze_rate_hz, self.fps):
            if rate <= 0:
                raise ConfigError("rates must be positive")
        events = tuple((float(s), float(e)) for s, e in self.events)
        for s, e in events:
            if not 0 <= s < e <= self.duration_s:
                raise ConfigError(f"event [{s}, {e}] outside [0, {self.duration_s}]")
        for (_, e1), (s2, _) in zip(events, events[1:]):
            if e1 >= s2:
                raise ConfigError("events must be disjoint and sorted")
        object.__setattr__(self, "events", events)
        lo, hi = self.burst_band_hz
        if not 0 < lo < hi < self.eeg_rate_hz / 2:
            raise ConfigError(f"burst band ({lo}, {hi}) invalid at {self.eeg_rate_hz} Hz")
        object.__setattr__(self, "burst_band_hz", (float(lo), float(hi)))
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        cuts = tuple(float(c) for c in self.scene_cuts)
        if any(not 0 < c < self.duration_s for c in cuts):
            raise ConfigError("scene cuts must lie strictly inside the duration")
        if any(a >= b for a, b in zip(cuts, cuts[1:])):
            raise ConfigError("scene cuts must be strictly increasing")
        object.__setattr__(self, "scene_cuts", cuts)

    def timeline(self) -> VideoTimeline:
        return VideoTimeline(self.fps, int(round(self.duration_s * self.fps)))

    def rng(self, stream: int, index: int = 0) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.seed, stream, index]))


_PLAN_KEYS = {
    "duration_s",
    "events",
    "eeg_rate_hz",
    "gaze_rate_hz",
    "fps",
    "burst_band_hz",
    "snr_db",
    "seed",
    "scene_cuts",
}


def read_plan(path: str | Path) -> SynthPlan:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"plan not found: {path}")
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: plan must be a JSON object")
    unknown = set(obj) - _PLAN_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown plan keys {sorted(unknown)}")
    if "duration_s" not in obj or "events" not in obj:
        raise ConfigError(f"{path}: plan needs duration_s and events")
    kwargs = dict(obj)
    kwargs["events"] = tuple(tuple(ev) for ev in obj["events"])
    if "burst_band_hz" in kwargs:
        kwargs["burst_band_hz"] = tuple(kwargs["burst_band_hz"])
    if "scene_cuts" in kwargs:
        kwargs["scene_cuts"] = tuple(kwargs["scene_cuts"])
    try:
        return SynthPlan(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def write_plan(plan: SynthPlan, path: str | Path) -> None:
    payload = {
        "duration_s": plan.duration_s,
        "events": [list(ev) for ev in plan.events],
        "eeg_rate_hz": plan.eeg_rate_hz,
        "gaze_rate_hz": plan.gaze_rate_hz,
        "fps": plan.fps,
        "burst_band_hz": list(plan.burst_band_hz),
        "snr_db": plan.snr_db,
        "seed": plan.seed,
        "scene_cuts": list(plan.scene_cuts),
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def full_cap_montage() -> Montage:
    """The default regions plus a 48-electrode inactive rest-of-scalp region
    (64 labels total)."""
    rest = (
        "AFz", "Fpz", "Fz", "F8", "F9", "F10",
        "FT7", "FC5", "FC3", "FC1", "FCz", "FC2", "FC4", "FC6", "FT8",
        "T7", "C5", "C3", "C1", "Cz", "C2", "C4", "C6", "T8",
        "TP7", "CP5", "CP3", "CP1", "CPz", "CP2", "CP4", "CP6", "TP8",
        "P7", "P5", "P3", "P1", "Pz", "P2", "P4", "P6", "P8",
        "PO7", "PO3", "POz", "PO4", "PO8", "Iz",
    )
    regions = dict(DEFAULT_MONTAGE.regions)
    regions["central-parietal"] = rest
    return Montage(regions)


def _pink_noise(n: int, rng: np.random.Generator) -> np.ndarray:
    """1/f-shaped noise, unit sample standard deviation, zero DC."""
    white = rng.standard_normal(n)
    spectrum = np.fft.rfft(white)
    k = np.arange(spectrum.shape[0], dtype=np.float64)
    shape = np.zeros_like(k)
    shape[1:] = k[1:] ** -0.5
    x = np.fft.irfft(spectrum * shape, n)
    return x / x.std()


def band_power(x: np.ndarray, fs: float, lo: float, hi: float) -> float:
    """Mean power of x carried by frequencies in [lo, hi]."""
    n = x.shape[0]
    spectrum = np.fft.rfft(x)
    freqs = np.fft.rfftfreq(n, 1.0 / fs)
    sel = (freqs >= lo) & (freqs <= hi)
    return float(2.0 * np.sum(np.abs(spectrum[sel]) ** 2) / n**2)


def _event_params(plan: SynthPlan) -> list[tuple[float, float, float]]:
    """(start, end, frequency) per event; frequencies shared by channels."""
    rng = plan.rng(_STREAM_EVENTS)
    lo, hi = plan.burst_band_hz
    return [(s, e, float(rng.uniform(lo, hi))) for s, e in plan.events]


def synth_eeg(
    plan: SynthPlan,
    montage: Montage | None = None,
    active_regions: tuple[str, ...] | None = None,
) -> EegRecording:
    """Noise-plus-bursts recording over the montage.

    ``active_regions`` limits which regions receive bursts (None = all).
    An infinite snr_db drops the noise term entirely, leaving channels
    exactly zero outside events.
    """
    montage = montage if montage is not None else DEFAULT_MONTAGE
    if active_regions is None:
        active = set(montage.regions)
    else:
        active = set(active_regions)
        unknown = active - set(montage.regions)
        if unknown:
            raise ConfigError(f"active regions {sorted(unknown)} not in montage")
    n = int(round(plan.duration_s * plan.eeg_rate_hz))
    t = np.arange(n) / plan.eeg_rate_hz
    noiseless = math.isinf(plan.snr_db)
    events = _event_params(plan)
    lo, hi = plan.burst_band_hz

    channels = []
    for idx, label in enumerate(montage.labels):
        rng = plan.rng(_STREAM_EEG, idx)
        if noiseless:
            x = np.zeros(n)
            amp = 1.0
        else:
            x = _pink_noise(n, rng)
            noise_band = band_power(x, plan.eeg_rate_hz, lo, hi)
            amp = math.sqrt(2.0 * noise_band * 10.0 ** (plan.snr_db / 10.0))
        if montage.region_of(label) in active:
            for start, end, freq in events:
                phase = float(rng.uniform(0.0, 2.0 * math.pi))
                mask = (t >= start) & (t <= end)
                x = x + amp * mask * np.sin(2.0 * math.pi * freq * t + phase)
        channels.append(ChannelSeries(label, x))
    return EegRecording(plan.eeg_rate_hz, tuple(channels))


def _auto_dwells(plan: SynthPlan, min_gap_s: float = 11.0, dwell_s: float = 9.0):
    """A boredom dwell centered in every event-free gap long enough for one."""
    edges = [0.0] + [e for ev in plan.events for e in ev] + [plan.duration_s]
    dwells = []
    for gap_lo, gap_hi in zip(edges[::2], edges[1::2]):
        if gap_hi - gap_lo >= min_gap_s:
            mid = (gap_lo + gap_hi) / 2.0
            dwells.append((mid - dwell_s / 2.0, mid + dwell_s / 2.0))
    return dwells


def synth_gaze(
    plan: SynthPlan,
    fixation_jitter_deg: float = 0.03,
    boredom_dwells: list[tuple[float, float]] | None = None,
) -> GazeRecording:
    """Dwell-during-events, saccade-elsewhere gaze trace.

    During events (and planted boredom dwells) the gaze holds an anchor
    point with bounded jitter, keeping sample-to-sample velocity under
    10 deg/s; elsewhere every sample jumps by 1.5–3 deg, keeping velocity
    above 100 deg/s.  ``boredom_dwells`` defaults to one 9 s dwell in each
    event-free gap of at least 11 s (pass [] to disable).
    """
    if fixation_jitter_deg < 0:
        raise ConfigError("fixation_jitter_deg must be >= 0")
    if fixation_jitter_deg * plan.gaze_rate_hz * 2 * math.sqrt(2) >= 10.0:
        raise ConfigError(
            f"jitter {fixation_jitter_deg} deg allows velocities >= 10 deg/s "
            f"at {plan.gaze_rate_hz} Hz"
        )
    dwells = _auto_dwells(plan) if boredom_dwells is None else list(boredom_dwells)
    for ds, de in dwells:
        if not 0 <= ds < de <= plan.duration_s:
            raise ConfigError(f"dwell [{ds}, {de}] outside the recording")
        for s, e in plan.events:
            if ds <= e and de >= s:
                raise ConfigError(f"dwell [{ds}, {de}] overlaps event [{s}, {e}]")

    rng = plan.rng(_STREAM_GAZE)
    n = int(round(plan.duration_s * plan.gaze_rate_hz))
    t = np.arange(n) / plan.gaze_rate_hz

    # -1 = saccade; 0.. = hold segment (events then dwells)
    holds = [(s, e) for s, e in plan.events] + dwells
    segment = np.full(n, -1, dtype=np.int64)
    for k, (s, e) in enumerate(holds):
        segment[(t >= s) & (t <= e)] = k
    anchors = rng.uniform(-15.0, 15.0, size=(max(len(holds), 1), 2))

    x = np.empty(n)
    y = np.empty(n)
    pos = rng.uniform(-15.0, 15.0, size=2)
    for i in range(n):
        k = segment[i]
        if k >= 0:
            jx, jy = rng.uniform(-fixation_jitter_deg, fixation_jitter_deg, size=2)
            x[i], y[i] = anchors[k, 0] + jx, anchors[k, 1] + jy
            pos = np.array([x[i], y[i]])
        else:
            step_len = rng.uniform(1.5, 3.0)
            theta = rng.uniform(0.0, 2.0 * math.pi)
            pos = pos + step_len * np.array([math.cos(theta), math.sin(theta)])
            # wrap into the +-25 deg field of view; a wrap only makes the
            # coordinate jump larger, never below the saccade floor
            pos = np.mod(pos + 25.0, 50.0) - 25.0
            x[i], y[i] = pos
    return GazeRecording(
        sample_rate_hz=plan.gaze_rate_hz,
        t_s=t,
        x_deg=x,
        y_deg=y,
        valid=np.ones(n, dtype=bool),
    )


def synth_frames(
    plan: SynthPlan,
    scene_cuts: tuple[float, ...] | None = None,
    n_bins: int = 64,
    frame_noise: float = 0.001,
):
    """Per-frame color histograms, piecewise-constant per scene.

    Each scene concentrates 80% of its mass on its own bin block, so
    adjacent scenes sit far apart in L1 while frames within a scene differ
    only by small noise.  Returns a list of FrameFeatures.
    """
    from .baselines import FrameFeatures

    cuts = plan.scene_cuts if scene_cuts is None else tuple(scene_cuts)
    for c in cuts:
        if not 0 < c < plan.duration_s:
            raise ConfigError(f"scene cut {c} outside the duration")
    rng = plan.rng(_STREAM_FRAMES)
    timeline = plan.timeline()
    n_frames = timeline.frame_count
    boundaries = [int((c * plan.fps) // 1) for c in cuts]
    n_scenes = len(boundaries) + 1

    n_blocks = max(n_bins // 16, 2)
    bases = np.empty((n_scenes, n_bins))
    for s in range(n_scenes):
        block = s % n_blocks
        width = n_bins // n_blocks
        base = np.zeros(n_bins)
        base[block * width : (block + 1) * width] = 0.8 / width
        base += 0.2 * rng.dirichlet(np.full(n_bins, 0.5))
        bases[s] = base

    scene_of = np.zeros(n_frames, dtype=np.int64)
    for b in boundaries:
        scene_of[b:] += 1

    features = []
    for i in range(n_frames):
        hist = bases[scene_of[i]] + rng.uniform(0.0, frame_noise, size=n_bins)
        hist /= hist.sum()
        features.append(FrameFeatures(index=i, histogram=hist))
    return features


def plan_to_truth(plan: SynthPlan) -> GroundTruth:
    """Frames overlapping any planted event are the valid frames."""
    timeline = plan.timeline()
    fps = timeline.frame_rate_fps
    t_lo = np.arange(timeline.frame_count) / fps
    t_hi = np.arange(1, timeline.frame_count + 1) / fps
    mask = np.zeros(timeline.frame_count, dtype=bool)
    for s, e in plan.events:
        mask |= (t_lo <= e) & (t_hi > s)
    return GroundTruth(
        valid_frames=np.flatnonzero(mask), frame_count=timeline.frame_count
    )
