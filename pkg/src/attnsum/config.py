"""Single-file JSON configuration for the batch pipeline.

Every tunable lives in one config file split into sections, each backed by
the spec class that validates it.  Loading materializes all defaults, so
the effective configuration (what actually ran) can be dumped next to the
outputs for auditing.  Paths are resolved relative to the config file.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .baselines import HistogramSpec
from .eeg import BandpassSpec, CwtSpec, ThresholdSpec
from .errors import AttnsumError, ConfigError
from .gaze import IvtSpec
from .model import DEFAULT_MONTAGE, Montage

__all__ = [
    "CwtParams",
    "KmeansParams",
    "PipelineConfig",
    "effective_dict",
    "load_config",
    "write_effective",
]


@dataclass(frozen=True)
class CwtParams:
    """Scale-grid parameters; the actual CwtSpec needs the sample rate."""

    low_hz: float = 12.0
    high_hz: float = 50.0
    n_scales: int = 32
    fc: float = 1.0
    window_s: float | None = None

    def __post_init__(self):
        if not 0 < self.low_hz < self.high_hz:
            raise ConfigError(f"need 0 < low_hz < high_hz, got ({self.low_hz}, {self.high_hz})")
        if self.n_scales < 2:
            raise ConfigError("need at least 2 scales")
        if self.fc <= 0:
            raise ConfigError("fc must be positive")
        if self.window_s is not None and self.window_s <= 0:
            raise ConfigError("window_s must be positive when set")

    def spec_for(self, sample_rate_hz: float) -> CwtSpec:
        spec = CwtSpec.for_band(
            self.low_hz,
            self.high_hz,
            sample_rate_hz,
            n_scales=self.n_scales,
            fc=self.fc,
            window_s=self.window_s,
        )
        spec.validate_coverage(self.low_hz, self.high_hz, sample_rate_hz)
        return spec


@dataclass(frozen=True)
class KmeansParams:
    k: int = 5
    seed: int = 0
    max_iter: int = 100

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be >= 1")


@dataclass(frozen=True)
class PipelineConfig:
    montage: Montage = field(default_factory=lambda: DEFAULT_MONTAGE)
    bandpass: BandpassSpec = field(default_factory=BandpassSpec)
    cwt: CwtParams = field(default_factory=CwtParams)
    threshold: ThresholdSpec = field(default_factory=ThresholdSpec)
    ivt: IvtSpec = field(default_factory=IvtSpec)
    fps: float = 83.0
    frame_count: int | None = None
    dilation_radius: int = 0
    tolerance_frames: int = 0
    histogram: HistogramSpec = field(default_factory=HistogramSpec)
    kmeans: KmeansParams = field(default_factory=KmeansParams)
    paths: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.fps <= 0:
            raise ConfigError("fps must be positive")
        if self.frame_count is not None and self.frame_count < 1:
            raise ConfigError("frame_count must be >= 1 when set")
        if self.dilation_radius < 0:
            raise ConfigError("dilation_radius must be >= 0")
        if self.tolerance_frames < 0:
            raise ConfigError("tolerance_frames must be >= 0")

    def path(self, key: str) -> Path:
        if key not in self.paths:
            raise ConfigError(f"config has no '{key}' path")
        return Path(self.paths[key])


_SECTION_CLASSES = {
    "bandpass": BandpassSpec,
    "cwt": CwtParams,
    "threshold": ThresholdSpec,
    "ivt": IvtSpec,
    "histogram": HistogramSpec,
    "kmeans": KmeansParams,
}

_SCALAR_KEYS = {"fps", "frame_count", "dilation_radius", "tolerance_frames"}


def _build_section(cls, obj: dict):
    allowed = {f.name for f in fields(cls)}
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"{cls.__name__}: unknown key {sorted(unknown)[0]!r}")
    try:
        return cls(**obj)
    except AttnsumError as exc:
        raise ConfigError(f"{cls.__name__}: {exc}") from None


def load_config(path: str | Path) -> PipelineConfig:
    """Read and validate a config file; all sections are optional."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config not found: {path}")
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: config must be a JSON object")

    known = set(_SECTION_CLASSES) | _SCALAR_KEYS | {"montage", "paths"}
    unknown = set(obj) - known
    if unknown:
        raise ConfigError(f"{path}: unknown config section {sorted(unknown)[0]!r}")

    kwargs = {}
    for section, cls in _SECTION_CLASSES.items():
        if section in obj:
            if not isinstance(obj[section], dict):
                raise ConfigError(f"{cls.__name__}: section must be a JSON object")
            kwargs[section] = _build_section(cls, obj[section])
    if "montage" in obj:
        if not isinstance(obj["montage"], dict):
            raise ConfigError("Montage: section must be a JSON object")
        try:
            kwargs["montage"] = Montage(
                {r: tuple(ls) for r, ls in obj["montage"].items()}
            )
        except AttnsumError as exc:
            raise ConfigError(f"Montage: {exc}") from None
    for key in _SCALAR_KEYS:
        if key in obj:
            kwargs[key] = obj[key]
    if "paths" in obj:
        paths = obj["paths"]
        if not isinstance(paths, dict) or not all(
            isinstance(v, str) for v in paths.values()
        ):
            raise ConfigError("paths: must map names to strings")
        base = path.parent
        kwargs["paths"] = {k: str((base / v).resolve()) for k, v in paths.items()}
    try:
        return PipelineConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def effective_dict(config: PipelineConfig) -> dict:
    """The fully-materialized configuration, defaults included."""
    return {
        "montage": {r: list(ls) for r, ls in config.montage.regions.items()},
        "bandpass": dataclasses.asdict(config.bandpass),
        "cwt": dataclasses.asdict(config.cwt),
        "threshold": dataclasses.asdict(config.threshold),
        "ivt": dataclasses.asdict(config.ivt),
        "fps": config.fps,
        "frame_count": config.frame_count,
        "dilation_radius": config.dilation_radius,
        "tolerance_frames": config.tolerance_frames,
        "histogram": dataclasses.asdict(config.histogram),
        "kmeans": dataclasses.asdict(config.kmeans),
        "paths": dict(config.paths),
    }


def write_effective(config: PipelineConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(effective_dict(config), indent=2) + "\n")
