"""Classical key-frame baselines operating on per-frame color histograms.

Two methods:

* histogram decomposition — shot boundaries wherever the L1 distance
  between consecutive frame histograms exceeds a threshold; within each
  shot the first frame is kept, and any later frame whose zero-mean
  normalized cross-correlation with the last kept frame drops below the
  redundancy threshold is kept as well;
* k-means — Lloyd's algorithm over histogram vectors with deterministic
  farthest-point initialization; each cluster contributes the frame
  nearest its centroid.

Features come from a ``frame,h0,...,hN`` CSV or a directory of binary PPM
(P6) frames, which are reduced to 4x4x4 RGB histograms (64 bins, two high
bits per channel).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, IngestError
from .model import KeyFrameSet, VideoTimeline

__all__ = [
    "FrameFeatures",
    "HistogramSpec",
    "histogram_keyframes",
    "kmeans_keyframes",
    "load_frame_features",
    "write_frame_features",
    "zncc",
]


@dataclass(frozen=True)
class FrameFeatures:
    """One frame's normalized color histogram."""

    index: int
    histogram: np.ndarray

    def __post_init__(self):
        hist = np.asarray(self.histogram, dtype=np.float64).copy()
        if hist.ndim != 1 or hist.size == 0:
            raise DataError(f"frame {self.index}: histogram must be a 1-D vector")
        if np.any(hist < 0):
            raise DataError(f"frame {self.index}: negative histogram bin")
        if abs(hist.sum() - 1.0) > 1e-9:
            raise DataError(
                f"frame {self.index}: histogram sums to {hist.sum()!r}, not 1"
            )
        hist.setflags(write=False)
        object.__setattr__(self, "histogram", hist)


@dataclass(frozen=True)
class HistogramSpec:
    boundary_threshold: float = 0.3
    zncc_threshold: float = 0.9

    def __post_init__(self):
        if not 0 < self.boundary_threshold < 1:
            raise ConfigError("boundary_threshold must be in (0, 1)")
        if not -1 < self.zncc_threshold < 1:
            raise ConfigError("zncc_threshold must be in (-1, 1)")


def _histogram_from_ppm(path: Path) -> np.ndarray:
    """4x4x4 RGB histogram of a binary P6 image (bin = high bits r,g,b)."""
    data = path.read_bytes()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise IngestError("truncated PPM header", path=path)
        fields.append(data[start:pos])
    if fields[0] != b"P6":
        raise IngestError(f"not a binary PPM (magic {fields[0]!r})", path=path)
    try:
        width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    except ValueError:
        raise IngestError("non-numeric PPM header field", path=path) from None
    if maxval != 255:
        raise IngestError(f"unsupported PPM maxval {maxval}", path=path)
    pos += 1  # single whitespace byte after maxval
    pixels = np.frombuffer(data, dtype=np.uint8, count=width * height * 3, offset=pos)
    if pixels.size != width * height * 3:
        raise IngestError("truncated PPM pixel data", path=path)
    rgb = pixels.reshape(-1, 3) >> 6
    bins = rgb[:, 0] * 16 + rgb[:, 1] * 4 + rgb[:, 2]
    hist = np.bincount(bins, minlength=64).astype(np.float64)
    return hist / hist.sum()


def load_frame_features(path: str | Path) -> list[FrameFeatures]:
    """Read features from a CSV or a directory of numbered .ppm frames."""
    path = Path(path)
    if path.is_dir():
        frames = sorted(path.glob("*.ppm"))
        if not frames:
            raise IngestError("no .ppm frames in directory", path=path)
        features = []
        for p in frames:
            try:
                index = int(p.stem)
            except ValueError:
                raise IngestError(f"non-numeric frame filename {p.name}", path=path) from None
            features.append(FrameFeatures(index=index, histogram=_histogram_from_ppm(p)))
    elif path.is_file():
        features = []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or header[0] != "frame":
                raise IngestError("expected header starting with 'frame'", path=path, line=1)
            n_bins = len(header) - 1
            if n_bins < 2:
                raise IngestError("need at least 2 histogram columns", path=path, line=1)
            for lineno, row in enumerate(reader, start=2):
                if len(row) != n_bins + 1:
                    raise IngestError(
                        f"expected {n_bins + 1} fields, found {len(row)}",
                        path=path,
                        line=lineno,
                    )
                try:
                    index = int(row[0])
                    hist = np.array([float(v) for v in row[1:]])
                except ValueError:
                    raise IngestError("non-numeric value", path=path, line=lineno) from None
                if np.any(hist < 0):
                    raise IngestError("negative histogram bin", path=path, line=lineno)
                total = hist.sum()
                if total <= 0:
                    raise IngestError("histogram sums to zero", path=path, line=lineno)
                features.append(FrameFeatures(index=index, histogram=hist / total))
        if not features:
            raise IngestError("no data rows", path=path)
    else:
        raise IngestError("file not found", path=path)

    features.sort(key=lambda f: f.index)
    for k, f in enumerate(features):
        expected = features[0].index + k
        if f.index != expected:
            raise IngestError(
                f"frame indices must be contiguous: expected {expected}, got {f.index}",
                path=path,
            )
    return features


def write_frame_features(features: list[FrameFeatures], path: str | Path) -> None:
    n_bins = features[0].histogram.shape[0] if features else 64
    lines = ["frame," + ",".join(f"h{k}" for k in range(n_bins))]
    for f in features:
        lines.append(str(f.index) + "," + ",".join("%.9g" % v for v in f.histogram))
    Path(path).write_text("\n".join(lines) + "\n")


def zncc(a: np.ndarray, b: np.ndarray) -> float:
    """Zero-mean normalized cross-correlation of two equal-length vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DataError(f"length mismatch: {a.shape} vs {b.shape}")
    da = a - a.mean()
    db = b - b.mean()
    denom = np.sqrt(np.sum(da * da) * np.sum(db * db))
    if denom == 0.0:
        raise DataError("zero variance vector in zncc")
    return float(np.sum(da * db) / denom)


def _default_timeline(n_frames: int) -> VideoTimeline:
    return VideoTimeline(frame_rate_fps=1.0, frame_count=n_frames)


def histogram_keyframes(
    features: list[FrameFeatures],
    spec: HistogramSpec,
    timeline: VideoTimeline | None = None,
) -> KeyFrameSet:
    """Shot segmentation by L1 histogram jumps + ZNCC redundancy removal."""
    if not features:
        raise DataError("no frames")
    timeline = timeline if timeline is not None else _default_timeline(len(features))
    kept: list[int] = []
    last_kept = None
    for pos, f in enumerate(features):
        boundary = pos == 0 or (
            float(np.abs(f.histogram - features[pos - 1].histogram).sum())
            > spec.boundary_threshold
        )
        if boundary:
            kept.append(f.index)
            last_kept = f
        elif zncc(f.histogram, last_kept.histogram) < spec.zncc_threshold:
            kept.append(f.index)
            last_kept = f
    return KeyFrameSet(np.array(kept, dtype=np.int64), timeline)


def _farthest_point_init(x: np.ndarray, k: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([seed, 4]))
    first = int(rng.integers(x.shape[0]))
    chosen = [first]
    d2 = np.sum((x - x[first]) ** 2, axis=1)
    while len(chosen) < k:
        nxt = int(np.argmax(d2))
        chosen.append(nxt)
        d2 = np.minimum(d2, np.sum((x - x[nxt]) ** 2, axis=1))
    return x[chosen].copy()


def _lloyd(x: np.ndarray, centroids: np.ndarray, max_iter: int, tol: float = 1e-6):
    """Plain Lloyd iterations; returns (centroids, labels, wcss history)."""
    history = []
    labels = np.zeros(x.shape[0], dtype=np.int64)
    for _ in range(max_iter):
        d2 = np.sum((x[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        labels = np.argmin(d2, axis=1)
        history.append(float(d2[np.arange(x.shape[0]), labels].sum()))
        new_centroids = centroids.copy()
        for c in range(centroids.shape[0]):
            members = x[labels == c]
            if members.shape[0]:
                new_centroids[c] = members.mean(axis=0)
            else:
                # re-seed an empty cluster at the point farthest from its
                # centroid assignment
                new_centroids[c] = x[int(np.argmax(d2[np.arange(x.shape[0]), labels]))]
        movement = float(np.max(np.sqrt(np.sum((new_centroids - centroids) ** 2, axis=1))))
        centroids = new_centroids
        if movement < tol:
            break
    d2 = np.sum((x[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
    labels = np.argmin(d2, axis=1)
    return centroids, labels, history


def kmeans_keyframes(
    features: list[FrameFeatures],
    k: int,
    seed: int = 0,
    max_iter: int = 100,
    timeline: VideoTimeline | None = None,
) -> KeyFrameSet:
    """One key-frame per cluster: the frame nearest the cluster centroid."""
    if not features:
        raise DataError("no frames")
    if k < 1:
        raise DataError("k must be >= 1")
    if k > len(features):
        raise DataError(f"k={k} exceeds frame count {len(features)}")
    timeline = timeline if timeline is not None else _default_timeline(len(features))
    x = np.stack([f.histogram for f in features])
    centroids, labels, _ = _lloyd(x, _farthest_point_init(x, k, seed), max_iter)
    kept = []
    indices = np.array([f.index for f in features])
    for c in range(k):
        members = np.flatnonzero(labels == c)
        if members.size == 0:
            continue
        d2 = np.sum((x[members] - centroids[c]) ** 2, axis=1)
        kept.append(int(indices[members[int(np.argmin(d2))]]))
    return KeyFrameSet(np.array(sorted(kept), dtype=np.int64), timeline)
