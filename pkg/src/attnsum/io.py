"""File formats: CSV ingestion/serialization and the JSON sidecar formats.

Formats
-------
EEG CSV          header ``t_s,<label1>,<label2>,...``, one row per sample.
Gaze CSV         header ``t_s,x_deg,y_deg,valid`` with valid in {0, 1}.
Key frames JSON  ``{"frame_count": N, "frames": [i, ...]}`` (also ground truth).
Event train JSON ``{"rate_hz": r, "origin": "...", "active": [0, 1, ...]}``.

All numeric CSV fields are written with 9 significant digits, which makes
write -> ingest -> write a fixed point: the second write is byte-identical
to the first.  Sample rates are inferred from the timestamp column as
``(n_rows - 1) / (t_last - t_first)``.

Line numbers in ingestion errors count the header as line 1.
"""

from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path

import numpy as np

from .errors import DataError, IngestError
from .model import (
    ChannelSeries,
    EegRecording,
    EventTrain,
    GazeRecording,
    GroundTruth,
    KeyFrameSet,
    Montage,
    VideoTimeline,
)

__all__ = [
    "fmt9",
    "ingest_eeg",
    "ingest_gaze",
    "read_event_train",
    "read_keyframes",
    "read_truth",
    "write_eeg",
    "write_event_train",
    "write_gaze",
    "write_keyframes",
    "write_truth",
]


def fmt9(x: float) -> str:
    """Format a real with 9 significant digits (the package-wide precision)."""
    return "%.9g" % x


def _read_numeric_block(path: Path, n_cols: int) -> np.ndarray:
    """Parse the data rows of a CSV as a float matrix.

    Fast path is np.loadtxt; when it chokes, re-parse row by row to name
    the offending line and field.
    """
    try:
        with open(path) as fh:
            fh.readline()  # header
            data = np.loadtxt(fh, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            next(reader)
            for lineno, row in enumerate(reader, start=2):
                if len(row) != n_cols:
                    raise IngestError(
                        f"expected {n_cols} fields, found {len(row)}",
                        path=path,
                        line=lineno,
                    ) from None
                for field in row:
                    try:
                        float(field)
                    except ValueError:
                        raise IngestError(
                            f"non-numeric value {field!r}", path=path, line=lineno
                        ) from None
        raise IngestError("malformed numeric data", path=path) from None
    if data.size == 0:
        raise IngestError("no data rows", path=path)
    if data.shape[1] != n_cols:
        raise IngestError(
            f"expected {n_cols} fields, found {data.shape[1]}", path=path, line=2
        )
    return data


def _infer_rate(t: np.ndarray, path: Path) -> float:
    if t.shape[0] < 2:
        raise IngestError("need at least 2 rows to infer the sample rate", path=path)
    span = t[-1] - t[0]
    if span <= 0:
        raise IngestError("timestamps do not advance", path=path)
    return (t.shape[0] - 1) / span


def ingest_eeg(path: str | Path, montage: Montage) -> EegRecording:
    """Read an EEG CSV; every header label must belong to the montage."""
    path = Path(path)
    if not path.is_file():
        raise IngestError("file not found", path=path)
    with open(path) as fh:
        header = fh.readline().rstrip("\n").rstrip("\r")
    cols = header.split(",")
    if not cols or cols[0] != "t_s":
        raise IngestError(
            f"header must start with 't_s', got {cols[0]!r}", path=path, line=1
        )
    labels = cols[1:]
    if not labels:
        raise IngestError("header has no electrode columns", path=path, line=1)
    known = set(montage.labels)
    for label in labels:
        if label not in known:
            raise IngestError(f"unknown electrode {label}", path=path, line=1)
    if len(set(labels)) != len(labels):
        dup = next(l for l in labels if labels.count(l) > 1)
        raise IngestError(f"duplicate electrode column {dup}", path=path, line=1)

    data = _read_numeric_block(path, len(cols))
    t = data[:, 0]
    rate = _infer_rate(t, path)
    dt = 1.0 / rate
    # Rate inference assumes a uniform clock; tolerate only rounding of the
    # printed timestamps.
    drift = np.abs(t - (t[0] + np.arange(t.shape[0]) * dt))
    if np.any(drift > 0.01 * dt):
        bad = int(np.argmax(drift > 0.01 * dt))
        raise IngestError(
            f"timestamps not uniformly spaced (sample {bad})",
            path=path,
            line=bad + 2,
        )
    try:
        return EegRecording(
            sample_rate_hz=rate,
            channels=tuple(
                ChannelSeries(label, data[:, k + 1]) for k, label in enumerate(labels)
            ),
            start_time_s=float(t[0]),
        )
    except DataError as exc:
        raise IngestError(str(exc), path=path) from None


def write_eeg(rec: EegRecording, path: str | Path) -> None:
    path = Path(path)
    buf = _io.StringIO()
    buf.write("t_s," + ",".join(rec.labels) + "\n")
    columns = [ch.samples for ch in rec.channels]
    rate = rec.sample_rate_hz
    t0 = rec.start_time_s
    for j in range(rec.n_samples):
        row = [fmt9(t0 + j / rate)]
        row += [fmt9(col[j]) for col in columns]
        buf.write(",".join(row) + "\n")
    path.write_text(buf.getvalue())


def ingest_gaze(path: str | Path) -> GazeRecording:
    """Read a gaze CSV; invalid rows are kept with valid=False."""
    path = Path(path)
    if not path.is_file():
        raise IngestError("file not found", path=path)
    with open(path) as fh:
        header = fh.readline().rstrip("\n").rstrip("\r")
    if header.split(",") != ["t_s", "x_deg", "y_deg", "valid"]:
        raise IngestError(
            f"expected header 't_s,x_deg,y_deg,valid', got {header!r}",
            path=path,
            line=1,
        )
    data = _read_numeric_block(path, 4)
    raw_valid = data[:, 3]
    if np.any((raw_valid != 0.0) & (raw_valid != 1.0)):
        bad = int(np.argmax((raw_valid != 0.0) & (raw_valid != 1.0)))
        raise IngestError(
            f"valid must be 0 or 1, got {fmt9(raw_valid[bad])}",
            path=path,
            line=bad + 2,
        )
    t = data[:, 0]
    if np.any(np.diff(t) <= 0):
        bad = int(np.flatnonzero(np.diff(t) <= 0)[0]) + 1
        raise IngestError(
            f"timestamps not strictly increasing at row {bad + 1}",
            path=path,
            line=bad + 2,
        )
    rate = _infer_rate(t, path)
    return GazeRecording(
        sample_rate_hz=rate,
        t_s=t,
        x_deg=data[:, 1],
        y_deg=data[:, 2],
        valid=raw_valid.astype(bool),
    )


def write_gaze(rec: GazeRecording, path: str | Path) -> None:
    path = Path(path)
    buf = _io.StringIO()
    buf.write("t_s,x_deg,y_deg,valid\n")
    for t, x, y, v in zip(rec.t_s, rec.x_deg, rec.y_deg, rec.valid):
        buf.write("%s,%s,%s,%d\n" % (fmt9(t), fmt9(x), fmt9(y), int(v)))
    path.write_text(buf.getvalue())


def _load_json(path: Path) -> dict:
    if not path.is_file():
        raise IngestError("file not found", path=path)
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise IngestError(f"invalid JSON: {exc}", path=path) from None
    if not isinstance(obj, dict):
        raise IngestError("top-level JSON value must be an object", path=path)
    return obj


def _frames_payload(obj: dict, path: Path) -> tuple[int, list[int]]:
    for key in ("frame_count", "frames"):
        if key not in obj:
            raise IngestError(f"missing key {key!r}", path=path)
    frame_count = obj["frame_count"]
    frames = obj["frames"]
    if not isinstance(frame_count, int) or frame_count <= 0:
        raise IngestError("frame_count must be a positive integer", path=path)
    if not isinstance(frames, list) or not all(isinstance(i, int) for i in frames):
        raise IngestError("frames must be a list of integers", path=path)
    return frame_count, frames


def read_truth(path: str | Path) -> GroundTruth:
    path = Path(path)
    frame_count, frames = _frames_payload(_load_json(path), path)
    try:
        return GroundTruth(valid_frames=np.array(frames, dtype=np.int64), frame_count=frame_count)
    except DataError as exc:
        raise IngestError(str(exc), path=path) from None


def write_truth(truth: GroundTruth, path: str | Path) -> None:
    payload = {
        "frame_count": truth.frame_count,
        "frames": [int(i) for i in truth.valid_frames],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def read_keyframes(path: str | Path, frame_rate_fps: float) -> KeyFrameSet:
    path = Path(path)
    frame_count, frames = _frames_payload(_load_json(path), path)
    try:
        return KeyFrameSet(
            frame_indices=np.array(frames, dtype=np.int64),
            timeline=VideoTimeline(frame_rate_fps, frame_count),
        )
    except DataError as exc:
        raise IngestError(str(exc), path=path) from None


def write_keyframes(keyframes: KeyFrameSet, path: str | Path) -> None:
    payload = {
        "frame_count": keyframes.timeline.frame_count,
        "frames": [int(i) for i in keyframes.frame_indices],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def read_event_train(path: str | Path) -> EventTrain:
    path = Path(path)
    obj = _load_json(path)
    for key in ("rate_hz", "origin", "active"):
        if key not in obj:
            raise IngestError(f"missing key {key!r}", path=path)
    active = obj["active"]
    if not isinstance(active, list) or not all(v in (0, 1) for v in active):
        raise IngestError("active must be a list of 0/1", path=path)
    try:
        return EventTrain(
            rate_hz=float(obj["rate_hz"]),
            active=np.array(active, dtype=bool),
            origin=str(obj["origin"]),
        )
    except (DataError, TypeError, ValueError) as exc:
        raise IngestError(str(exc), path=path) from None


def write_event_train(train: EventTrain, path: str | Path) -> None:
    payload = {
        "rate_hz": train.rate_hz,
        "origin": train.origin,
        "active": [int(v) for v in train.active],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")
