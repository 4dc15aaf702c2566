import numpy as np
import pytest

from _oracles import gaze_pipeline_oracle, random_gaze_trace
from attnsum.errors import ConfigError, DataError
from attnsum.gaze import (
    Fixation,
    IvtSpec,
    extract_gaze_events,
    fixations_to_events,
    hysteresis_filter,
    ivt_classify,
    point_velocity,
)
from attnsum.model import GazeRecording, VideoTimeline


def make_rec(x, y, valid=None, rate=100.0, t=None):
    n = len(x)
    if t is None:
        t = np.arange(n) / rate
    if valid is None:
        valid = np.ones(n, dtype=bool)
    return GazeRecording(rate, t_s=t, x_deg=np.asarray(x, float), y_deg=np.asarray(y, float), valid=valid)


def fix(start, end, xy=(0.0, 0.0)):
    return Fixation(start, end, xy, (end - start) * 1000.0)


class TestPointVelocity:
    def test_stationary_all_zero(self):
        rec = make_rec(np.ones(50), np.ones(50))
        v, defined = point_velocity(rec)
        assert np.all(v == 0.0)
        assert defined.all()

    def test_two_points_three_degrees(self):
        rec = make_rec([0.0, 3.0], [0.0, 0.0])
        v, defined = point_velocity(rec)
        assert v[1] == pytest.approx(300.0)
        assert v[0] == v[1]
        assert defined.all()

    def test_matches_finite_difference_exactly(self):
        import math

        rng = np.random.default_rng(13)
        n = 500
        rec = make_rec(rng.normal(size=n), rng.normal(size=n), valid=rng.random(n) > 0.1)
        v, defined = point_velocity(rec)
        for i in range(1, n):
            dx = rec.x_deg[i] - rec.x_deg[i - 1]
            dy = rec.y_deg[i] - rec.y_deg[i - 1]
            dt = rec.t_s[i] - rec.t_s[i - 1]
            assert v[i] == math.sqrt(dx * dx + dy * dy) / dt
            assert defined[i] == (rec.valid[i] and rec.valid[i - 1])

    def test_too_few_valid_points(self):
        rec = make_rec([0.0, 1.0, 2.0], [0.0, 0.0, 0.0], valid=np.array([True, False, False]))
        with pytest.raises(DataError, match="2 valid"):
            point_velocity(rec)


class TestIvtClassify:
    SPEC = IvtSpec()

    def test_stationary_two_seconds(self):
        # 201 samples at 100 Hz: t runs 0.00 .. 2.00 inclusive
        rec = make_rec(np.full(201, 4.0), np.full(201, -2.0))
        fixations = ivt_classify(rec, self.SPEC)
        assert len(fixations) == 1
        f = fixations[0]
        assert f.duration_ms == pytest.approx(2000.0)
        assert f.centroid_deg == (4.0, -2.0)

    def test_one_fixation_per_slow_segment(self):
        # slow 40, fast 10, slow 60, fast 10, slow 30
        x = np.concatenate(
            [
                np.zeros(40),
                np.arange(10) * 5.0,
                np.full(60, 45.0),
                45.0 + np.arange(10) * 5.0,
                np.full(30, 90.0),
            ]
        )
        rec = make_rec(x, np.zeros_like(x))
        fixations = ivt_classify(rec, self.SPEC)
        assert len(fixations) == 3

    def test_all_fast_empty(self):
        x = np.arange(100) * 10.0  # 1000 deg/s
        rec = make_rec(x, np.zeros_like(x))
        assert ivt_classify(rec, self.SPEC) == []

    def test_invalid_breaks_run(self):
        valid = np.ones(100, dtype=bool)
        valid[50] = False
        rec = make_rec(np.zeros(100), np.zeros(100), valid=valid)
        fixations = ivt_classify(rec, self.SPEC)
        assert len(fixations) == 2
        assert fixations[0].end_s < 0.50
        assert fixations[1].start_s > 0.50

    def test_fixations_disjoint_and_ordered(self):
        rng = np.random.default_rng(7)
        t, x, y, valid = random_gaze_trace(rng, 2000)
        rec = GazeRecording(100.0, t, x, y, valid)
        fixations = ivt_classify(rec, self.SPEC)
        for a, b in zip(fixations, fixations[1:]):
            assert a.end_s < b.start_s

    def test_single_sample_run_dropped(self):
        # one slow sample wedged between fast moves never forms a fixation
        x = np.array([0.0, 50.0, 50.1, 100.0, 200.0])
        rec = make_rec(x, np.zeros_like(x))
        assert ivt_classify(rec, self.SPEC) == []


class TestHysteresisFilter:
    SPEC = IvtSpec()

    def test_default_duration_gates(self):
        fixations = [fix(0.0, 0.5), fix(1.0, 2.5), fix(3.0, 12.0)]
        kept = hysteresis_filter(fixations, self.SPEC)
        assert [f.duration_ms for f in kept] == [1500.0]

    def test_boundaries_inclusive(self):
        fixations = [fix(0.0, 1.0), fix(2.0, 10.0)]
        kept = hysteresis_filter(fixations, self.SPEC)
        assert len(kept) == 2

    def test_empty(self):
        assert hysteresis_filter([], self.SPEC) == []

    def test_idempotent(self):
        fixations = [fix(0.0, 0.5), fix(1.0, 2.5), fix(3.0, 12.0)]
        once = hysteresis_filter(fixations, self.SPEC)
        assert hysteresis_filter(once, self.SPEC) == once

    def test_bad_spec(self):
        with pytest.raises(ConfigError):
            IvtSpec(min_fix_ms=8000.0, max_fix_ms=1000.0)


class TestFixationsToEvents:
    def test_no_fixations(self):
        train = fixations_to_events([], VideoTimeline(83.0, 100))
        assert train.origin == "gaze"
        assert not train.active.any()

    def test_unit_interval_maps_to_frames_83_166(self):
        train = fixations_to_events([fix(1.0, 2.0)], VideoTimeline(83.0, 300))
        assert list(np.flatnonzero(train.active)) == list(range(83, 167))

    def test_full_cover(self):
        train = fixations_to_events([fix(0.0, 100 / 83.0)], VideoTimeline(83.0, 100))
        assert train.active.all()

    def test_beyond_end_rejected(self):
        with pytest.raises(DataError, match="beyond"):
            fixations_to_events([fix(0.0, 5.0)], VideoTimeline(83.0, 100))

    def test_matches_overlap_enumeration(self):
        fps, frame_count = 83.0, 400
        fixations = [fix(0.37, 1.91), fix(2.02, 3.5), fix(4.0, 4.1)]
        train = fixations_to_events(fixations, VideoTimeline(fps, frame_count))
        for i in range(frame_count):
            expect = any(
                (i / fps <= f.end_s) and ((i + 1) / fps > f.start_s) for f in fixations
            )
            assert train.active[i] == expect


class TestEndToEnd:
    def test_matches_oracle_on_random_traces(self):
        spec = IvtSpec()
        fps = 83.0
        for seed in range(10):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(50, 3000))
            t, x, y, valid = random_gaze_trace(rng, n)
            if np.count_nonzero(valid) < 2:
                continue
            frame_count = int(t[-1] * fps) + 1
            rec = GazeRecording(100.0, t, x, y, valid)
            got = extract_gaze_events(rec, spec, VideoTimeline(fps, frame_count))
            expect = gaze_pipeline_oracle(
                t, x, y, valid, spec.velocity_threshold_deg_s,
                spec.min_fix_ms, spec.max_fix_ms, fps, frame_count,
            )
            assert list(got.active) == expect, f"seed {seed}"

    def test_translation_invariance(self):
        rng = np.random.default_rng(3)
        t, x, y, valid = random_gaze_trace(rng, 1500)
        rec = GazeRecording(100.0, t, x, y, valid)
        shifted = GazeRecording(100.0, t, x + 12.5, y - 40.0, valid)
        timeline = VideoTimeline(83.0, int(t[-1] * 83) + 1)
        spec = IvtSpec()
        a = extract_gaze_events(rec, spec, timeline)
        b = extract_gaze_events(shifted, spec, timeline)
        assert np.array_equal(a.active, b.active)
