import math

import numpy as np
import pytest

from tunneltrainer.analytics import (RepetitionSet, build_repetition_set,
                                     desired_for_segment, err_task,
                                     joint_err_task, repetitions_from_path,
                                     sample_rmse, segment_repetitions,
                                     stroke_position, time_normalize)
from tunneltrainer.errors import SegmentationFailed
from tunneltrainer.geometry import generate_exercise


def make_strokes(n_reps=5, out=0.2, steps=40, dwell=12, dt_ms=50.0,
                 jitter=None, rng=None):
    """Synthetic path: dwell at origin, stroke out along x and back."""
    t, pos = [], []
    clock = 0.0

    def push(p):
        nonlocal clock
        t.append(clock)
        pos.append(p)
        clock += dt_ms

    for _ in range(n_reps):
        for _ in range(dwell):
            push(np.zeros(3))
        for u in np.linspace(1.0 / steps, 1.0, steps):
            x = out * (1 - abs(2 * u - 1))
            p = np.array([x, 0, 0])
            if jitter is not None and rng is not None:
                p = p + rng.normal(0, jitter, 3)
            push(p)
    for _ in range(dwell):
        push(np.zeros(3))
    return np.array(t), np.stack(pos)


class TestSegmentRepetitions:
    def test_five_clean_strokes(self):
        t, pos = make_strokes()
        segs = segment_repetitions(t, pos, np.zeros(3), 5)
        assert len(segs) == 5
        for sl in segs:
            d = np.linalg.norm(pos[sl] - 0, axis=1)
            assert d.max() > 0.15  # each segment reaches out

    def test_never_leaves_start(self):
        t = np.arange(100.0)
        pos = np.tile([0.001, 0, 0], (100, 1))
        with pytest.raises(SegmentationFailed) as exc:
            segment_repetitions(t, pos, np.zeros(3), 5)
        assert exc.value.found == 0
        assert exc.value.expected == 5

    def test_jitter_at_boundary_debounced(self, rng):
        # noisy crossings around the sphere boundary: brief flips are
        # ignored thanks to the 0.5 s debounce
        t, pos = make_strokes(jitter=0.004, rng=rng)
        segs = segment_repetitions(t, pos, np.zeros(3), 5)
        assert len(segs) == 5

    def test_wrong_count_reports_found(self):
        t, pos = make_strokes(n_reps=3)
        with pytest.raises(SegmentationFailed) as exc:
            segment_repetitions(t, pos, np.zeros(3), 5)
        assert exc.value.found == 3

    def test_segments_are_exit_to_entry(self):
        t, pos = make_strokes(n_reps=1, dwell=10, steps=30)
        (sl,) = segment_repetitions(t, pos, np.zeros(3), 1)
        inside = np.linalg.norm(pos - 0, axis=1) <= 0.03
        assert not inside[sl.start]          # first sample is outside
        assert inside[sl.stop - 1]           # last sample is back inside
        assert inside[sl.start - 1]          # sample before the exit was inside


class TestTimeNormalize:
    def test_two_sample_midpoint(self):
        out = time_normalize([0.0, 100.0], [[0, 0, 0], [1, 2, 3]], 3)
        assert np.allclose(out[1], [0.5, 1.0, 1.5])

    def test_identity_when_uniform(self):
        t = np.arange(7) * 10.0
        x = np.arange(21, dtype=float).reshape(7, 3)
        out = time_normalize(t, x, 7)
        assert np.allclose(out, x, atol=1e-12)

    def test_matches_piecewise_linear_oracle(self, rng):
        # oracle: direct interpolation formula per target time
        for _ in range(20):
            m = rng.integers(3, 12)
            t = np.sort(rng.uniform(0, 1000, m))
            t[0], t[-1] = 0.0, 1000.0
            x = rng.normal(0, 1, (m, 3))
            n = 17
            out = time_normalize(t, x, n)
            u = (t - t[0]) / (t[-1] - t[0])
            for j, target in enumerate(np.linspace(0, 1, n)):
                k = np.searchsorted(u, target, side="right") - 1
                k = min(max(k, 0), m - 2)
                if u[k + 1] > u[k]:
                    w = (target - u[k]) / (u[k + 1] - u[k])
                else:
                    w = 0.0
                expected = x[k] + w * (x[k + 1] - x[k])
                assert np.abs(out[j] - expected).max() < 1e-12

    def test_endpoints_preserved(self, rng):
        t = np.array([0.0, 3.0, 10.0])
        x = rng.normal(0, 1, (3, 3))
        out = time_normalize(t, x, 9)
        assert np.array_equal(out[0], x[0])
        assert np.array_equal(out[-1], x[-1])


class TestSampleRmse:
    def test_345_style(self):
        assert sample_rmse([1, 2, 2], [0, 0, 0]) == 3.0

    def test_zero_iff_equal(self, rng):
        v = rng.normal(0, 1, 3)
        assert sample_rmse(v, v) == 0.0
        assert sample_rmse(v, v + [1e-9, 0, 0]) > 0.0

    def test_matches_norm_oracle(self, rng):
        for _ in range(50):
            a, d = rng.normal(0, 1, 3), rng.normal(0, 1, 3)
            expected = math.sqrt(sum((ai - di) ** 2 for ai, di in zip(a, d)))
            assert abs(sample_rmse(a, d) - expected) < 1e-12

    def test_triangle_inequality(self, rng):
        for _ in range(50):
            a, b, c = rng.normal(0, 1, (3, 3))
            assert sample_rmse(a, c) <= sample_rmse(a, b) + sample_rmse(b, c) + 1e-12


def nested_loop_err_oracle(actual, desired):
    """Independent route: explicit loops over repetitions and samples."""
    n_reps, n_samples, _ = actual.shape
    total = 0.0
    for n in range(n_reps):
        rep_sum = 0.0
        for i in range(n_samples):
            diff = actual[n, i] - desired[n, i]
            rep_sum += math.sqrt(float(np.dot(diff, diff)))
        total += rep_sum / n_samples
    return total / n_reps


class TestErrTask:
    def test_constant_offset_returns_exactly_d(self):
        # d chosen binary-exact so the means introduce no rounding at all
        d = 0.015625
        desired = np.zeros((5, 200, 3))
        actual = desired + np.array([d, 0, 0])
        s = err_task(RepetitionSet(actual, desired))
        assert s.err == d
        assert np.all(s.per_rep_mean == d)

    def test_constant_offset_generic_d_within_ulps(self):
        d = 0.0173
        desired = np.zeros((5, 200, 3))
        actual = desired + np.array([0, d, 0])
        s = err_task(RepetitionSet(actual, desired))
        assert np.all(s.per_sample_rmse == d)
        assert abs(s.err - d) <= 4 * np.finfo(float).eps * d

    def test_one_rep_offset(self):
        d = 0.01
        desired = np.zeros((5, 50, 3))
        actual = desired.copy()
        actual[2] += [0, 2 * d, 0]
        s = err_task(RepetitionSet(actual, desired))
        assert s.err == pytest.approx(0.4 * d, abs=1e-15)

    def test_matches_nested_loop_oracle(self, rng):
        for _ in range(30):
            n, i = int(rng.integers(2, 7)), int(rng.integers(5, 40))
            actual = rng.normal(0, 0.1, (n, i, 3))
            desired = rng.normal(0, 0.1, (n, i, 3))
            s = err_task(RepetitionSet(actual, desired))
            assert abs(s.err - nested_loop_err_oracle(actual, desired)) < 1e-12

    def test_permutation_invariant_over_repetitions(self, rng):
        actual = rng.normal(0, 0.1, (5, 30, 3))
        desired = rng.normal(0, 0.1, (5, 30, 3))
        perm = rng.permutation(5)
        a = err_task(RepetitionSet(actual, desired)).err
        b = err_task(RepetitionSet(actual[perm], desired[perm])).err
        assert a == pytest.approx(b, abs=1e-15)

    def test_scales_linearly(self, rng):
        desired = rng.normal(0, 0.1, (5, 30, 3))
        dev = rng.normal(0, 0.05, (5, 30, 3))
        base = err_task(RepetitionSet(desired + dev, desired)).err
        scaled = err_task(RepetitionSet(desired + 3.0 * dev, desired)).err
        assert scaled == pytest.approx(3.0 * base, rel=1e-12)

    def test_err_equals_mean_of_rep_means(self, rng):
        actual = rng.normal(0, 0.1, (4, 25, 3))
        desired = rng.normal(0, 0.1, (4, 25, 3))
        s = err_task(RepetitionSet(actual, desired))
        assert s.err == pytest.approx(float(s.per_rep_mean.mean()), abs=1e-15)


def per_joint_oracle(actual, desired):
    """Eq.-style aggregation per joint, then mean across the four joints."""
    n, i, k = actual.shape
    per_joint = []
    for j in range(k):
        total = 0.0
        for rep in range(n):
            rep_sum = 0.0
            for s in range(i):
                rep_sum += abs(actual[rep, s, j] - desired[rep, s, j])
            total += rep_sum / i
        per_joint.append(total / n)
    return sum(per_joint) / k


class TestJointErrTask:
    def test_all_joints_offset(self):
        delta = 0.07
        desired = np.zeros((5, 40, 4))
        actual = desired + delta
        s = joint_err_task(RepetitionSet(actual, desired, space="joint"))
        assert s.err == pytest.approx(delta, abs=1e-15)

    def test_single_joint_offset_divided_by_four(self):
        delta = 0.08
        desired = np.zeros((5, 40, 4))
        actual = desired.copy()
        actual[:, :, 0] += delta
        s = joint_err_task(RepetitionSet(actual, desired, space="joint"))
        assert s.err == pytest.approx(delta / 4, abs=1e-15)

    def test_matches_per_joint_oracle(self, rng):
        for _ in range(20):
            n, i = int(rng.integers(2, 6)), int(rng.integers(5, 30))
            actual = rng.normal(0, 0.2, (n, i, 4))
            desired = rng.normal(0, 0.2, (n, i, 4))
            s = joint_err_task(RepetitionSet(actual, desired, space="joint"))
            assert abs(s.err - per_joint_oracle(actual, desired)) < 1e-12

    def test_reports_degrees_at_io(self):
        desired = np.zeros((2, 10, 4))
        actual = desired + math.radians(5.0)
        s = joint_err_task(RepetitionSet(actual, desired, space="joint"))
        assert s.to_dict()["err_deg"] == pytest.approx(5.0, abs=1e-12)

    def test_space_mismatch_rejected(self):
        reps = RepetitionSet(np.zeros((2, 5, 3)), np.zeros((2, 5, 3)))
        with pytest.raises(ValueError):
            joint_err_task(reps)
        jreps = RepetitionSet(np.zeros((2, 5, 4)), np.zeros((2, 5, 4)), space="joint")
        with pytest.raises(ValueError):
            err_task(jreps)


class TestStrokePosition:
    def test_open_path_out_and_back(self):
        traj = generate_exercise("T1", reach=0.3)
        assert np.allclose(stroke_position(traj, 0.0), traj.via_points[0])
        assert np.allclose(stroke_position(traj, 0.5), traj.via_points[-1])
        assert np.allclose(stroke_position(traj, 1.0), traj.via_points[0])
        quarter = stroke_position(traj, 0.25)
        assert quarter[0] == pytest.approx(0.15, abs=1e-12)

    def test_closed_path_goes_once_around(self):
        traj = generate_exercise("T4")
        assert np.allclose(stroke_position(traj, 0.0), traj.via_points[0])
        assert np.allclose(stroke_position(traj, 1.0), traj.via_points[-1])
        half = stroke_position(traj, 0.5)
        far = traj.via_points[len(traj.via_points) // 2]
        assert np.linalg.norm(half - far) < traj.spacing

    def test_desired_for_segment_constant_speed(self):
        traj = generate_exercise("T1", reach=0.3)
        t = np.linspace(0, 1000, 101)
        des = desired_for_segment(traj, t)
        steps = np.linalg.norm(np.diff(des, axis=0), axis=1)
        assert np.allclose(steps, steps[0], atol=1e-9)


class TestPipelineDeterminism:
    def test_same_path_bit_identical_summary(self, rng):
        t, pos = make_strokes(jitter=0.003, rng=rng)
        desired = pos + rng.normal(0, 0.002, pos.shape)

        def run():
            reps = repetitions_from_path(t, pos, desired, np.zeros(3), 5)
            return err_task(reps)

        a, b = run(), run()
        assert a.err == b.err
        assert np.array_equal(a.per_sample_rmse, b.per_sample_rmse)

    def test_build_repetition_set_shapes(self):
        t, pos = make_strokes()
        segs = segment_repetitions(t, pos, np.zeros(3), 5)
        reps = build_repetition_set(t, pos, pos, segs, n_samples=120)
        assert reps.actual.shape == (5, 120, 3)
        assert err_task(reps).err == 0.0
