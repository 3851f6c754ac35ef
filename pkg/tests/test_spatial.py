import numpy as np
import pytest

from tunneltrainer.geometry import ConfidenceInterval, generate_exercise
from tunneltrainer.spatial import SpatialIndex, build_spatial_index, nearest_via_point


def exhaustive_scan(points, q):
    """Independent oracle: brute-force argmin with lowest-index ties."""
    d2 = np.sum((points - q) ** 2, axis=1)
    m = d2.min()
    i = int(np.flatnonzero(d2 == m)[0])
    diff = points[i] - q
    return i, float(np.sqrt(np.sum(diff * diff)))


class TestSpatialIndex:
    def test_single_point(self, rng):
        idx = build_spatial_index(np.array([[0.1, 0.2, 0.3]]))
        for _ in range(20):
            q = rng.uniform(-5, 5, 3)
            i, d = idx.query(q)
            assert i == 0
            assert d == pytest.approx(np.linalg.norm(q - [0.1, 0.2, 0.3]))

    def test_exact_hit(self):
        traj = generate_exercise("T1")
        idx = build_spatial_index(traj, ConfidenceInterval.C2)
        i, d = nearest_via_point(idx, traj.via_points[7])
        assert (i, d) == (7, 0.0)

    def test_perpendicular_offset(self):
        traj = generate_exercise("T1")  # straight tunnel along x
        idx = build_spatial_index(traj, ConfidenceInterval.C1)
        mid = traj.via_points[len(traj.via_points) // 2]
        i, d = idx.query(mid + np.array([0.0, 0.02, 0.0]))
        assert d == pytest.approx(0.02, abs=1e-12)

    def test_matches_oracle_on_t4(self, rng):
        traj = generate_exercise("T4")
        idx = build_spatial_index(traj, ConfidenceInterval.C2)
        for _ in range(1000):
            q = rng.uniform(-0.3, 0.4, 3)
            assert idx.query(q) == exhaustive_scan(traj.via_points, q)

    def test_far_queries_fall_back_to_ring_expansion(self, rng, exercises):
        for traj in exercises.values():
            idx = build_spatial_index(traj, ConfidenceInterval.C3)
            for scale in (1.0, 5.0, 50.0):
                q = rng.uniform(-scale, scale, 3) + np.array([scale, scale, scale])
                assert idx.query(q) == exhaustive_scan(traj.via_points, q)

    def test_near_path_queries_all_exercises(self, rng, exercises):
        for traj in exercises.values():
            for ci in ConfidenceInterval:
                idx = build_spatial_index(traj, ci)
                picks = rng.integers(0, len(traj.via_points), 200)
                for k in picks:
                    q = traj.via_points[k] + rng.normal(0, 0.02, 3)
                    assert idx.query(q) == exhaustive_scan(traj.via_points, q)

    def test_tie_breaks_toward_lowest_index(self):
        pts = np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]])
        idx = SpatialIndex(pts, cell=0.5)
        # query exactly between the two points, equidistant
        i, d = idx.query(np.array([1.0, 0.0, 0.0]))
        oi, od = exhaustive_scan(pts, np.array([1.0, 0.0, 0.0]))
        assert i == oi == 0
        assert d == od == 1.0

    def test_cell_size_from_ci_and_spacing(self):
        traj = generate_exercise("T2")
        idx = build_spatial_index(traj, ConfidenceInterval.C1)
        assert idx.cell == max(0.10, 2 * traj.spacing)
        idx3 = build_spatial_index(traj, ConfidenceInterval.C3)
        assert idx3.cell == max(0.03, 2 * traj.spacing)

    def test_queries_on_cell_boundaries(self, rng):
        pts = rng.uniform(0, 1, (60, 3))
        idx = SpatialIndex(pts, cell=0.25)
        grid_vals = np.arange(-0.25, 1.3, 0.25)
        for x in grid_vals[:4]:
            for y in grid_vals[:4]:
                q = np.array([x, y, 0.5])
                assert idx.query(q) == exhaustive_scan(pts, q)
