import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphdiv.core import ValidationError, dataset_from_array
from graphdiv.knn import build_index, count_within, knn_distance


def brute_count(points, i, r):
    d = np.max(np.abs(points - points[i]), axis=1)
    return int(np.sum(d <= r)) - 1


def brute_kth(points, i, k):
    d = np.max(np.abs(points - points[i]), axis=1)
    return float(np.partition(d, k)[k])


class TestExamples:
    def setup_method(self):
        self.line = dataset_from_array(np.array([[0.0], [1.0], [3.0]]))

    def test_kth_distance_on_line(self):
        idx = build_index(self.line, [0], "brute")
        assert knn_distance(idx, 0, 2) == 3.0
        assert knn_distance(idx, 0, 1) == 1.0

    def test_count_on_line(self):
        idx = build_index(self.line, [0], "tree")
        assert count_within(idx, 0, 1.0) == 1
        assert count_within(idx, 0, 3.0) == 2
        assert count_within(idx, 0, 0.5) == 0

    def test_identical_points(self):
        ds = dataset_from_array(np.zeros((100, 2)) + 0.25)
        for backend in ("brute", "tree"):
            idx = build_index(ds, [0, 1], backend)
            assert knn_distance(idx, 17, 5) == 0.0
            assert count_within(idx, 17, 0.0) == 99

    def test_empty_columns_rejected(self):
        with pytest.raises(ValidationError, match="empty column list"):
            build_index(self.line, [])

    def test_k_out_of_range(self):
        idx = build_index(self.line, [0])
        with pytest.raises(ValidationError):
            knn_distance(idx, 0, 3)
        with pytest.raises(ValidationError):
            knn_distance(idx, 0, 0)

    def test_negative_radius_rejected(self):
        idx = build_index(self.line, [0])
        with pytest.raises(ValidationError):
            count_within(idx, 0, -0.1)


def mixed_points(n, d, seed):
    """Continuous coordinates with injected exact duplicates and atoms."""
    rng = np.random.default_rng(seed)
    pts = rng.random((n, d))
    atoms = rng.random(d)
    mask = rng.random((n, d)) < 0.4
    pts = np.where(mask, atoms, pts)
    pts[:: max(1, n // 7)] = pts[0]
    return pts


class TestBackendEquivalence:
    def test_distances_and_counts_match_bitwise(self):
        pts = mixed_points(200, 3, seed=11)
        ds = dataset_from_array(pts)
        rng = np.random.default_rng(5)
        for cols in ([0], [1, 2], [0, 1, 2]):
            brute = build_index(ds, cols, "brute")
            tree = build_index(ds, cols, "tree")
            for k in (1, 3, 12):
                db = brute.knn_distances(k)
                dt = tree.knn_distances(k)
                assert np.array_equal(db, dt)
            # radii sampled from actual pairwise distances to force boundary ties
            for _ in range(200):
                i = int(rng.integers(200))
                j = int(rng.integers(200))
                r = float(np.max(np.abs(pts[np.ix_([j], cols)] - pts[np.ix_([i], cols)])))
                assert tree.count_within(i, r) == brute.count_within(i, r)

    def test_bulk_count_matches_single(self):
        pts = mixed_points(120, 2, seed=3)
        ds = dataset_from_array(pts)
        tree = build_index(ds, [0, 1], "tree")
        radii = tree.knn_distances(4)
        bulk = tree.count_within_bulk(radii)
        singles = [tree.count_within(i, radii[i]) for i in range(120)]
        assert np.array_equal(bulk, np.array(singles))


class TestInvariants:
    def test_projection_monotonicity(self):
        pts = mixed_points(150, 3, seed=7)
        ds = dataset_from_array(pts)
        full = build_index(ds, [0, 1, 2])
        sub = build_index(ds, [0, 1])
        single = build_index(ds, [0])
        radii = full.knn_distances(5)
        c_full = full.count_within_bulk(radii)
        c_sub = sub.count_within_bulk(radii)
        c_one = single.count_within_bulk(radii)
        assert np.all(c_full <= c_sub)
        assert np.all(c_sub <= c_one)

    def test_count_at_knn_radius_at_least_k(self):
        pts = mixed_points(150, 2, seed=9)
        ds = dataset_from_array(pts)
        idx = build_index(ds, [0, 1])
        for k in (1, 4, 20):
            radii = idx.knn_distances(k)
            counts = idx.count_within_bulk(radii)
            assert np.all(counts >= k)

    def test_translation_invariance_exact_grid(self):
        # sixty-fourths stay exactly representable after adding the shifts
        rng = np.random.default_rng(2)
        pts = rng.integers(-256, 256, size=(120, 2)) / 64.0
        shifted = pts + np.array([5.0, -2.171875])
        a = build_index(dataset_from_array(pts), [0, 1])
        b = build_index(dataset_from_array(shifted), [0, 1])
        radii = a.knn_distances(3)
        assert np.array_equal(radii, b.knn_distances(3))
        assert np.array_equal(a.count_within_bulk(radii), b.count_within_bulk(radii))

    def test_translation_invariance_continuous(self):
        pts = mixed_points(150, 2, seed=21)
        shifted = pts + np.array([0.5, 3.0])
        a = build_index(dataset_from_array(pts), [0, 1])
        b = build_index(dataset_from_array(shifted), [0, 1])
        radii_a = a.knn_distances(4)
        counts_a = a.count_within_bulk(radii_a)
        radii_b = b.knn_distances(4)
        counts_b = b.count_within_bulk(radii_b)
        assert np.array_equal(counts_a, counts_b)

    def test_power_of_two_scaling(self):
        pts = mixed_points(150, 3, seed=13)
        a = build_index(dataset_from_array(pts), [0, 1, 2])
        b = build_index(dataset_from_array(pts * 0.25), [0, 1, 2])
        radii_a = a.knn_distances(6)
        radii_b = b.knn_distances(6)
        assert np.array_equal(radii_a * 0.25, radii_b)
        assert np.array_equal(
            a.count_within_bulk(radii_a), b.count_within_bulk(radii_b)
        )

    def test_negative_zero_counts_as_duplicate(self):
        pts = np.array([[0.0], [-0.0], [1.0]])
        ds = dataset_from_array(pts)
        for backend in ("brute", "tree"):
            idx = build_index(ds, [0], backend)
            assert count_within(idx, 0, 0.0) == 1

    @given(st.integers(0, 2**32 - 1), st.integers(2, 5))
    @settings(max_examples=25, deadline=None)
    def test_monotonicity_property(self, seed, d):
        pts = np.random.default_rng(seed).integers(0, 8, size=(40, d)) / 4.0
        ds = dataset_from_array(pts)
        full = build_index(ds, list(range(d)))
        sub = build_index(ds, list(range(d - 1)))
        radii = full.knn_distances(3)
        assert np.all(full.count_within_bulk(radii) <= sub.count_within_bulk(radii))

    def test_worker_cap_does_not_change_answers(self, monkeypatch):
        pts = mixed_points(3000, 3, seed=31)
        ds = dataset_from_array(pts)
        idx = build_index(ds, [0, 1, 2])
        radii = idx.knn_distances(6)
        counts = idx.count_within_bulk(radii)
        monkeypatch.setenv("GRAPHDIV_THREADS", "1")
        capped = build_index(ds, [0, 1, 2])
        assert np.array_equal(capped.knn_distances(6), radii)
        assert np.array_equal(capped.count_within_bulk(radii), counts)
