import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcpriv.geometry import (
    Aabb,
    DegenerateCloud,
    PointCloud,
    aabb,
    chamfer,
    hull_area_2d,
    iou,
    load_bin,
    load_xyz,
    normalize,
    save_bin,
    save_xyz,
)

from oracles import chamfer_bruteforce, iou_montecarlo


def cloud(*pts):
    return PointCloud(np.array(pts, dtype=float))


def random_cloud(rng, n=64):
    return PointCloud(rng.normal(size=(n, 3)))


class TestPointCloud:
    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            PointCloud(np.empty((0, 3)))

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            cloud((0, 0, 0), (np.nan, 0, 0))

    def test_rejects_wrong_shape(self):
        with pytest.raises(ValueError):
            PointCloud(np.zeros((3, 2)))

    def test_immutable(self):
        c = cloud((0, 0, 0), (1, 1, 1))
        with pytest.raises(ValueError):
            c.points[0, 0] = 5.0


class TestNormalize:
    def test_two_point_example(self):
        out = normalize(cloud((1, 1, 1), (3, 1, 1)))
        np.testing.assert_allclose(out.points, [[-1, 0, 0], [1, 0, 0]], atol=1e-12)

    def test_centroid_and_radius(self):
        rng = np.random.default_rng(3)
        out = normalize(random_cloud(rng, 128))
        assert np.all(np.abs(out.points.mean(axis=0)) <= 1e-12)
        radii = np.linalg.norm(out.points, axis=1)
        assert abs(radii.max() - 1.0) <= 1e-12

    def test_idempotent(self):
        rng = np.random.default_rng(4)
        once = normalize(random_cloud(rng, 64))
        twice = normalize(once)
        assert np.max(np.abs(once.points - twice.points)) <= 1e-12

    def test_degenerate(self):
        with pytest.raises(DegenerateCloud):
            normalize(cloud((5, 5, 5), (5, 5, 5), (5, 5, 5), (5, 5, 5)))

    def test_order_preserved(self):
        c = cloud((0, 0, 0), (2, 0, 0), (1, 1, 0))
        out = normalize(c)
        # the farthest-from-centroid point stays at its index
        assert np.argmax(np.linalg.norm(out.points, axis=1)) == np.argmax(
            np.linalg.norm(c.points - c.points.mean(axis=0), axis=1))


class TestAabb:
    def test_basic(self):
        box = aabb(cloud((-1, 0, 0), (1, 0, 0)))
        np.testing.assert_array_equal(box.lo, [-1, 0, 0])
        np.testing.assert_array_equal(box.hi, [1, 0, 0])

    def test_unit_cube_corners(self):
        corners = [(x, y, z) for x in (0, 1) for y in (0, 1) for z in (0, 1)]
        box = aabb(cloud(*corners))
        np.testing.assert_array_equal(box.lo, [0, 0, 0])
        np.testing.assert_array_equal(box.hi, [1, 1, 1])

    def test_degenerate_point(self):
        box = aabb(cloud((2, 3, 4), (2, 3, 4), (2, 3, 4), (2, 3, 4)))
        assert box.volume == 0.0
        np.testing.assert_array_equal(box.lo, box.hi)

    def test_contains_all_points(self):
        rng = np.random.default_rng(5)
        c = random_cloud(rng)
        box = aabb(c)
        assert np.all(c.points >= box.lo) and np.all(c.points <= box.hi)

    def test_invalid_box(self):
        with pytest.raises(ValueError):
            Aabb(np.array([1, 0, 0]), np.array([0, 1, 1]))


def unit_cube(offset=(0.0, 0.0, 0.0)):
    off = np.asarray(offset, dtype=float)
    return Aabb(off, off + 1.0)


class TestIou:
    def test_identical(self):
        assert iou(unit_cube(), unit_cube()) == 1.0

    def test_disjoint(self):
        assert iou(unit_cube(), unit_cube((5, 5, 5))) == 0.0

    def test_half_shift(self):
        assert iou(unit_cube(), unit_cube((0.5, 0, 0))) == pytest.approx(1 / 3, abs=1e-12)

    def test_degenerate_identical(self):
        flat = Aabb(np.zeros(3), np.array([1.0, 1.0, 0.0]))
        assert iou(flat, flat) == 1.0

    def test_degenerate_different(self):
        a = Aabb(np.zeros(3), np.array([1.0, 1.0, 0.0]))
        b = Aabb(np.array([0, 0, 1.0]), np.array([1.0, 1.0, 1.0]))
        assert iou(a, b) == 0.0

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_bounds_and_symmetry(self, seed):
        rng = np.random.default_rng(seed)
        lo1, lo2 = rng.uniform(-1, 1, 3), rng.uniform(-1, 1, 3)
        a = Aabb(lo1, lo1 + rng.uniform(0.1, 2, 3))
        b = Aabb(lo2, lo2 + rng.uniform(0.1, 2, 3))
        v = iou(a, b)
        assert 0.0 <= v <= 1.0
        assert v == iou(b, a)

    def test_montecarlo_agreement(self):
        rng = np.random.default_rng(11)
        for i in range(20):
            lo1, lo2 = rng.uniform(0, 0.5, 3), rng.uniform(0, 0.5, 3)
            a = Aabb(lo1, lo1 + rng.uniform(0.3, 0.5, 3))
            b = Aabb(lo2, lo2 + rng.uniform(0.3, 0.5, 3))
            estimate = iou_montecarlo(a.lo, a.hi, b.lo, b.hi, n_samples=200_000, seed=100 + i)
            assert abs(iou(a, b) - estimate) <= 0.01


class TestChamfer:
    def test_self_zero(self):
        rng = np.random.default_rng(7)
        c = random_cloud(rng)
        assert chamfer(c, c) == 0.0

    def test_single_points(self):
        assert chamfer(cloud((0, 0, 0)), cloud((1, 0, 0))) == 2.0

    def test_two_vs_one(self):
        assert chamfer(cloud((0, 0, 0), (2, 0, 0)), cloud((1, 0, 0))) == 3.0

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_symmetry(self, seed):
        rng = np.random.default_rng(seed)
        a, b = random_cloud(rng, 16), random_cloud(rng, 24)
        assert chamfer(a, b) == chamfer(b, a)

    def test_matches_bruteforce_exactly(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            a, b = random_cloud(rng, 128), random_cloud(rng, 96)
            assert chamfer(a, b) == chamfer_bruteforce(a.points, b.points)


class TestHullArea:
    def test_unit_square(self):
        pts = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
        assert hull_area_2d(pts) == pytest.approx(1.0, abs=1e-12)

    def test_triangle(self):
        assert hull_area_2d(np.array([[0, 0], [1, 0], [0, 1.0]])) == pytest.approx(0.5)

    def test_collinear(self):
        pts = np.column_stack((np.linspace(0, 1, 5), np.linspace(0, 2, 5)))
        assert hull_area_2d(pts) == 0.0

    def test_too_few_points(self):
        assert hull_area_2d(np.array([[0.0, 0.0]])) == 0.0

    def test_interior_points_ignored(self):
        square = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
        rng = np.random.default_rng(9)
        inner = rng.uniform(0.2, 0.8, size=(50, 2))
        assert hull_area_2d(np.vstack((square, inner))) == pytest.approx(1.0, abs=1e-9)


class TestFileFormats:
    def test_xyz_roundtrip(self, tmp_path):
        rng = np.random.default_rng(13)
        c = random_cloud(rng, 32)
        path = tmp_path / "c.xyz"
        save_xyz(path, c)
        back = load_xyz(path)
        np.testing.assert_array_equal(back.points, c.points)

    def test_bin_roundtrip(self, tmp_path):
        rng = np.random.default_rng(14)
        c = random_cloud(rng, 32)
        path = tmp_path / "c.bin"
        save_bin(path, c)
        back = load_bin(path)
        # storage is float32; loader promotes back to float64
        np.testing.assert_allclose(back.points, c.points, atol=1e-6)
        assert back.points.dtype == np.float64

    def test_min_points_enforced(self, tmp_path):
        path = tmp_path / "small.xyz"
        path.write_text("0 0 0\n1 1 1\n")
        with pytest.raises(ValueError, match="ingestion minimum"):
            load_xyz(path)
        assert load_xyz(path, min_points=2).count == 2

    def test_bin_truncated_rejected(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"\x00" * 10)  # not a multiple of 12
        with pytest.raises(ValueError, match="triplets"):
            load_bin(path)

    def test_xyz_wrong_columns(self, tmp_path):
        path = tmp_path / "bad.xyz"
        path.write_text("0 0\n1 1\n2 2\n3 3\n")
        with pytest.raises(ValueError):
            load_xyz(path)
