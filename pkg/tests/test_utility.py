import numpy as np
import pytest

from pcpriv.geometry import PointCloud
from pcpriv.planes import PlaneErrorComponents
from pcpriv.utility import (
    DegenerateCurve,
    MinMaxStats,
    auc_privacy_utility,
    fit_minmax,
    q1_bbox,
    q2,
)


def cloud(*pts):
    return PointCloud(np.array(pts, dtype=float))


UNIT_CUBE = cloud(*[(x, y, z) for x in (0, 1) for y in (0, 1) for z in (0, 1)])


class TestQ1:
    def test_identical(self):
        assert q1_bbox(UNIT_CUBE, UNIT_CUBE) == 1.0

    def test_disjoint(self):
        shifted = PointCloud(UNIT_CUBE.points + 10.0)
        assert q1_bbox(UNIT_CUBE, shifted) == 0.0

    def test_half_overlap(self):
        shifted = PointCloud(UNIT_CUBE.points + np.array([0.5, 0, 0]))
        assert q1_bbox(UNIT_CUBE, shifted) == pytest.approx(1 / 3, abs=1e-12)

    def test_symmetric(self):
        shifted = PointCloud(UNIT_CUBE.points + np.array([0.3, 0.1, 0]))
        assert q1_bbox(UNIT_CUBE, shifted) == q1_bbox(shifted, UNIT_CUBE)


def comp(angle=0.0, offset=0.0, area=0.0, cd=0.0):
    return PlaneErrorComponents(angle_term=angle, offset_term=offset, area_term=area, cd_term=cd)


class TestMinMax:
    def test_three_point_population(self):
        stats = fit_minmax([comp(angle=2), comp(angle=4), comp(angle=6)])
        normalized = [stats.normalized(comp(angle=v))["angle"] for v in (2, 4, 6)]
        assert normalized == [0.0, 0.5, 1.0]

    def test_constant_population_maps_to_zero(self):
        stats = fit_minmax([comp(angle=3), comp(angle=3)])
        assert stats.normalized(comp(angle=3))["angle"] == 0.0

    def test_singleton(self):
        stats = fit_minmax([comp(offset=0.7)])
        assert stats.normalized(comp(offset=0.7))["offset"] == 0.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            fit_minmax([])

    def test_json_roundtrip(self, tmp_path):
        stats = fit_minmax([comp(angle=1, offset=2, area=3, cd=4), comp()])
        path = tmp_path / "mm.json"
        stats.to_json(path)
        back = MinMaxStats.from_json(path)
        assert back.mins == stats.mins and back.maxs == stats.maxs


class TestQ2:
    def test_identical_planes_full_utility(self):
        population = [comp(), comp(angle=0.5, offset=0.2, area=0.1, cd=1.0)]
        stats = fit_minmax(population)
        assert q2(comp(), stats) == (1.0, 1.0)

    def test_worst_record_zero_dynamic(self):
        worst = comp(angle=0.5, offset=0.2, area=0.1, cd=1.0)
        stats = fit_minmax([comp(), worst])
        q2s, q2d = q2(worst, stats)
        assert q2s == pytest.approx(0.0, abs=1e-12)
        assert q2d == pytest.approx(0.0, abs=1e-12)

    def test_two_record_hand_computation(self):
        first = comp(angle=0.0, offset=0.0, area=0.3, cd=0.4)
        second = comp(angle=0.5, offset=0.2, area=0.3, cd=0.4)
        stats = fit_minmax([first, second])
        q2s, q2d = q2(second, stats)
        assert q2s == pytest.approx(0.0, abs=1e-12)      # 1 - (0.5*1 + 0.5*1)
        assert q2d == pytest.approx(0.5, abs=1e-12)      # area/cd constant -> 0

    def test_range_and_monotonicity(self):
        rng = np.random.default_rng(3)
        population = [comp(*rng.uniform(0, 1, 4)) for _ in range(20)]
        stats = fit_minmax(population)
        values = [q2(c, stats) for c in population]
        for q2s, q2d in values:
            assert 0.0 <= q2s <= 1.0 and 0.0 <= q2d <= 1.0
        # increasing one in-range component strictly decreases both
        mid = comp(angle=0.5, offset=0.5, area=0.5, cd=0.5)
        worse = comp(angle=0.6, offset=0.5, area=0.5, cd=0.5)
        assert q2(worse, stats)[0] < q2(mid, stats)[0]
        assert q2(worse, stats)[1] < q2(mid, stats)[1]


class TestAuc:
    def test_triangle(self):
        assert auc_privacy_utility([(0.0, 1.0), (1.0, 0.0)]) == pytest.approx(0.5, abs=1e-12)

    def test_constant_privacy(self):
        pts = [(u, 0.87) for u in np.linspace(0, 1, 7)]
        assert auc_privacy_utility(pts) == pytest.approx(0.87, abs=1e-12)

    def test_constant_over_partial_span(self):
        pts = [(u, 0.87) for u in np.linspace(0.2, 0.8, 5)]
        assert auc_privacy_utility(pts) == pytest.approx(0.87, abs=1e-12)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(4)
        pts = [(float(u), float(p)) for u, p in zip(rng.uniform(0, 1, 12), rng.uniform(0, 1, 12))]
        base = auc_privacy_utility(pts)
        for _ in range(5):
            rng.shuffle(pts)
            assert auc_privacy_utility(pts) == pytest.approx(base, abs=1e-12)

    def test_duplicate_utilities_averaged(self):
        pts = [(0.0, 0.0), (0.0, 1.0), (1.0, 0.5)]
        assert auc_privacy_utility(pts) == pytest.approx(0.5, abs=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegenerateCurve):
            auc_privacy_utility([(0.5, 0.1), (0.5, 0.9)])

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            auc_privacy_utility([(0.5, 0.5)])

    def test_out_of_range_utility(self):
        with pytest.raises(ValueError):
            auc_privacy_utility([(0.0, 0.5), (1.2, 0.5)])
