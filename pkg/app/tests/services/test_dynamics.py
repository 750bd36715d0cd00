import cmath
from fractions import Fraction

import numpy as np
import pytest

from app.core.config import settings
from app.core.errors import BudgetExceeded, EmptySet, IncompleteRootSetWarning, OverflowEscape
from app.models import Angle, OrbitCloud, QuadraticMap
from app.services.dynamics import (
    GOLDEN_MEAN,
    cf_convergents,
    classify,
    critical_limit_image,
    critical_orbit,
    evaluate,
    involution,
    periodic_points,
    semidistance,
)


class TestMap:
    def test_fixed_points(self, golden_map):
        zero, beta = golden_map.fixed_points
        assert evaluate(golden_map, zero) == 0
        assert abs(evaluate(golden_map, beta) - beta) < 1e-12

    def test_involution_swaps_preimages(self, golden_map, rng):
        for _ in range(100):
            z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
            assert abs(evaluate(golden_map, involution(golden_map, z)) - evaluate(golden_map, z)) < 1e-12

    def test_involution_fixes_the_critical_point(self, golden_map):
        c = golden_map.critical_point
        assert abs(involution(golden_map, c) - c) < 1e-15

    def test_multiplier_at_zero_is_on_the_unit_circle(self, golden_map):
        assert abs(abs(golden_map.derivative(0j)) - 1) < 1e-15
        assert abs(golden_map.lam - cmath.exp(2j * cmath.pi * GOLDEN_MEAN.value())) < 1e-15


class TestContinuedFractions:
    def test_golden_convergents(self):
        assert cf_convergents(GOLDEN_MEAN, 6) == [
            Fraction(1),
            Fraction(1, 2),
            Fraction(2, 3),
            Fraction(3, 5),
            Fraction(5, 8),
            Fraction(8, 13),
        ]

    def test_golden_value(self):
        assert abs(GOLDEN_MEAN.value() - (5**0.5 - 1) / 2) < 1e-14

    def test_classify(self):
        verdict = classify(GOLDEN_MEAN, floor=1, bound=2)
        assert verdict["bounded_type"] and verdict["in_s_tilde"]
        assert verdict["partial_quotients"] == 48
        assert not classify(GOLDEN_MEAN, floor=2, bound=2)["in_s_tilde"]
        assert not classify(GOLDEN_MEAN, floor=1, bound=1)["bounded_type"]


class TestCriticalOrbit:
    def test_should_start_at_the_critical_value(self, golden_map):
        cloud = critical_orbit(golden_map, 3)
        c = golden_map.critical_point
        assert cloud.origin == "critical orbit"
        assert len(cloud.points) == 3
        assert abs(cloud.points[0] - evaluate(golden_map, c)) < 1e-15
        assert abs(cloud.points[2] - golden_map.iterate(c, 3)) < 1e-12

    def test_siegel_orbit_stays_bounded(self, golden_map):
        points = critical_orbit(golden_map, 100_000).as_array()
        assert len(points) == 100_000
        assert np.all(np.abs(points) < 2)

    def test_should_report_escape(self, golden_map, monkeypatch):
        # |P(c)| = 1/4 for every multiplier on the unit circle
        monkeypatch.setattr(settings, "ESCAPE_RADIUS", 0.2)
        with pytest.raises(OverflowEscape):
            critical_orbit(golden_map, 1000)

    def test_should_reject_empty_orbits(self, golden_map):
        with pytest.raises(ValueError):
            critical_orbit(golden_map, 0)

    def test_involution_image(self, golden_map):
        cloud = critical_orbit(golden_map, 50)
        image = critical_limit_image(golden_map, cloud)
        assert image.origin == "involution image"
        for z, w in zip(cloud.points, image.points):
            assert abs(evaluate(golden_map, z) - evaluate(golden_map, w)) < 1e-12


class TestSemidistance:
    def test_examples(self):
        assert semidistance([0j], [3 + 4j]) == 5.0
        assert semidistance([0j, 1j], [0j, 1j]) == 0.0

    def test_should_be_one_sided(self):
        assert semidistance([0j, 10 + 0j], [0j]) == 10.0
        assert semidistance([0j], [0j, 10 + 0j]) == 0.0

    def test_accepts_orbit_clouds(self, golden_map):
        cloud = critical_orbit(golden_map, 100)
        assert semidistance(cloud, cloud) == 0.0
        assert semidistance(cloud, OrbitCloud(points=[0j], origin="preimage cloud")) > 0

    def test_should_refuse_empty_sets(self):
        with pytest.raises(EmptySet):
            semidistance([], [0j])
        with pytest.raises(EmptySet):
            semidistance([0j], np.empty(0, dtype=np.complex128))

    def test_longer_orbits_fill_the_closure_better(self, golden_map):
        orbit = critical_orbit(golden_map, 100_000).points
        coarse = semidistance(orbit, orbit[:1000])
        fine = semidistance(orbit, orbit[:10_000])
        assert fine < coarse


class TestPeriodicPoints:
    def test_fixed_points(self, golden_map):
        found = periodic_points(golden_map, 1, threads=2)
        assert found.complete and found.expected == 2
        points = sorted(found.points, key=abs)
        assert abs(points[0]) < 1e-12
        assert abs(points[1] - (1 - golden_map.lam)) < 1e-12
        multipliers = sorted(found.multipliers, key=abs)
        assert abs(multipliers[0] - golden_map.lam) < 1e-9
        assert abs(multipliers[1] - (2 - golden_map.lam)) < 1e-9

    @pytest.mark.parametrize("period", [2, 3])
    def test_should_find_every_root(self, golden_map, period):
        found = periodic_points(golden_map, period, threads=2)
        assert found.complete
        assert len(found.points) == 2**period
        for z in found.points:
            assert abs(golden_map.iterate(z, period) - z) < settings.RESIDUAL_TOL

    def test_root_set_is_forward_invariant(self, golden_map):
        points = np.array(periodic_points(golden_map, 3, threads=2).points)
        for z in points:
            assert np.min(np.abs(points - evaluate(golden_map, z))) < 1e-8

    def test_roots_are_distinct(self, golden_map):
        points = periodic_points(golden_map, 3, threads=1).points
        gaps = [abs(a - b) for i, a in enumerate(points) for b in points[i + 1 :]]
        assert min(gaps) > settings.DEDUP_TOL

    def test_should_warn_when_seeds_miss_roots(self, golden_map):
        with pytest.warns(IncompleteRootSetWarning):
            found = periodic_points(golden_map, 3, grid=2, threads=1)
        assert not found.complete
        assert len(found.points) < found.expected

    def test_should_respect_the_period_ceiling(self, golden_map):
        with pytest.raises(BudgetExceeded):
            periodic_points(golden_map, settings.MAX_PERIOD + 1)
        with pytest.raises(ValueError):
            periodic_points(golden_map, 0)

    def test_parabolic_map(self):
        qmap = QuadraticMap.from_angle(Angle(1, 2))
        found = periodic_points(qmap, 1, threads=1)
        assert found.complete
        assert sorted(round(z.real, 9) for z in found.points) == [0.0, 2.0]

    def test_fixed_points_are_simple(self, golden_map):
        assert periodic_points(golden_map, 1, threads=1).multiplicities == [1, 1]

    def test_parabolic_cycle_collapses_into_one_multiple_root(self):
        # at rotation 1/3 a period-3 cycle merges with the fixed point 0
        qmap = QuadraticMap.from_angle(Angle(1, 3))
        found = periodic_points(qmap, 3, threads=2)
        assert found.complete
        assert found.found == 8
        assert len(found.points) == 5
        at_zero = [m for z, m in zip(found.points, found.multiplicities) if abs(z) < 1e-6]
        assert at_zero == [4]
        assert sorted(found.multiplicities) == [1, 1, 1, 1, 4]
        for z in found.points:
            assert abs(qmap.iterate(z, 3) - z) < settings.RESIDUAL_TOL

    def test_parabolic_period_two_roots_stay_simple(self):
        found = periodic_points(QuadraticMap.from_angle(Angle(1, 3)), 2, threads=1)
        assert found.complete
        assert found.multiplicities == [1, 1, 1, 1]

    def test_root_count_never_exceeds_the_degree(self):
        for period in (1, 2, 3):
            found = periodic_points(QuadraticMap.from_angle(Angle(1, 3)), period, threads=1)
            assert found.found <= found.expected
            assert len(found.points) <= found.expected
