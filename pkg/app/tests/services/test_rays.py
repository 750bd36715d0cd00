import pytest

from app.core.config import settings
from app.core.errors import NewtonDiverged
from app.models import Angle, ContinuedFraction, QuadraticMap
from app.services import rays
from app.services.circle import cantor_leaf
from app.services.dynamics import critical_orbit, semidistance
from app.services.rays import _far_field_point, _periodic_period, trace_ray, trace_rays


class TestPeriodOfAngle:
    def test_examples(self):
        assert _periodic_period(Angle(0)) == 1
        assert _periodic_period(Angle(1, 3)) == 2
        assert _periodic_period(Angle(6, 7)) == 3
        assert _periodic_period(Angle(1, 5)) == 4
        assert _periodic_period(Angle(2907, 8191)) == 13

    def test_preperiodic_angles_have_no_period(self):
        assert _periodic_period(Angle(1, 4)) is None
        assert _periodic_period(Angle(1, 6)) is None


class TestTraceRay:
    def test_should_record_every_step(self, golden_map):
        trace = trace_ray(golden_map, Angle(1, 3), depth=3, steps_per_level=4)
        assert len(trace.points) == 3 * 4 + 1
        assert trace.period == 2
        assert trace.level(0) == trace.points[0]

    def test_level_points_hit_the_far_field(self, golden_map):
        angle = Angle(6, 7)
        trace = trace_ray(golden_map, angle, depth=5, steps_per_level=4)
        for k in range(1, 6):
            image = golden_map.iterate(trace.level(k), k)
            target = _far_field_point(golden_map, angle, k, 0.0, trace.radius)
            assert abs(image - target) < 1e-6 * trace.radius

    def test_ray_points_move_inward(self, golden_map):
        trace = trace_ray(golden_map, Angle(6, 7), depth=4, steps_per_level=4)
        moduli = [abs(trace.level(k)) for k in range(5)]
        assert moduli == sorted(moduli, reverse=True)

    def test_zero_ray_lands_at_the_repelling_fixed_point(self, golden_map):
        trace = trace_ray(golden_map, Angle(0), depth=12)
        assert trace.landing_estimate is not None
        assert abs(trace.landing_estimate - golden_map.fixed_points[1]) < 1e-9
        assert trace.landing_residual < settings.RESIDUAL_TOL

    def test_preperiodic_rays_have_no_polished_landing(self, golden_map):
        trace = trace_ray(golden_map, Angle(1, 4), depth=3, steps_per_level=4)
        assert trace.period is None
        assert trace.landing_residual is None

    def test_should_report_divergence_with_the_partial_ray(self, golden_map, monkeypatch):
        monkeypatch.setattr(rays, "_newton", lambda *args, **kwargs: None)
        with pytest.raises(NewtonDiverged) as e:
            trace_ray(golden_map, Angle(1, 3), depth=3, steps_per_level=4)
        assert e.value.level == 1
        assert e.value.to_payload()["level"] == 1
        assert len(e.value.partial.points) == 1

    def test_should_reject_empty_traces(self, golden_map):
        with pytest.raises(ValueError):
            trace_ray(golden_map, Angle(1, 3), depth=0)
        with pytest.raises(ValueError):
            trace_ray(golden_map, Angle(1, 3), depth=2, steps_per_level=0)

    def test_first_point_lies_outside_the_starting_radius(self, golden_map):
        for angle in (Angle(0), Angle(1, 2), Angle(1, 3), Angle(6, 7), Angle(2907, 8191)):
            trace = trace_ray(golden_map, angle, depth=1, steps_per_level=1)
            assert abs(trace.points[0]) >= trace.radius

    def test_image_of_a_ray_is_the_ray_of_the_doubled_angle(self, golden_map):
        angle = Angle(6, 7)
        ray = trace_ray(golden_map, angle, depth=5, steps_per_level=4)
        doubled = trace_ray(golden_map, angle.double(), depth=5, steps_per_level=4)
        for k in range(5):
            w = doubled.level(k)
            assert abs(golden_map(ray.level(k + 1)) - w) < 1e-6 * max(1.0, abs(w))

    def test_zero_ray_lands_at_the_repelling_fixed_point_for_bounded_type_rotations(self, rng):
        for _ in range(20):
            cf = ContinuedFraction(partial_quotients=[rng.randint(1, 3) for _ in range(24)])
            qmap = QuadraticMap.from_cf(cf)
            trace = trace_ray(qmap, Angle(0), depth=12)
            beta = qmap.fixed_points[1]
            assert abs(qmap.derivative(beta)) > 1
            assert trace.landing_estimate is not None
            assert abs(trace.landing_estimate - beta) < 1e-9

    @pytest.mark.slow
    def test_leaf_rays_land_on_cycles_near_the_critical_orbit(self, golden_cf, golden_map):
        # the landing cycles sit beside the Siegel boundary, not on the critical point
        closure = critical_orbit(golden_map, 100_000)
        leaf = cantor_leaf(golden_cf, 6).leaf
        for angle in (leaf.alpha, leaf.beta):
            trace = trace_ray(golden_map, angle, depth=40)
            assert trace.period == 13
            assert trace.landing_estimate is not None
            assert trace.landing_residual < settings.RESIDUAL_TOL
            assert semidistance([trace.landing_estimate], closure) < 0.2


class TestTraceRays:
    def test_should_keep_the_order_of_the_angles(self, golden_map):
        angles = [Angle(0), Angle(1, 3), Angle(2, 3)]
        traces = trace_rays(golden_map, angles, depth=3, steps_per_level=4, threads=3)
        assert [t.angle for t in traces] == angles
        assert [t.period for t in traces] == [1, 2, 2]

    def test_matches_single_traces(self, golden_map):
        angle = Angle(3, 7)
        (parallel,) = trace_rays(golden_map, [angle], depth=3, steps_per_level=4, threads=2)
        assert parallel.points == trace_ray(golden_map, angle, depth=3, steps_per_level=4).points
