import cmath
from fractions import Fraction

import pytest
from pydantic import ValidationError

from app.core.errors import DepthTooLarge, ItineraryParseError
from app.models import (
    DELTA,
    DELTA_PRIME,
    Angle,
    Arc,
    ContinuedFraction,
    CriticalLeaf,
    Itinerary,
    PeriodicPointSet,
    PullbackTree,
    QuadraticMap,
    RaySummary,
    RayTrace,
)
from app.services.symbolic import build_tree


class TestAngle:
    def test_should_reduce(self):
        assert Angle(3, 6) == Angle(1, 2)
        assert Angle(-1, 3) == Angle(2, 3)
        assert Angle(7, 7) == Angle(0)
        assert str(Angle(4, 14)) == "2/7"

    def test_parse(self):
        assert Angle.parse("0.25") == Angle(1, 4)
        assert Angle.parse(" 3/7 ") == Angle(3, 7)
        assert Angle.parse("5/4") == Angle(1, 4)
        with pytest.raises(ValueError):
            Angle.parse("abc")
        with pytest.raises(ValueError):
            Angle.parse("1/0")

    def test_should_reject_nonpositive_denominators(self):
        with pytest.raises(ValueError):
            Angle(1, 0)

    def test_ordering_and_addition(self):
        assert sorted([Angle(2, 3), Angle(1, 7), Angle(1, 2)]) == [Angle(1, 7), Angle(1, 2), Angle(2, 3)]
        assert Angle(3, 4) + Fraction(1, 2) == Angle(1, 4)
        assert Angle(1, 3) + Angle(1, 3) == Angle(2, 3)


class TestArc:
    def test_open_arc(self):
        arc = Arc(Angle(1, 4), Angle(3, 4))
        assert arc.length == Fraction(1, 2)
        assert arc.contains(Angle(1, 2))
        assert not arc.contains(Angle(1, 4))
        assert not arc.contains(Angle(3, 4))

    def test_closed_arc(self):
        arc = Arc(Angle(1, 4), Angle(3, 4), (True, True))
        assert arc.contains(Angle(1, 4)) and arc.contains(Angle(3, 4))

    def test_arc_through_zero(self):
        arc = Arc(Angle(3, 4), Angle(1, 4))
        assert arc.contains(Angle(0))
        assert not arc.contains(Angle(1, 2))


class TestCriticalLeaf:
    def test_diameter(self):
        leaf = CriticalLeaf.diameter(Angle(1, 5))
        assert leaf.beta == Angle(7, 10)
        assert leaf.is_diameter
        assert leaf.siegel_arc.contains(leaf.alpha)

    def test_should_validate_endpoints(self):
        with pytest.raises(ValueError):
            CriticalLeaf(Angle(3, 5), Angle(4, 5))
        with pytest.raises(ValueError):
            CriticalLeaf(Angle(1, 5), Angle(1, 7))


class TestItinerary:
    def test_canonical_form(self):
        assert Itinerary("011", "1") == Itinerary("0", "1") == DELTA_PRIME
        assert Itinerary("01", "101") == Itinerary.periodic("011")
        assert Itinerary("", "0101") == Itinerary.periodic("01")
        assert Itinerary("1", "1") == DELTA

    def test_parse_and_print(self):
        assert Itinerary.parse("0101*") == Itinerary("010", "1")
        assert str(Itinerary.parse("0101*")) == "0101*"
        assert Itinerary.parse("(0110111)^") == Itinerary.periodic("0110111")
        assert str(Itinerary.parse("0(01)^")) == "0(01)^"
        assert str(Itinerary.parse("1(01)^")) == "(10)^"
        assert Itinerary.parse("0 1 1*") == Itinerary.parse("011*")

    @pytest.mark.parametrize("text", ["012*", "01", "()^", "1*0"])
    def test_should_reject_malformed_text(self, text):
        with pytest.raises(ItineraryParseError):
            Itinerary.parse(text)

    def test_symbols_and_zeros(self):
        source = Itinerary.periodic("0110111")
        assert source.prefix(8) == "01101110"
        zeros = source.zero_positions()
        assert [next(zeros) for _ in range(6)] == [0, 3, 7, 10, 14, 17]
        assert list(DELTA.zero_positions()) == []

    def test_order(self):
        assert DELTA.order == 0
        assert Itinerary.parse("0101*").order == 3
        assert DELTA.is_pullback and not Itinerary.periodic("01").is_pullback


class TestContinuedFraction:
    def test_from_fraction(self):
        cf = ContinuedFraction.from_fraction(Fraction(3, 8))
        assert cf.partial_quotients == [2, 1, 2]
        assert cf.convergents(3) == [Fraction(1, 2), Fraction(1, 3), Fraction(3, 8)]
        assert cf.convergent(3) == Fraction(3, 8)
        assert abs(cf.value() - 0.375) < 1e-15

    def test_parse(self):
        assert ContinuedFraction.parse("1, 2,3").partial_quotients == [1, 2, 3]
        assert str(ContinuedFraction.parse("1,2,3")) == "1,2,3"

    def test_from_float(self):
        assert ContinuedFraction.from_float(0.5).partial_quotients == [2]
        assert abs(ContinuedFraction.from_float(0.618033988749895).value() - 0.618033988749895) < 1e-12

    def test_should_reject_bad_quotients(self):
        with pytest.raises(ValidationError):
            ContinuedFraction(partial_quotients=[1, 0])
        with pytest.raises(ValidationError):
            ContinuedFraction(partial_quotients=[])

    def test_depth_past_the_stored_prefix(self):
        with pytest.raises(DepthTooLarge):
            ContinuedFraction(partial_quotients=[1, 2]).convergents(3)

    def test_type_predicates(self):
        cf = ContinuedFraction(partial_quotients=[3, 4, 5])
        assert cf.bounded_type(6) and not cf.bounded_type(5)
        assert cf.in_s_tilde(3) and not cf.in_s_tilde(4)


class TestQuadraticMap:
    def test_half_rotation(self):
        qmap = QuadraticMap.from_angle(Angle(1, 2))
        assert abs(qmap.lam + 1) < 1e-15
        assert abs(qmap.critical_point - 0.5) < 1e-15
        assert qmap.label == "1/2"
        assert qmap.exact == Angle(1, 2)

    def test_iterate(self, golden_map):
        z = 0.1 + 0.2j
        assert golden_map.iterate(z, 2) == golden_map(golden_map(z))
        assert golden_map.iterate(z, 0) == z
        assert golden_map.derivative(golden_map.critical_point) == 0

    def test_rotation(self, golden_map):
        assert abs(golden_map.lam - cmath.exp(2j * cmath.pi * golden_map.rotation)) < 1e-15


class TestPullbackTree:
    def test_should_notice_missing_edges(self):
        tree = build_tree(2)
        broken = PullbackTree(n=2, nodes=tree.nodes, edges=tree.edges[:2])
        assert not broken.check_invariants()

    def test_should_notice_cycles(self):
        tree = build_tree(2)
        cyclic = PullbackTree(n=2, nodes=tree.nodes, edges=[(0, 1), (1, 2), (2, 0)])
        assert not cyclic.check_invariants()

    def test_networkx_view(self):
        graph = build_tree(3).to_networkx()
        assert graph.number_of_nodes() == 8
        assert graph.has_edge("1*", "01*")


class TestRaySummary:
    def test_from_trace(self):
        trace = RayTrace(
            angle=Angle(0),
            depth=1,
            steps_per_level=1,
            radius=10.0,
            points=[10 + 0j, 1 + 0j],
            landing_estimate=1 + 0j,
            landing_residual=0.0,
            period=1,
        )
        summary = RaySummary.from_trace(trace, 4 + 4j)
        assert summary.distance_to_critical == 5.0
        assert summary.model_dump(mode="json")["landing"] == [1.0, 0.0]

    def test_missing_landing(self):
        trace = RayTrace(angle=Angle(1, 4), depth=1, steps_per_level=1, radius=10.0, points=[10 + 0j])
        summary = RaySummary.from_trace(trace, 0j)
        assert summary.landing is None and summary.distance_to_critical is None


class TestPeriodicPointSet:
    def test_counts_roots_with_multiplicity(self):
        found = PeriodicPointSet(
            period=1, points=[0j], multipliers=[1 + 0j], multiplicities=[2], expected=2, complete=True
        )
        assert found.found == 2

    def test_should_reject_more_roots_than_the_degree(self):
        with pytest.raises(ValidationError):
            PeriodicPointSet(
                period=1,
                points=[0j, 1 + 0j],
                multipliers=[0j, 0j],
                multiplicities=[2, 1],
                expected=2,
                complete=False,
            )

    def test_should_reject_misaligned_lists(self):
        with pytest.raises(ValidationError):
            PeriodicPointSet(
                period=1, points=[0j], multipliers=[], multiplicities=[1], expected=2, complete=False
            )
