"""Preset figures: the golden-mean Julia set with its leaf rays, the tree A_5, and the
periodic-point strings with the rays aimed at their points."""

import logging

from app.core.config import settings
from app.core.errors import NoLandingAngle
from app.models import (
    ContinuedFraction,
    Figure1Report,
    Figure3Report,
    Figure3Side,
    Image,
    LeafEstimate,
    PullbackTree,
    QuadraticMap,
    RaySummary,
)
from app.services.circle import angles_with_itinerary, cantor_leaf
from app.services.dynamics import GOLDEN_MEAN
from app.services.rays import trace_rays
from app.services.render import overlay, render_julia
from app.services.symbolic import build_tree, plan_construction

logger = logging.getLogger(__name__)

LEAF_DEPTH = 6
MAX_LEAF_DEPTH = 7
LAYOUT_ORDER = 5
U_WORD = "011"
V_WORD = "0110111"


def deepest_leaf_depth(cf: ContinuedFraction, ceiling: int = MAX_LEAF_DEPTH) -> int:
    """Deepest convergent index up to `ceiling` whose rotational cycle fits the cycle budget."""
    depth = 1
    for i, rho in enumerate(cf.convergents(min(ceiling, len(cf))), start=1):
        if rho.denominator >= 2 and 2**rho.denominator - 1 <= settings.CYCLE_BUDGET:
            depth = i
    return depth


def figure1(
    cf: ContinuedFraction = GOLDEN_MEAN,
    *,
    leaf_depth: int | None = None,
    width: int = 512,
    height: int = 512,
    span: float = 4.0,
    max_iter: int | None = None,
    ray_depth: int | None = None,
    threads: int | None = None,
) -> tuple[Image, Figure1Report]:
    """Julia set of the Siegel map for `cf`, overlaid with the rays at the leaf angles.

    Without `leaf_depth` the leaf comes from the deepest convergent the cycle
    budget allows, 8/13 by default and 13/21 once CREMER_LAB_BUDGET reaches 2^21 - 1.
    """
    qmap = QuadraticMap.from_cf(cf)
    estimate = cantor_leaf(cf, deepest_leaf_depth(cf) if leaf_depth is None else leaf_depth)
    angles = [estimate.leaf.alpha, estimate.leaf.beta]
    traces = trace_rays(qmap, angles, depth=ray_depth, threads=threads)

    image = render_julia(
        qmap, width, height, center=qmap.critical_point, span=span, max_iter=max_iter, threads=threads
    )
    image = overlay(image, [trace.points for trace in traces])
    c = qmap.critical_point
    report = Figure1Report(
        map_label=qmap.label,
        rotation=qmap.rotation,
        critical_point=c,
        leaf=estimate,
        image=image,
        rays=[RaySummary.from_trace(trace, c) for trace in traces],
    )
    for ray in report.rays:
        logger.info(f"figure1: ray {ray.angle} lands {ray.distance_to_critical} from the critical point")
    return image, report


def figure2_layout(n: int = LAYOUT_ORDER) -> PullbackTree:
    tree = build_tree(n)
    if not tree.check_invariants():
        raise AssertionError(f"A_{n} is not a tree")
    return tree


def _side(
    word: str,
    qmap: QuadraticMap,
    leaf_estimate: LeafEstimate,
    ray_depth: int | None,
    threads: int | None,
) -> Figure3Side:
    try:
        angles = angles_with_itinerary(word, leaf_estimate.leaf)
    except NoLandingAngle as e:
        logger.warning(f"figure3: {e.detail}")
        return Figure3Side(word=word, angles=[], rays=[], note=e.detail)
    traces = trace_rays(qmap, angles, depth=ray_depth, threads=threads)
    c = qmap.critical_point
    return Figure3Side(
        word=word, angles=angles, rays=[RaySummary.from_trace(t, c) for t in traces]
    )


def figure3_report(
    u_word: str = U_WORD,
    v_word: str = V_WORD,
    cf: ContinuedFraction = GOLDEN_MEAN,
    *,
    leaf_depth: int = LEAF_DEPTH,
    ray_depth: int | None = None,
    threads: int | None = None,
) -> Figure3Report:
    """Construction plan for (u)^ and (v)^ with the rays toward their periodic points."""
    plan = plan_construction(u_word, v_word)
    qmap = QuadraticMap.from_cf(cf)
    estimate = cantor_leaf(cf, leaf_depth)
    return Figure3Report(
        plan=plan,
        leaf=estimate,
        u=_side(plan.u_word, qmap, estimate, ray_depth, threads),
        v=_side(plan.v_word, qmap, estimate, ray_depth, threads),
    )
