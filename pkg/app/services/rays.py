"""External rays by dyadic Newton continuation.

A point of external potential 2^-t on the ray of angle theta is found by
solving P^k(z) = T with k = ceil(t), where T is the far-field point of
potential 2^(k - t) and angle 2^k theta, read off the inverse Boettcher
expansion. Successive points seed each other.
"""

import cmath
import logging
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from functools import partial

from app.core.config import settings
from app.core.errors import NewtonDiverged
from app.models import Angle, QuadraticMap, RayTrace

logger = logging.getLogger(__name__)

# |psi(w)| >= |w| - 1/2 - 3/(8|w|), so the first ray point lies outside |z| = radius
BOETTCHER_MARGIN = 1.0


def _far_field_point(qmap: QuadraticMap, angle: Angle, k: int, e: float, radius: float) -> complex:
    # exact 2^k theta keeps deep levels on the right argument
    target_angle = Angle(angle.numerator * 2**k, angle.denominator)
    w = (radius + BOETTCHER_MARGIN) ** (2**e) * cmath.exp(2j * math.pi * target_angle.value)
    lam = qmap.lam
    c = lam / 2 - lam * lam / 4
    return w - lam / 2 - c / (2 * w)


def _iterate_with_derivative(lam: complex, z: complex, k: int) -> tuple[complex, complex]:
    dz = 1 + 0j
    for _ in range(k):
        dz = dz * (2 * z + lam)
        z = lam * z + z * z
    return z, dz


def _newton(
    lam: complex, k: int, target: complex, seed: complex, trust: float, max_iter: int
) -> complex | None:
    z = seed
    for _ in range(max_iter):
        value, slope = _iterate_with_derivative(lam, z, k)
        if slope == 0:
            return None
        step = (value - target) / slope
        z -= step
        if not cmath.isfinite(z) or abs(z - seed) > trust:
            return None
        if abs(step) <= 1e-14 * max(1.0, abs(z)):
            return z
    return z


def _solve_at(
    qmap: QuadraticMap, angle: Angle, t: float, seed: complex, trust: float, radius: float
) -> complex | None:
    k = math.ceil(t)
    target = _far_field_point(qmap, angle, k, k - t, radius)
    if k == 0:
        return target
    return _newton(qmap.lam, k, target, seed, trust, settings.NEWTON_MAX_ITER)


def _advance(
    qmap: QuadraticMap,
    angle: Angle,
    t0: float,
    z0: complex,
    t1: float,
    trust: float,
    radius: float,
    bisections: int,
) -> complex | None:
    z = _solve_at(qmap, angle, t1, z0, trust, radius)
    if z is not None or bisections == 0:
        return z
    mid = (t0 + t1) / 2
    logger.debug(f"ray {angle}: bisecting step {t0:.4f} -> {t1:.4f}")
    zm = _advance(qmap, angle, t0, z0, mid, trust, radius, bisections - 1)
    if zm is None:
        return None
    return _advance(qmap, angle, mid, zm, t1, trust, radius, bisections - 1)


def _periodic_period(angle: Angle) -> int | None:
    """Period under doubling, or None for strictly preperiodic angles."""
    den = angle.denominator
    if den % 2 == 0:
        return None
    if den == 1:
        return 1
    period, x = 1, 2 % den
    while x != 1:
        x = 2 * x % den
        period += 1
    return period


def _polish_landing(
    qmap: QuadraticMap, seed: complex, period: int
) -> tuple[complex, float] | None:
    lam = qmap.lam
    z = seed
    for _ in range(settings.NEWTON_MAX_ITER):
        value, slope = _iterate_with_derivative(lam, z, period)
        if slope == 1:
            return None
        step = (value - z) / (slope - 1)
        z -= step
        if not cmath.isfinite(z):
            return None
        if abs(step) <= 1e-15 * max(1.0, abs(z)):
            break
    value, _ = _iterate_with_derivative(lam, z, period)
    residual = abs(value - z)
    if residual >= settings.RESIDUAL_TOL:
        return None
    return z, residual


def trace_ray(
    qmap: QuadraticMap,
    angle: Angle,
    depth: int | None = None,
    steps_per_level: int | None = None,
    radius: float | None = None,
) -> RayTrace:
    depth = settings.RAY_DEPTH if depth is None else depth
    steps = settings.RAY_STEPS_PER_LEVEL if steps_per_level is None else steps_per_level
    radius = settings.RAY_RADIUS if radius is None else radius
    if depth < 1 or steps < 1:
        raise ValueError(f"ray depth and steps per level must be positive, got {depth}, {steps}")

    points = [_far_field_point(qmap, angle, 0, 0.0, radius)]
    for j in range(1, depth * steps + 1):
        anchor = points[max(0, j - 1 - steps)]
        trust = 0.5 * abs(points[j - 1] - anchor) or 0.5 * abs(points[j - 1])
        z = _advance(
            qmap,
            angle,
            (j - 1) / steps,
            points[j - 1],
            j / steps,
            trust,
            radius,
            settings.RAY_MAX_BISECTIONS,
        )
        if z is None:
            level = math.ceil(j / steps)
            logger.warning(f"ray {angle}: Newton left its trust region at level {level}")
            partial_trace = RayTrace(
                angle=angle, depth=level - 1, steps_per_level=steps, radius=radius, points=points
            )
            raise NewtonDiverged(level, partial_trace)
        points.append(z)

    deepest = points[-1]
    landing, residual, period = None, None, _periodic_period(angle)
    if period is not None and period <= settings.LANDING_PERIOD_CAP:
        polished = _polish_landing(qmap, deepest, period)
        if polished is not None:
            landing, residual = polished
    if landing is None and abs(deepest - points[-1 - steps]) < settings.GEOMETRIC_TOL:
        landing = deepest
    logger.info(f"traced ray {angle} of {qmap.label}: depth {depth}, landing {landing}")
    return RayTrace(
        angle=angle,
        depth=depth,
        steps_per_level=steps,
        radius=radius,
        points=points,
        landing_estimate=landing,
        landing_residual=residual,
        period=period,
    )


def trace_rays(
    qmap: QuadraticMap,
    angles: Sequence[Angle],
    depth: int | None = None,
    steps_per_level: int | None = None,
    threads: int | None = None,
) -> list[RayTrace]:
    """Rays traced concurrently, returned in the order of `angles`."""
    trace = partial(trace_ray, qmap, depth=depth, steps_per_level=steps_per_level)
    workers = min(threads or settings.threads, max(1, len(angles)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(trace, angles))
