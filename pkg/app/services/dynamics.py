import logging
import math
import warnings
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Any

import networkx as nx
import numpy as np
from scipy.spatial import cKDTree

from app.core.config import settings
from app.core.errors import BudgetExceeded, EmptySet, IncompleteRootSetWarning, OverflowEscape
from app.models import ContinuedFraction, OrbitCloud, PeriodicPointSet, QuadraticMap

logger = logging.getLogger(__name__)

# Newton iterates beyond this modulus are abandoned
NEWTON_BLOWUP = 1e8

# |(P^n)'(z) - 1| below this is treated as a multiple root
SIMPLE_ROOT_SLOPE = 1e-6

# rho = (sqrt(5) - 1) / 2, stored to float resolution
GOLDEN_MEAN = ContinuedFraction(partial_quotients=[1] * 48)


def evaluate(qmap: QuadraticMap, z: complex) -> complex:
    return qmap(z)


def involution(qmap: QuadraticMap, z: complex) -> complex:
    """The other preimage of P(z)."""
    return -qmap.lam - z


def cf_convergents(cf: ContinuedFraction, depth: int) -> list[Fraction]:
    return cf.convergents(depth)


def classify(cf: ContinuedFraction, floor: int, bound: int) -> dict[str, Any]:
    """Bounded-type and S~_N verdicts, relative to the stored partial quotients."""
    return {
        "partial_quotients": len(cf),
        "bounded_type": cf.bounded_type(bound),
        "bound": bound,
        "in_s_tilde": cf.in_s_tilde(floor),
        "floor": floor,
    }


def critical_orbit(qmap: QuadraticMap, count: int) -> OrbitCloud:
    """First `count` forward images of the critical point."""
    if count < 1:
        raise ValueError(f"orbit length must be positive, got {count}")
    lam = qmap.lam
    z = qmap.critical_point
    points = []
    for i in range(count):
        z = lam * z + z * z
        if abs(z) > settings.ESCAPE_RADIUS:
            raise OverflowEscape(f"critical orbit left |z| <= {settings.ESCAPE_RADIUS} at step {i + 1}")
        points.append(z)
    logger.debug(f"critical orbit of {qmap.label}: {count} points")
    return OrbitCloud(points=points, origin="critical orbit")


def critical_limit_image(qmap: QuadraticMap, cloud: OrbitCloud) -> OrbitCloud:
    """Pointwise involution of an orbit cloud."""
    lam = qmap.lam
    return OrbitCloud(points=[-lam - z for z in cloud.points], origin="involution image")


def _as_points(cloud: OrbitCloud | Sequence[complex] | np.ndarray) -> np.ndarray:
    values = cloud.as_array() if isinstance(cloud, OrbitCloud) else np.asarray(cloud, dtype=np.complex128)
    return np.column_stack([values.real, values.imag]) if values.size else np.empty((0, 2))


def semidistance(
    a: OrbitCloud | Sequence[complex] | np.ndarray, b: OrbitCloud | Sequence[complex] | np.ndarray
) -> float:
    """One-sided Hausdorff distance: the largest distance from a point of `a` to the set `b`."""
    pa, pb = _as_points(a), _as_points(b)
    if not len(pa) or not len(pb):
        raise EmptySet("semidistance needs two nonempty sets")
    distances, _ = cKDTree(pb).query(pa)
    return float(np.max(distances))


def _newton_periodic(lam: complex, period: int, seeds: np.ndarray, max_iter: int) -> np.ndarray:
    z = seeds.copy()
    active = np.ones(z.shape, dtype=bool)
    with np.errstate(all="ignore"):
        for _ in range(max_iter):
            w = z.copy()
            dw = np.ones_like(z)
            for _ in range(period):
                dw = dw * (2 * w + lam)
                w = lam * w + w * w
            step = (w - z) / (dw - 1)
            step[~np.isfinite(step)] = 0
            z = np.where(active, z - step, z)
            active &= np.abs(z) < NEWTON_BLOWUP
            if not np.any(active & (np.abs(step) > 1e-15 * np.maximum(1, np.abs(z)))):
                break
    return z[active]


def _orbit_with_multiplier(lam: complex, period: int, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w = z.copy()
    dw = np.ones_like(z)
    with np.errstate(all="ignore"):
        for _ in range(period):
            dw = dw * (2 * w + lam)
            w = lam * w + w * w
    return w, dw


def _simple_roots(lam: complex, period: int, z: np.ndarray) -> np.ndarray:
    """Mask of candidates sitting on a well-conditioned simple root.

    The Newton step length estimates the distance to a simple root; near a
    multiple root the slope of P^n(z) - z vanishes and that estimate is noise.
    """
    w, dw = _orbit_with_multiplier(lam, period, z)
    with np.errstate(all="ignore"):
        slope = np.abs(dw - 1)
        error = np.abs(w - z) / slope
    return np.isfinite(error) & (error < settings.DEDUP_TOL) & (slope > SIMPLE_ROOT_SLOPE)


def _dedup(points: np.ndarray, tol: float) -> np.ndarray:
    order = np.lexsort((points.imag, points.real))
    points = points[order]
    coords = np.column_stack([points.real, points.imag])
    tree = cKDTree(coords)
    keep = np.ones(len(points), dtype=bool)
    for i in range(len(points)):
        if not keep[i]:
            continue
        for j in tree.query_ball_point(coords[i], r=tol):
            if j > i:
                keep[j] = False
    return points[keep]


def _contour_count(lam: complex, period: int, center: complex, radius: float) -> tuple[int, complex]:
    """Number and sum of the roots of P^n(z) - z inside a circle, by the argument principle.

    The circle must stay clear of roots; the trapezoid rule on it converges
    geometrically.
    """
    nodes = settings.CONTOUR_POINTS
    unit = np.exp(2j * np.pi * np.arange(nodes) / nodes)
    z = center + radius * unit
    w, dw = _orbit_with_multiplier(lam, period, z)
    with np.errstate(all="ignore"):
        weights = (dw - 1) / (w - z) * unit * (radius / nodes)
    if not np.all(np.isfinite(weights)):
        return 0, 0j
    return int(round(float(np.sum(weights).real))), complex(np.sum(weights * z))


def _clusters(points: np.ndarray, radius: float) -> list[np.ndarray]:
    """Single-linkage groups of points, largest first."""
    coords = np.column_stack([points.real, points.imag])
    links = nx.Graph()
    links.add_nodes_from(range(len(points)))
    links.add_edges_from(cKDTree(coords).query_pairs(radius))
    groups = [points[sorted(component)] for component in nx.connected_components(links)]
    return sorted(groups, key=len, reverse=True)


def _multiple_roots(
    lam: complex, period: int, slow: np.ndarray, known: list[tuple[complex, int]]
) -> list[tuple[complex, int]]:
    """Roots hiding under clouds of slowly converging Newton candidates.

    Each cloud is enclosed in a circle; the roots counted inside that are not
    already known collapse to one root at their mean with their total as
    multiplicity.
    """
    if not len(slow):
        return []
    found: list[tuple[complex, int]] = []
    for group in _clusters(slow, settings.CLUSTER_RADIUS):
        center = complex(group.mean())
        radius = max(2 * float(np.max(np.abs(group - center))), settings.CLUSTER_RADIUS)
        count, total = _contour_count(lam, period, center, radius)
        for z, m in known + found:
            if abs(z - center) < radius:
                count -= m
                total -= m * z
        if count < 1:
            continue
        logger.debug(
            f"period {period}: {len(group)} slow candidates enclose a root of multiplicity {count}"
        )
        found.append((total / count, count))
    return found


def _merge(roots: list[tuple[complex, int]], tol: float) -> list[tuple[complex, int]]:
    merged: list[tuple[complex, int]] = []
    for z, m in roots:
        for i, (w, n) in enumerate(merged):
            if abs(z - w) < tol:
                merged[i] = (w, n + m)
                break
        else:
            merged.append((z, m))
    return merged


def periodic_points(
    qmap: QuadraticMap, period: int, grid: int | None = None, threads: int | None = None
) -> PeriodicPointSet:
    """Solutions of P^n(z) = z by multi-start Newton, deduplicated and counted with multiplicity.

    Seeds form a grid x grid lattice on the square of half-width 2 around the
    critical point, which contains the filled Julia set. Candidates whose
    Newton step has shrunk below DEDUP_TOL on a nonvanishing slope are simple
    roots. The rest that still pass the residual check surround multiple
    roots, as at parabolic parameters, and are resolved by contour counting.
    The reported roots never exceed the degree 2^n counted with multiplicity.
    """
    if period < 1:
        raise ValueError(f"period must be positive, got {period}")
    if period > settings.MAX_PERIOD:
        raise BudgetExceeded(f"period {period} exceeds the search ceiling {settings.MAX_PERIOD}")
    expected = 2**period
    side = grid or max(64, 4 * math.ceil(math.sqrt(expected)))
    axis = np.linspace(-2.0, 2.0, side)
    seeds = (qmap.critical_point + axis[None, :] + 1j * axis[:, None]).ravel()

    lam = qmap.lam
    workers = threads or settings.threads
    chunks = np.array_split(seeds, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        found = list(
            pool.map(lambda c: _newton_periodic(lam, period, c, settings.NEWTON_MAX_ITER), chunks)
        )
    candidates = np.concatenate(found) if found else np.empty(0, dtype=np.complex128)

    image, _ = _orbit_with_multiplier(lam, period, candidates)
    with np.errstate(all="ignore"):
        accepted = candidates[np.abs(image - candidates) < settings.RESIDUAL_TOL]
    sharp = _simple_roots(lam, period, accepted)
    simple: list[tuple[complex, int]] = []
    if np.any(sharp):
        simple = [(complex(z), 1) for z in _dedup(accepted[sharp], settings.DEDUP_TOL)]
    multiple = _multiple_roots(lam, period, accepted[~sharp], simple)
    roots = _merge(multiple + simple, settings.DEDUP_TOL)

    total = sum(m for _, m in roots)
    if total > expected:
        logger.warning(f"period {period}: counted {total} roots, more than the degree {expected}")
        warnings.warn(
            f"counted {total} roots for period {period}, more than the degree {expected}; "
            "keeping those certified first",
            IncompleteRootSetWarning,
            stacklevel=2,
        )
        kept: list[tuple[complex, int]] = []
        for z, m in roots:
            if sum(n for _, n in kept) + m <= expected:
                kept.append((z, m))
        roots = kept
    elif total < expected:
        logger.warning(f"period {period}: found {total} of {expected} roots of P^n(z) = z")
        warnings.warn(
            f"found {total} of {expected} roots for period {period}",
            IncompleteRootSetWarning,
            stacklevel=2,
        )

    points = np.array([z for z, _ in roots], dtype=np.complex128)
    _, multipliers = _orbit_with_multiplier(lam, period, points)
    return PeriodicPointSet(
        period=period,
        points=[complex(z) for z in points],
        multipliers=[complex(m) for m in multipliers],
        multiplicities=[m for _, m in roots],
        expected=expected,
        complete=total == expected,
    )
