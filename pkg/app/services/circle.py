"""Exact dynamics of the angle-doubling map on R/Z."""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from functools import lru_cache

from app.core.config import settings
from app.core.errors import (
    BudgetExceeded,
    DepthTooLarge,
    ExactHit,
    InvalidRotation,
    NoLandingAngle,
    NotSeparated,
)
from app.models import Angle, Arc, ContinuedFraction, CriticalLeaf, LeafEstimate, RotationSetApprox

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)
THIRD = Fraction(1, 3)

# below this many candidates a process pool costs more than the scan
PARALLEL_SCAN_THRESHOLD = 2**12


def double(theta: Angle) -> Angle:
    return theta.double()


def arc_distance(theta: Angle, theta_prime: Angle) -> Fraction:
    d = (theta.fraction - theta_prime.fraction) % 1
    return min(d, 1 - d)


def tent(x: Fraction) -> Fraction:
    """Scaled full tent map on [0, 1/2]: the arc distance after one doubling."""
    return 2 * x if x <= QUARTER else 1 - 2 * x


def reach_third_steps(theta: Angle, theta_prime: Angle, cap: int | None = None) -> int:
    """Number of doublings until the two angles are at arc distance >= 1/3."""
    cap = settings.SEPARATION_CAP if cap is None else cap
    d = arc_distance(theta, theta_prime)
    if d == 0:
        raise ValueError("angles must differ")
    for step in range(cap + 1):
        if d >= THIRD:
            return step
        d = tent(d)
    raise NotSeparated(cap)


def separation_time(
    theta: Angle, theta_prime: Angle, leaf: CriticalLeaf, cap: int | None = None
) -> int:
    """Least m such that the m-th images lie on opposite sides of the leaf chord."""
    cap = settings.SEPARATION_CAP if cap is None else cap
    if theta == theta_prime:
        raise ValueError("angles must differ")
    den = math.lcm(
        theta.denominator, theta_prime.denominator, leaf.alpha.denominator, leaf.beta.denominator
    )
    a = theta.numerator * (den // theta.denominator)
    b = theta_prime.numerator * (den // theta_prime.denominator)
    lo = leaf.alpha.numerator * (den // leaf.alpha.denominator)
    hi = leaf.beta.numerator * (den // leaf.beta.denominator)
    span = (hi - lo) % den
    for m in range(cap + 1):
        if a in (lo, hi) or b in (lo, hi):
            raise ExactHit(f"step {m} maps an angle onto a leaf endpoint")
        if a == b:
            # images coincide from here on
            break
        if ((a - lo) % den < span) != ((b - lo) % den < span):
            return m
        a, b = 2 * a % den, 2 * b % den
    raise NotSeparated(cap)


def _check_budget(q: int, budget: int | None) -> int:
    budget = settings.CYCLE_BUDGET if budget is None else budget
    size = 2**q - 1
    if size > budget:
        logger.warning(f"period {q} needs {size} candidates, budget is {budget}")
        raise BudgetExceeded(f"2^{q} - 1 = {size} candidates exceed the budget {budget}")
    return size


def _major_gap(orbit: list[Angle]) -> Arc:
    best = None
    for i, start in enumerate(orbit):
        end = orbit[(i + 1) % len(orbit)]
        gap = Arc(start, end)
        if best is None or gap.length > best.length:
            best = gap
    assert best is not None
    return best


def _scan_cycles(q: int, start: int, stop: int) -> list[tuple[int, list[int]]]:
    """Rotational period-q cycles of x -> 2x mod 2^q - 1 whose least element lies in [start, stop)."""
    size = 2**q - 1
    found = []
    for k in range(max(start, 1), stop):
        orbit = [k]
        x = 2 * k % size
        while x != k:
            if x < k:
                break
            orbit.append(x)
            x = 2 * x % size
        else:
            if len(orbit) != q:
                continue
            ordered = sorted(orbit)
            position = {v: i for i, v in enumerate(ordered)}
            shift = position[2 * ordered[0] % size]
            if shift and all(
                position[2 * v % size] == (i + shift) % q for i, v in enumerate(ordered)
            ):
                found.append((shift, ordered))
    return found


@lru_cache(maxsize=64)
def _rotational_cycles(q: int, workers: int) -> dict[int, list[RotationSetApprox]]:
    size = 2**q - 1
    if workers > 1 and size >= PARALLEL_SCAN_THRESHOLD:
        bounds = [size * i // workers for i in range(workers + 1)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = pool.map(_scan_cycles, [q] * workers, bounds[:-1], bounds[1:])
            raw = [cycle for chunk in chunks for cycle in chunk]
    else:
        raw = _scan_cycles(q, 1, size)

    cycles: dict[int, list[RotationSetApprox]] = {}
    for p, ordered in raw:
        orbit = [Angle(v, size) for v in ordered]
        cycles.setdefault(p, []).append(
            RotationSetApprox(p=p, q=q, orbit=orbit, major_gap=_major_gap(orbit))
        )
    logger.debug(f"period {q}: rotational cycles for p in {sorted(cycles)}")
    return cycles


def rotational_cycles(
    q: int, budget: int | None = None, workers: int | None = None
) -> dict[int, list[RotationSetApprox]]:
    """Every rotational cycle of period q, grouped by combinatorial rotation number p."""
    if q < 2:
        raise InvalidRotation(f"period must be at least 2, got {q}")
    _check_budget(q, budget)
    return _rotational_cycles(q, workers or 1)


def rotational_cycle(
    p: int, q: int, budget: int | None = None, workers: int | None = None
) -> RotationSetApprox:
    if not (0 < p < q) or math.gcd(p, q) != 1:
        raise InvalidRotation(f"{p}/{q} is not a reduced rotation number in (0, 1)")
    candidates = rotational_cycles(q, budget=budget, workers=workers).get(p, [])
    if len(candidates) != 1:
        raise InvalidRotation(f"expected one rotational cycle for {p}/{q}, found {len(candidates)}")
    logger.info(f"rotational cycle {p}/{q}: {', '.join(str(a) for a in candidates[0].orbit)}")
    return candidates[0]


def cantor_leaf(
    rho_cf: ContinuedFraction, depth: int, budget: int | None = None, workers: int | None = None
) -> LeafEstimate:
    """Critical leaf estimate from the depth-th convergent of the rotation number."""
    if depth < 1 or depth > len(rho_cf):
        raise DepthTooLarge(f"depth {depth} outside the {len(rho_cf)} stored partial quotients")
    convergents = rho_cf.convergents(depth)
    rho = convergents[-1]
    if rho.denominator < 2:
        raise InvalidRotation(f"convergent {rho} is not a rotation number in (0, 1)")
    try:
        leaf = rotational_cycle(rho.numerator, rho.denominator, budget, workers).leaf_estimate
    except BudgetExceeded as e:
        raise DepthTooLarge(e.detail) from e

    error = None
    if depth > 1 and convergents[-2].denominator >= 2:
        prev = convergents[-2]
        prev_leaf = rotational_cycle(prev.numerator, prev.denominator, budget, workers).leaf_estimate
        error = max(
            arc_distance(leaf.alpha, prev_leaf.alpha), arc_distance(leaf.beta, prev_leaf.beta)
        )
    return LeafEstimate(
        p=rho.numerator, q=rho.denominator, leaf=leaf, gap_length=1 - leaf.span, error=error
    )


def pullback_in_siegel_arc(theta: Angle, leaf: CriticalLeaf) -> Angle:
    """Preimage of theta in the half-circle [alpha, alpha + 1/2).

    For a diametral leaf this is the closed arc [alpha, beta] with alpha chosen
    when both preimages are endpoints.
    """
    half = theta.fraction / 2
    if (half - leaf.alpha.fraction) % 1 < HALF:
        return Angle.from_fraction(half)
    return Angle.from_fraction(half + HALF)


def hole_endpoints(leaf: CriticalLeaf, depth: int) -> list[tuple[Angle, Angle]]:
    """Endpoints (alpha_{-n}, beta_{-n}) for n = 1..depth."""
    pairs = []
    a, b = leaf.alpha, leaf.beta
    for _ in range(depth):
        a, b = pullback_in_siegel_arc(a, leaf), pullback_in_siegel_arc(b, leaf)
        pairs.append((a, b))
    return pairs


def angle_itinerary(theta: Angle, leaf: CriticalLeaf, length: int) -> str:
    """Symbols of theta's doubling orbit: 1 inside the closed arc [alpha, beta], else 0."""
    arc = leaf.siegel_arc
    symbols = []
    for _ in range(length):
        symbols.append("1" if arc.contains(theta) else "0")
        theta = theta.double()
    return "".join(symbols)


def angles_with_itinerary(
    word: str, leaf: CriticalLeaf, max_multiple: int = 2, budget: int | None = None
) -> list[Angle]:
    """Periodic angles whose itinerary repeats `word`, at the smallest period multiple that has any."""
    for r in range(1, max_multiple + 1):
        period = r * len(word)
        size = _check_budget(period, budget)
        target = word * r
        found = [
            Angle(k, size)
            for k in range(size)
            if angle_itinerary(Angle(k, size), leaf, period) == target
        ]
        if found:
            logger.info(f"itinerary ({word})^: {len(found)} angle(s) of period {period}")
            return found
    raise NoLandingAngle(f"no angle of period up to {max_multiple * len(word)} has itinerary ({word})^")
