# cli/commands/circle.py
from typing import Annotated

import typer

from app.cli.deps import (
    AlphaCfOpt,
    OutOpt,
    ThreadsOpt,
    TimingOpt,
    emit,
    get_cf,
    parse_angle,
    parse_leaf,
    resolve_threads,
    start_clock,
)
from app.core.config import settings
from app.services.circle import (
    arc_distance,
    cantor_leaf,
    hole_endpoints,
    reach_third_steps,
    rotational_cycle,
    rotational_cycles,
    separation_time,
)

router = typer.Typer()


@router.command("rotation-set")
def rotation_set(
    ctx: typer.Context,
    q: Annotated[int, typer.Option("--q", min=2, help="Period of the rotational cycle.")],
    p: Annotated[int | None, typer.Option("--p", min=1, help="Rotation numerator; all p when absent.")] = None,
    threads: ThreadsOpt = None,
    timing: TimingOpt = False,
    out: OutOpt = None,
) -> None:
    """
    Rotational cycle of the doubling map with rotation number p/q.
    """
    started = start_clock(timing)
    workers = resolve_threads(threads)
    if p is not None:
        payload = rotational_cycle(p, q, workers=workers).model_dump(mode="json")
    else:
        cycles = rotational_cycles(q, workers=workers)
        payload = {
            "q": q,
            "cycles": [c.model_dump(mode="json") for p_ in sorted(cycles) for c in cycles[p_]],
        }
    emit(ctx, payload, threads=threads, started=started, out=out)


@router.command("cantor-leaf")
def cantor_leaf_command(
    ctx: typer.Context,
    depth: Annotated[int, typer.Option("--depth", min=1, help="Convergent index.")] = 6,
    alpha_cf: AlphaCfOpt = None,
    holes: Annotated[int, typer.Option("--holes", min=0, help="Hole endpoint pairs to list.")] = 0,
    threads: ThreadsOpt = None,
    timing: TimingOpt = False,
    out: OutOpt = None,
) -> None:
    """
    Critical leaf estimate from a continued-fraction convergent of the rotation number.
    """
    started = start_clock(timing)
    estimate = cantor_leaf(get_cf(alpha_cf), depth, workers=resolve_threads(threads))
    payload = estimate.model_dump(mode="json")
    if holes:
        payload["holes"] = [[str(a), str(b)] for a, b in hole_endpoints(estimate.leaf, holes)]
    emit(ctx, payload, threads=threads, started=started, out=out)


@router.command("separation")
def separation(
    ctx: typer.Context,
    theta: Annotated[str, typer.Option("--theta", help="First angle p/q.")],
    theta_prime: Annotated[str, typer.Option("--theta-prime", help="Second angle p/q.")],
    leaf_alpha: Annotated[
        str | None, typer.Option("--leaf-alpha", help="Leaf endpoint alpha; golden-mean leaf when absent.")
    ] = None,
    leaf_beta: Annotated[
        str | None, typer.Option("--leaf-beta", help="Leaf endpoint beta (default alpha + 1/2).")
    ] = None,
    depth: Annotated[int, typer.Option("--depth", min=1, help="Convergent index of the preset leaf.")] = 6,
    cap: Annotated[int | None, typer.Option("--cap", min=0, help="Largest step tried.")] = None,
    threads: ThreadsOpt = None,
    timing: TimingOpt = False,
    out: OutOpt = None,
) -> None:
    """
    First doubling step at which two angles fall on opposite sides of the critical leaf.
    """
    started = start_clock(timing)
    a, b = parse_angle(theta), parse_angle(theta_prime)
    if a == b:
        raise typer.BadParameter("angles must differ")
    if leaf_alpha is not None:
        leaf = parse_leaf(leaf_alpha, leaf_beta)
    else:
        leaf = cantor_leaf(get_cf(None), depth, workers=resolve_threads(threads)).leaf
    cap = settings.SEPARATION_CAP if cap is None else cap
    m = separation_time(a, b, leaf, cap)
    distance = arc_distance(a, b)
    payload = {
        "theta": str(a),
        "theta_prime": str(b),
        "leaf": {"alpha": str(leaf.alpha), "beta": str(leaf.beta)},
        "distance": str(distance),
        # 2^k * distance >= 1/3 once 2^k exceeds the denominator
        "reach_third": reach_third_steps(a, b, distance.denominator.bit_length()),
        "m": m,
        "cap": cap,
    }
    emit(ctx, payload, threads=threads, started=started, out=out)
