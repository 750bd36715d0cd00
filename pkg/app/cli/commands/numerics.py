# cli/commands/numerics.py
from pathlib import Path
from typing import Annotated

import orjson
import typer

from app.cli.deps import (
    AlphaCfOpt,
    AlphaOpt,
    OutOpt,
    ThreadsOpt,
    TimingOpt,
    emit,
    get_map,
    parse_angle,
    resolve_threads,
    start_clock,
)
from app.models import QuadraticMap
from app.services.dynamics import critical_limit_image, critical_orbit, periodic_points, semidistance
from app.services.rays import trace_ray
from app.services.render import render_julia
from app.utils import encode_pgm, write_output

router = typer.Typer()

ReportOpt = Annotated[Path | None, typer.Option("--report", help="Also write a JSON report here.")]


def load_points(path: Path) -> list[complex]:
    """Read a JSON array of [re, im] pairs."""
    try:
        pairs = orjson.loads(path.read_bytes())
        return [complex(re, im) for re, im in pairs]
    except (OSError, orjson.JSONDecodeError, TypeError, ValueError) as e:
        raise typer.BadParameter(f"{path} is not a JSON list of [re, im] pairs") from e


def orbit_or_file(qmap: QuadraticMap, count: int | None, path: Path | None) -> list[complex]:
    if path is not None:
        return load_points(path)
    if count is None:
        raise typer.BadParameter("give an orbit length or a point file for each set")
    return critical_orbit(qmap, count).points


@router.command("render-julia")
def render_julia_command(
    ctx: typer.Context,
    alpha_cf: AlphaCfOpt = None,
    alpha: AlphaOpt = None,
    width: Annotated[int, typer.Option("--width", min=0)] = 512,
    height: Annotated[int, typer.Option("--height", min=0)] = 512,
    center_re: Annotated[float | None, typer.Option("--center-re", help="Default: the critical point.")] = None,
    center_im: Annotated[float | None, typer.Option("--center-im")] = None,
    span: Annotated[float, typer.Option("--span", help="Width of the viewport in the plane.")] = 4.0,
    max_iter: Annotated[int | None, typer.Option("--max-iter", min=1)] = None,
    escape_radius: Annotated[float | None, typer.Option("--escape-radius", min=3.0)] = None,
    threads: ThreadsOpt = None,
    timing: TimingOpt = False,
    out: OutOpt = None,
    report: ReportOpt = None,
) -> None:
    """
    Escape-time rendering of the filled Julia set as a binary PGM.
    """
    started = start_clock(timing)
    qmap = get_map(alpha_cf, alpha)
    c = qmap.critical_point
    center = complex(c.real if center_re is None else center_re, c.imag if center_im is None else center_im)
    image = render_julia(
        qmap,
        width,
        height,
        center=center,
        span=span,
        max_iter=max_iter,
        escape_radius=escape_radius,
        threads=resolve_threads(threads),
    )
    write_output(encode_pgm(image), out)
    if report is not None:
        payload = {"map": qmap.label, "image": image.model_dump(mode="json")}
        emit(ctx, payload, threads=threads, started=started, out=report)


@router.command("trace-ray")
def trace_ray_command(
    ctx: typer.Context,
    angle: Annotated[str, typer.Option("--angle", help="External angle p/q.")],
    alpha_cf: AlphaCfOpt = None,
    alpha: AlphaOpt = None,
    depth: Annotated[int | None, typer.Option("--depth", min=1, help="Levels to trace.")] = None,
    steps: Annotated[int | None, typer.Option("--steps", min=1, help="Points per level.")] = None,
    threads: ThreadsOpt = None,
    timing: TimingOpt = False,
    out: OutOpt = None,
) -> None:
    """
    External ray of the given angle, from the far field toward the Julia set.
    """
    started = start_clock(timing)
    trace = trace_ray(get_map(alpha_cf, alpha), parse_angle(angle), depth, steps)
    emit(ctx, trace, threads=threads, started=started, out=out)


@router.command("orbit")
def orbit(
    ctx: typer.Context,
    count: Annotated[int, typer.Option("--count", min=1, help="Number of forward images.")],
    alpha_cf: AlphaCfOpt = None,
    alpha: AlphaOpt = None,
    involution: Annotated[
        bool, typer.Option("--involution", help="Report the involution image of the orbit.")
    ] = False,
    threads: ThreadsOpt = None,
    timing: TimingOpt = False,
    out: OutOpt = None,
) -> None:
    """
    Forward orbit of the critical point.
    """
    started = start_clock(timing)
    qmap = get_map(alpha_cf, alpha)
    cloud = critical_orbit(qmap, count)
    if involution:
        cloud = critical_limit_image(qmap, cloud)
    emit(ctx, cloud, threads=threads, started=started, out=out)


@router.command("semidistance")
def semidistance_command(
    ctx: typer.Context,
    a_count: Annotated[int | None, typer.Option("--a-count", min=1, help="A = critical orbit of this length.")] = None,
    b_count: Annotated[int | None, typer.Option("--b-count", min=1, help="B = critical orbit of this length.")] = None,
    a_file: Annotated[Path | None, typer.Option("--a-file", help="A as a JSON list of [re, im].")] = None,
    b_file: Annotated[Path | None, typer.Option("--b-file", help="B as a JSON list of [re, im].")] = None,
    alpha_cf: AlphaCfOpt = None,
    alpha: AlphaOpt = None,
    threads: ThreadsOpt = None,
    timing: TimingOpt = False,
    out: OutOpt = None,
) -> None:
    """
    One-sided distance sup over a in A of dist(a, B).
    """
    started = start_clock(timing)
    qmap = get_map(alpha_cf, alpha)
    a = orbit_or_file(qmap, a_count, a_file)
    b = orbit_or_file(qmap, b_count, b_file)
    payload = {"a_size": len(a), "b_size": len(b), "semidistance": semidistance(a, b)}
    emit(ctx, payload, threads=threads, started=started, out=out)


@router.command("periodic-points")
def periodic_points_command(
    ctx: typer.Context,
    period: Annotated[int, typer.Option("--period", min=1, help="Solve P^n(z) = z for this n.")],
    grid: Annotated[int | None, typer.Option("--grid", min=2, help="Seeds per grid side.")] = None,
    alpha_cf: AlphaCfOpt = None,
    alpha: AlphaOpt = None,
    threads: ThreadsOpt = None,
    timing: TimingOpt = False,
    out: OutOpt = None,
) -> None:
    """
    Periodic points of the given period with their multipliers.
    """
    started = start_clock(timing)
    found = periodic_points(get_map(alpha_cf, alpha), period, grid, resolve_threads(threads))
    emit(ctx, found, threads=threads, started=started, out=out)

