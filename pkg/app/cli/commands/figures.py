# cli/commands/figures.py
from pathlib import Path
from typing import Annotated

import typer

from app.cli.deps import (
    AlphaCfOpt,
    OutOpt,
    ThreadsOpt,
    TimingOpt,
    emit,
    get_cf,
    parse_word,
    resolve_threads,
    start_clock,
)
from app.services.figures import (
    LAYOUT_ORDER,
    LEAF_DEPTH,
    U_WORD,
    V_WORD,
    figure1,
    figure2_layout,
    figure3_report,
)
from app.utils import encode_graph, encode_pgm, write_output

router = typer.Typer()

LeafDepthOpt = Annotated[int, typer.Option("--leaf-depth", min=1, help="Convergent index of the leaf.")]
RayDepthOpt = Annotated[int | None, typer.Option("--ray-depth", min=1, help="Levels per traced ray.")]


@router.command("figure1")
def figure1_command(
    ctx: typer.Context,
    image_out: Annotated[Path, typer.Option("--image", help="PGM output file.")] = Path("figure1.pgm"),
    alpha_cf: AlphaCfOpt = None,
    leaf_depth: Annotated[
        int | None,
        typer.Option("--leaf-depth", min=1, help="Convergent index of the leaf; deepest within budget."),
    ] = None,
    width: Annotated[int, typer.Option("--width", min=1)] = 512,
    height: Annotated[int, typer.Option("--height", min=1)] = 512,
    span: Annotated[float, typer.Option("--span")] = 4.0,
    max_iter: Annotated[int | None, typer.Option("--max-iter", min=1)] = None,
    ray_depth: RayDepthOpt = None,
    threads: ThreadsOpt = None,
    timing: TimingOpt = False,
    out: OutOpt = None,
) -> None:
    """
    Julia set of the Siegel map with the two rays at the critical-leaf angles.
    """
    started = start_clock(timing)
    image, report = figure1(
        get_cf(alpha_cf),
        leaf_depth=leaf_depth,
        width=width,
        height=height,
        span=span,
        max_iter=max_iter,
        ray_depth=ray_depth,
        threads=resolve_threads(threads),
    )
    write_output(encode_pgm(image), image_out)
    emit(ctx, report, threads=threads, started=started, out=out)


@router.command("figure2-layout")
def figure2_layout_command(
    n: Annotated[int, typer.Option("--n", min=0, help="Order of the tree.")] = LAYOUT_ORDER,
    out: OutOpt = None,
) -> None:
    """
    The labeled tree A_5 as a graph file.
    """
    write_output(encode_graph(figure2_layout(n)), out)


@router.command("figure3-report")
def figure3_report_command(
    ctx: typer.Context,
    u: Annotated[str, typer.Option("--u")] = U_WORD,
    v: Annotated[str, typer.Option("--v")] = V_WORD,
    alpha_cf: AlphaCfOpt = None,
    leaf_depth: LeafDepthOpt = LEAF_DEPTH,
    ray_depth: RayDepthOpt = None,
    threads: ThreadsOpt = None,
    timing: TimingOpt = False,
    out: OutOpt = None,
) -> None:
    """
    Construction plan for two periodic points with the rays toward them (Siegel-side analogue).
    """
    started = start_clock(timing)
    report = figure3_report(
        parse_word(u),
        parse_word(v),
        get_cf(alpha_cf),
        leaf_depth=leaf_depth,
        ray_depth=ray_depth,
        threads=resolve_threads(threads),
    )
    emit(ctx, report, threads=threads, started=started, out=out)
