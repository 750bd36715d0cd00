# cli/commands/symbolic.py
from enum import Enum
from typing import Annotated

import typer

from app.cli.deps import (
    OutOpt,
    ThreadsOpt,
    TimingOpt,
    emit,
    parse_itinerary,
    parse_word,
    start_clock,
)
from app.models import Itinerary
from app.services.symbolic import (
    basic_length,
    build_tree,
    plan_construction,
    string_of,
    verify_pullback_chain,
)
from app.utils import encode_graph, write_output

router = typer.Typer()


class TreeFormat(str, Enum):
    json = "json"
    graph = "graph"
    text = "text"


@router.command("pullback-tree")
def pullback_tree(
    ctx: typer.Context,
    n: Annotated[int, typer.Option("--n", min=0, help="Order of the tree A_n.")],
    fmt: Annotated[TreeFormat, typer.Option("--format", help="json, graph or text.")] = TreeFormat.json,
    threads: ThreadsOpt = None,
    timing: TimingOpt = False,
    out: OutOpt = None,
) -> None:
    """
    Tree of pullbacks of order at most n with their intersection edges.
    """
    started = start_clock(timing)
    tree = build_tree(n)
    if fmt is TreeFormat.graph:
        write_output(encode_graph(tree), out)
    elif fmt is TreeFormat.text:
        lines = [f"{tree.nodes[a]} -- {tree.nodes[b]}" for a, b in tree.edges]
        write_output(("\n".join([str(tree.nodes[0]), *lines]) + "\n").encode("utf-8"), out)
    else:
        emit(ctx, tree, threads=threads, started=started, out=out)


@router.command("string")
def string(
    ctx: typer.Context,
    count: Annotated[int, typer.Option("--count", min=0, help="Number of pullbacks.")],
    word: Annotated[str | None, typer.Option("--word", help="Period of the dust point, e.g. 011.")] = None,
    source: Annotated[
        str | None, typer.Option("--source", help="Itinerary in head(period)^ or head1* form.")
    ] = None,
    threads: ThreadsOpt = None,
    timing: TimingOpt = False,
    out: OutOpt = None,
) -> None:
    """
    Pullbacks joining the disk to the point with the given itinerary.
    """
    started = start_clock(timing)
    if (word is None) == (source is None):
        raise typer.BadParameter("give exactly one of --word and --source")
    itinerary = Itinerary.periodic(parse_word(word)) if word is not None else parse_itinerary(source)
    s = string_of(itinerary, count)
    payload = s.model_dump(mode="json")
    if itinerary.period != "1":
        payload["basic_length"] = basic_length(itinerary.period)
    emit(ctx, payload, threads=threads, started=started, out=out)


@router.command("plan")
def plan(
    ctx: typer.Context,
    u: Annotated[str, typer.Option("--u", help="Period word of the first point.")],
    v: Annotated[str, typer.Option("--v", help="Period word of the second point.")],
    chain_depth: Annotated[
        int, typer.Option("--chain-depth", min=0, help="Pullback blocks to verify (0 skips).")
    ] = 0,
    threads: ThreadsOpt = None,
    timing: TimingOpt = False,
    out: OutOpt = None,
) -> None:
    """
    Combinatorial data of the two-string construction.
    """
    started = start_clock(timing)
    construction = plan_construction(parse_word(u), parse_word(v))
    payload = construction.model_dump(mode="json", by_alias=True)
    if chain_depth:
        payload["chain_verified"] = verify_pullback_chain(construction, chain_depth)
    emit(ctx, payload, threads=threads, started=started, out=out)
