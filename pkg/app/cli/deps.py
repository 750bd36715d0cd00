# cli/deps.py
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Annotated, Any

import typer
from pydantic import BaseModel, ValidationError

from app.core.config import settings
from app.core.errors import ItineraryParseError
from app.models import Angle, ContinuedFraction, CriticalLeaf, Itinerary, QuadraticMap
from app.services.dynamics import GOLDEN_MEAN
from app.utils import build_report, dump_json, write_output


@dataclass
class CliState:
    argv: list[str] = field(default_factory=list)


ThreadsOpt = Annotated[
    int | None, typer.Option("--threads", min=1, help="Worker count (default: machine parallelism).")
]
TimingOpt = Annotated[bool, typer.Option("--timing", help="Record wall time in the report.")]
OutOpt = Annotated[Path | None, typer.Option("--out", help="Output file (default: stdout).")]
AlphaCfOpt = Annotated[
    str | None,
    typer.Option("--alpha-cf", help="Rotation number as partial quotients, e.g. 1,1,1."),
]
AlphaOpt = Annotated[
    str | None,
    typer.Option("--alpha", help="Rotation number as p/q or a decimal."),
]


def get_cf(alpha_cf: str | None) -> ContinuedFraction:
    """Continued fraction from --alpha-cf, the golden mean when absent."""
    if alpha_cf is None:
        return GOLDEN_MEAN
    try:
        return ContinuedFraction.parse(alpha_cf)
    except (ValueError, ValidationError) as e:
        raise typer.BadParameter(f"not a list of positive integers: {alpha_cf!r}") from e


def get_map(alpha_cf: str | None, alpha: str | None) -> QuadraticMap:
    if alpha_cf is not None and alpha is not None:
        raise typer.BadParameter("give either --alpha-cf or --alpha, not both")
    if alpha is None:
        return QuadraticMap.from_cf(get_cf(alpha_cf))
    try:
        if "/" in alpha:
            return QuadraticMap.from_angle(Angle.parse(alpha))
        return QuadraticMap.from_float(float(alpha))
    except ValueError as e:
        raise typer.BadParameter(f"not a rotation number: {alpha!r}") from e


def parse_angle(text: str) -> Angle:
    try:
        return Angle.parse(text)
    except ValueError as e:
        raise typer.BadParameter(str(e)) from e


def parse_itinerary(text: str) -> Itinerary:
    try:
        return Itinerary.parse(text)
    except ItineraryParseError as e:
        raise typer.BadParameter(e.detail) from e


def parse_word(text: str) -> str:
    if not text or set(text) - {"0", "1"}:
        raise typer.BadParameter(f"not a binary word: {text!r}")
    return text


def parse_leaf(alpha: str, beta: str | None) -> CriticalLeaf:
    a = parse_angle(alpha)
    try:
        return CriticalLeaf.diameter(a) if beta is None else CriticalLeaf(a, parse_angle(beta))
    except ValueError as e:
        raise typer.BadParameter(str(e)) from e


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as e:
        raise typer.BadParameter(f"not a rational number: {text!r}") from e


def command_echo(ctx: typer.Context) -> list[str]:
    state = ctx.find_root().obj
    if isinstance(state, CliState) and state.argv:
        return list(state.argv)
    return ctx.command_path.split()[1:]


def resolve_threads(threads: int | None) -> int:
    return threads or settings.threads


def emit(
    ctx: typer.Context,
    payload: BaseModel | dict[str, Any],
    *,
    threads: int | None,
    started: float | None = None,
    out: Path | None = None,
) -> None:
    """Wrap a payload in a report and write it as JSON."""
    timing = time.perf_counter() - started if started is not None else None
    report = build_report(command_echo(ctx), payload, resolve_threads(threads), timing)
    write_output(dump_json(report), out)


def start_clock(timing: bool) -> float | None:
    return time.perf_counter() if timing else None
