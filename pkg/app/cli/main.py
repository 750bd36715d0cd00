import typer

from app.cli.commands import circle, figures, numerics, symbolic
from app.core.config import settings

cli_app = typer.Typer(
    name=settings.PROJECT_NAME,
    help="Symbolic pullback combinatorics and planar dynamics of quadratic Siegel and Cremer maps.",
    no_args_is_help=True,
    add_completion=False,
    pretty_exceptions_enable=False,
)


def include_router(app: typer.Typer, router: typer.Typer) -> None:
    app.registered_commands.extend(router.registered_commands)


include_router(cli_app, circle.router)
include_router(cli_app, symbolic.router)
include_router(cli_app, numerics.router)
include_router(cli_app, figures.router)
