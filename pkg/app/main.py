import logging
import sys
from collections.abc import Sequence

import click
import sentry_sdk
import typer
from rich.console import Console
from rich.logging import RichHandler

from app.cli.deps import CliState
from app.cli.main import cli_app
from app.core.config import settings
from app.core.errors import CremerLabError
from app.models import ErrorReport
from app.utils import dump_json

logger = logging.getLogger(__name__)

if settings.SENTRY_DSN and settings.ENVIRONMENT != "local":
    sentry_sdk.init(dsn=str(settings.SENTRY_DSN), enable_tracing=True)


def setup_logging(level: str | None = None) -> None:
    """Log to stderr through rich so stdout carries payloads only."""
    logging.basicConfig(
        level=level or settings.LOG_LEVEL,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), rich_tracebacks=True)],
    )


def run(argv: Sequence[str] | None = None) -> int:
    """Run one subcommand; 0 on success, 1 on usage errors, 2 on operation errors."""
    args = list(sys.argv[1:] if argv is None else argv)
    command = typer.main.get_command(cli_app)
    try:
        result = command.main(
            args=args,
            prog_name=settings.PROJECT_NAME,
            standalone_mode=False,
            obj=CliState(argv=args),
        )
    except click.ClickException as e:
        e.show()
        return 1
    except click.exceptions.Abort:
        return 1
    except CremerLabError as e:
        logger.error(f"{e.name}: {e.detail}")
        report = ErrorReport(**e.to_payload())
        sys.stderr.write(dump_json(report.model_dump(exclude_none=True)).decode("utf-8"))
        sys.stderr.flush()
        return 2
    return result if isinstance(result, int) else 0


def main() -> None:
    setup_logging()
    sys.exit(run())
