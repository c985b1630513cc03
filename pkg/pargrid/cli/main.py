"""
Command-line front end.

    pargrid bench  --kernel sar --workers 1,2,4 [--out r.csv] [--plot r.svg]
    pargrid verify --kernel batch --workers 1,2,4
    pargrid amdahl --fraction 0.9 [--workers 1,2,4,8,16,32]
"""

import sys
from pathlib import Path
from typing import List, Optional, Sequence

import click
from pydantic import ValidationError

from ..config.settings import get_settings
from ..exceptions import UsageError
from ..kernels.registry import KERNELS
from ..logging_config import configure_logging
from ..models.run_spec import RunSpec
from .runner import EXIT_USAGE, err_console, read_config_file, run


class WorkerList(click.ParamType):
    """Comma-separated worker counts, e.g. ``1,2,4``."""

    name = "workers"

    def convert(self, value, param, ctx) -> List[int]:
        if isinstance(value, list):
            return value
        try:
            counts = [int(part) for part in str(value).split(",")]
        except ValueError:
            self.fail(f"{value!r} is not a comma-separated list of integers", param, ctx)
        if any(count < 1 for count in counts):
            self.fail(f"every worker count must be ≥ 1, got {value!r}", param, ctx)
        return counts


WORKERS = WorkerList()


def kernel_option(f):
    return click.option("--kernel", "kernel_id", type=click.Choice(list(KERNELS)), required=True)(f)


def common_options(f):
    options = [
        click.option("--workers", type=WORKERS, default="1", show_default=True),
        click.option("--backend", type=click.Choice(["inproc", "socket"]), default="inproc", show_default=True),
        click.option("--config", "config_path", type=click.Path(dir_okay=False, path_type=Path)),
        click.option("--seed", type=click.IntRange(0, (1 << 64) - 1)),
        click.option("--timeout-s", "timeout_s", type=click.FloatRange(min=0, min_open=True)),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def _build(subcommand: str, **values) -> RunSpec:
    # Seed precedence: flag, then config file, then the model default.
    if values.get("seed") is None:
        values.pop("seed", None)
        config_path = values.get("config_path")
        if config_path is not None:
            try:
                seed = read_config_file(config_path).get("seed")
            except UsageError as e:
                raise click.UsageError(str(e)) from e
            if seed is not None:
                try:
                    values["seed"] = int(seed)
                except ValueError:
                    raise click.UsageError(f"config seed {seed!r} is not an integer") from None
    try:
        return RunSpec(subcommand=subcommand, **values)
    except ValidationError as e:
        messages = "; ".join(error["msg"] for error in e.errors())
        raise click.UsageError(messages) from e


@click.group(help="SPMD distributed-array runtime and benchmark suite.")
def cli():
    pass


@cli.command(help="Time a kernel across worker counts and report speedup.")
@kernel_option
@common_options
@click.option("--trials", type=click.IntRange(min=1), default=3, show_default=True)
@click.option("--out", "output_path", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--plot", "plot_path", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--fraction", type=click.FloatRange(0, 1), help="Declared parallel fraction for the Amdahl bound.")
def bench(**values) -> RunSpec:
    return _build("bench", **values)


@cli.command(help="Check parallel kernels against their serial oracles.")
@kernel_option
@common_options
def verify(**values) -> RunSpec:
    return _build("verify", **values)


@cli.command(help="Print the Amdahl speedup limit and per-P bounds.")
@click.option("--fraction", type=click.FloatRange(0, 1), required=True)
@click.option("--workers", type=WORKERS, default="1,2,4,8,16,32", show_default=True)
def amdahl(**values) -> RunSpec:
    return _build("amdahl", **values)


def parse_args(argv: Sequence[str]) -> RunSpec:
    """Map argv to a validated ``RunSpec``; any problem raises ``UsageError`` with help text.

    ``--help`` is the one other outcome: the help is printed and
    ``click.exceptions.Exit`` (exit code 0) is raised for ``main`` to return.
    """

    try:
        result = cli.main(args=list(argv), prog_name="pargrid", standalone_mode=False)
    except click.ClickException as e:
        message = e.format_message()
        ctx = getattr(e, "ctx", None)
        if ctx is not None and "Usage:" not in message:
            message = f"{message}\n\n{ctx.get_help()}"
        raise UsageError(message) from e

    if not isinstance(result, RunSpec):
        # --help printed; click reports its exit code instead of a command result
        raise click.exceptions.Exit(result or 0)
    return result


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        settings = get_settings()
    except ValidationError as e:
        err_console.print(f"invalid PARGRID_* environment: {e}", markup=False)
        return EXIT_USAGE
    configure_logging(settings.log_level)

    try:
        spec = parse_args(argv)
    except click.exceptions.Exit as e:
        return e.exit_code
    except UsageError as e:
        err_console.print(f"usage error: {e}", markup=False)
        return EXIT_USAGE
    return run(spec, settings=settings)


if __name__ == "__main__":
    sys.exit(main())
