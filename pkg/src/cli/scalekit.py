"""scalekit: scale functions of spectrally negative Levy processes."""

import logging
from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.table import Table

from src.common.scalekit_config import (
    dump_run_config,
    get_config_path,
    get_default_config,
    load_run_config,
    load_settings,
    write_config,
)
from src.common.scalekit_exceptions import ScaleKitError
from src.common.scalekit_runner import CommandResult, run
from src.common.scalekit_utils import configure_logging

logger = logging.getLogger(__name__)

app = typer.Typer(help="Scale functions of spectrally negative Levy processes via skip-free chains")
config_app = typer.Typer(help="Manage user defaults")
app.add_typer(config_app, name="config")

ConfigOption = typer.Option(..., "--config", "-c", help="Experiment manifest (YAML)")
OutOption = typer.Option(None, "--out", "-o", help="Output prefix; a trailing '/' writes into that directory")
ThreadsOption = typer.Option(None, "--threads", "-t", min=1, help="Worker threads (default: SCALEKIT_THREADS or defaults file)")
VerboseOption = typer.Option(False, "--verbose", "-v", help="Log at DEBUG level")


def _fail(exc: ScaleKitError) -> None:
    typer.echo(f"Error[{exc.category}]: {exc}", err=True)
    raise typer.Exit(code=exc.exit_code)


def _print_summary(result: CommandResult) -> None:
    console = Console(width=200)
    table = Table(show_header=True, header_style="bold cyan", title=f"scalekit {result.command}")
    table.add_column("Item", no_wrap=True)
    table.add_column("Value", no_wrap=True)
    for label, value in result.summary:
        table.add_row(label, value)
    for path in result.files:
        table.add_row("file", str(path))
    console.print(table)


def _execute(config_path: Path, out: Optional[str], threads: Optional[int], verbose: bool,
             command: Optional[str]) -> None:
    """Resolve settings (CLI > env > defaults file), run one command, print its summary."""
    try:
        settings = load_settings(get_config_path())
        configure_logging("DEBUG" if verbose else settings.log_level)
        config = load_run_config(config_path)
        effective_threads = threads or config.threads or settings.threads
        prefix = out or config.out or str(Path(settings.out_dir) / config_path.stem)
        logger.debug("running %s with %d thread(s) into %s", command or config.command, effective_threads, prefix)
        result = run(config, prefix, effective_threads, command)
    except ScaleKitError as exc:
        _fail(exc)
    _print_summary(result)


@app.command("scale")
def scale(config: Path = ConfigOption, out: Optional[str] = OutOption,
          threads: Optional[int] = ThreadsOption, verbose: bool = VerboseOption) -> None:
    """Tabulate W_h(x - delta0 h) and Z_h(x) on the grid."""
    _execute(config, out, threads, verbose, "scale")


@app.command("sweep")
def sweep(config: Path = ConfigOption, out: Optional[str] = OutOption,
          threads: Optional[int] = ThreadsOption, verbose: bool = VerboseOption) -> None:
    """Error sweep over nested steps with fitted convergence slopes."""
    _execute(config, out, threads, verbose, "sweep")


@app.command("ruin")
def ruin(config: Path = ConfigOption, out: Optional[str] = OutOption,
         threads: Optional[int] = ThreadsOption, verbose: bool = VerboseOption) -> None:
    """Density of the deficit at ruin before reaching the upper barrier."""
    _execute(config, out, threads, verbose, "ruin")


@app.command("cbi")
def cbi(config: Path = ConfigOption, out: Optional[str] = OutOption,
        threads: Optional[int] = ThreadsOption, verbose: bool = VerboseOption) -> None:
    """Levy density of the CBI limit law."""
    _execute(config, out, threads, verbose, "cbi")


@app.command("diagnose")
def diagnose(config: Path = ConfigOption, out: Optional[str] = OutOption,
             threads: Optional[int] = ThreadsOption, verbose: bool = VerboseOption) -> None:
    """Small-jump functionals, admissible step and expected rates."""
    _execute(config, out, threads, verbose, "diagnose")


@app.command("run")
def run_manifest(config: Path = ConfigOption, out: Optional[str] = OutOption,
                 threads: Optional[int] = ThreadsOption, verbose: bool = VerboseOption) -> None:
    """Run the command named in the manifest."""
    _execute(config, out, threads, verbose, None)


@app.command("check")
def check(config: Path = ConfigOption) -> None:
    """Validate a manifest and print it in normalized form."""
    try:
        parsed = load_run_config(config)
    except ScaleKitError as exc:
        _fail(exc)
    typer.echo(dump_run_config(parsed), nl=False)


@config_app.command("init")
def config_init() -> None:
    """Initialize the defaults file."""
    config_path = get_config_path()

    if config_path.exists():
        typer.echo(f"Error[config]: defaults file already exists at: {config_path}", err=True)
        raise typer.Exit(code=1)

    write_config(config_path, get_default_config())
    typer.echo(f"Configuration initialized at: {config_path}")


@config_app.command("show")
def config_show() -> None:
    """Show effective defaults (environment over defaults file over built-in)."""
    try:
        settings = load_settings(get_config_path())
    except ScaleKitError as exc:
        _fail(exc)
    for key, value in sorted(settings.model_dump().items()):
        typer.echo(f"{key}: {value}")


if __name__ == "__main__":
    app()
