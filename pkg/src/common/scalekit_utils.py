"""Utility functions for scalekit output and logging."""

import logging
import math
from pathlib import Path
from typing import Iterable, Sequence

from rich.console import Console
from rich.logging import RichHandler

CSV_SCHEMA_VERSION = 1


def format_number(value: float) -> str:
    """Format a value with 17 significant digits ('nan', 'inf' spelled out)."""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".17g")


def _cell(value) -> str:
    if isinstance(value, str):
        return value
    return format_number(value)


def render_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """CSV text with the schema comment line, a header row and '\\n' line endings."""
    lines = [f"# schema-version: {CSV_SCHEMA_VERSION}", ",".join(header)]
    lines += [",".join(_cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """
    Write a CSV file, creating parent directories.

    Args:
        path: Destination file
        header: Column names
        rows: Row values, formatted with format_number unless already strings

    Returns:
        The path written.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as f:
        f.write(render_csv(header, rows))
    return path


def output_path(prefix: str, suffix: str) -> Path:
    """'<prefix>_<suffix>.csv'; a prefix ending in a separator writes into that directory."""
    if prefix.endswith(("/", "\\")):
        return Path(prefix) / f"{suffix}.csv"
    return Path(f"{prefix}_{suffix}.csv")


def configure_logging(level: str = "WARNING") -> None:
    """Route library logging and warnings through a rich handler on stderr."""
    root = logging.getLogger()
    if not any(isinstance(h, RichHandler) for h in root.handlers):
        handler = RichHandler(console=Console(stderr=True), show_path=False, rich_tracebacks=False)
        handler.setFormatter(logging.Formatter("%(message)s"))
        root.addHandler(handler)
    root.setLevel(level.upper())
    logging.captureWarnings(True)
