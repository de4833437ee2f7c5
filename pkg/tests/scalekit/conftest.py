"""Pytest configuration for scalekit CLI tests."""

import shutil
import tempfile
from pathlib import Path
from unittest.mock import patch

import pytest
import yaml
from typer.testing import CliRunner


@pytest.fixture
def temp_config_dir():
    """Create a temporary config directory for testing."""
    temp_dir = tempfile.mkdtemp()
    try:
        yield temp_dir
    finally:
        shutil.rmtree(temp_dir, ignore_errors=True)


@pytest.fixture
def runner():
    """Create a CliRunner for testing."""
    return CliRunner()


@pytest.fixture
def mock_config_dir(temp_config_dir, monkeypatch):
    """Point the defaults file at a temporary directory and clear SCALEKIT_* variables.

    The CLI reaches the defaults file only through get_config_path(), which
    looks up user_config_dir in the config module, so one patch is enough.
    """
    for name in ("SCALEKIT_THREADS", "SCALEKIT_LOG_LEVEL", "SCALEKIT_OUT_DIR"):
        monkeypatch.delenv(name, raising=False)
    with patch("src.common.scalekit_config.user_config_dir", return_value=temp_config_dir):
        yield temp_config_dir


@pytest.fixture
def write_manifest(tmp_path):
    """Write a manifest dict to a YAML file and return its path."""
    def _write(data: dict, name: str = "run.yaml") -> Path:
        path = tmp_path / name
        with open(path, "w") as f:
            yaml.safe_dump(data, f)
        return path
    return _write
