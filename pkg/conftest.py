"""Pytest configuration for the test suite."""

import sys
from pathlib import Path

# Tests import the package as ``src.common.*`` / ``src.cli.*``
repo_root = Path(__file__).parent
if str(repo_root.absolute()) not in sys.path:
    sys.path.insert(0, str(repo_root.absolute()))


def pytest_collection_modifyitems(config, items):
    """Order tests marked slow after all others."""
    items.sort(key=lambda item: item.get_closest_marker("slow") is not None)
