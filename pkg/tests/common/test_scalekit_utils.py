"""Tests for CSV rendering and output paths."""

from pathlib import Path

from src.common.scalekit_utils import format_number, output_path, render_csv, write_csv


class TestFormatNumber:
    """Test numeric cell formatting."""

    def test_seventeen_significant_digits(self):
        """Test that 0.1 is written with full precision."""
        assert format_number(0.1) == "0.10000000000000001"

    def test_special_values(self):
        """Test nan and signed infinities."""
        assert format_number(float("nan")) == "nan"
        assert format_number(float("inf")) == "inf"
        assert format_number(float("-inf")) == "-inf"

    def test_integers_stay_integers(self):
        """Test that ints are not given a decimal point."""
        assert format_number(3) == "3"
        assert format_number(True) == "1"


class TestRenderCsv:
    """Test CSV text layout."""

    def test_schema_line_and_header(self):
        """Test the schema comment, header and row order."""
        text = render_csv(["x", "W"], [(0.5, 1.0), (1.0, 2.0)])
        assert text.splitlines() == ["# schema-version: 1", "x,W", "0.5,1", "1,2"]
        assert text.endswith("\n")

    def test_string_cells_verbatim(self):
        """Test that strings are written unchanged."""
        assert render_csv(["key", "value"], [("path_class", "A")]).splitlines()[-1] == "path_class,A"

    def test_write_creates_directories(self, tmp_path):
        """Test that parent directories are created."""
        path = write_csv(tmp_path / "nested" / "out.csv", ["x"], [(1.0,)])
        assert path.read_text() == "# schema-version: 1\nx\n1\n"


class TestOutputPath:
    """Test output file naming."""

    def test_prefix_and_suffix(self):
        """Test '<prefix>_<suffix>.csv'."""
        assert output_path("runs/bm", "scale") == Path("runs/bm_scale.csv")

    def test_directory_prefix(self):
        """Test that a trailing separator writes into the directory."""
        assert output_path("runs/", "sweep") == Path("runs") / "sweep.csv"
