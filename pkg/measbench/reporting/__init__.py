"""Benchmark report writers."""

from measbench.reporting.writers import (
    CSV_COLUMNS,
    render_csv,
    render_json,
    render_markdown,
    write_reports,
)

__all__ = ["CSV_COLUMNS", "render_csv", "render_json", "render_markdown", "write_reports"]
