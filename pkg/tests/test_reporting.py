"""Tests for CSV, JSON and Markdown reports."""

import csv
import io
import json

import pytest

from measbench.core.models import BenchmarkConfig, BenchmarkResult, MoleculeEntry
from measbench.reporting import CSV_COLUMNS, render_csv, render_json, render_markdown, write_reports


@pytest.fixture
def results():
    return [
        BenchmarkResult(
            molecule="lih", task="qse", method="fc-si", mapping="jw", epsilon=1e-3, seed=0,
            metric=12.5, n_groups=40, n_paulis=600, lower_bound=True, execution_time_ms=812.0,
        ),
        BenchmarkResult(
            molecule="h2", task="mc", method="qwc-cs", mapping="bk", epsilon=1e-3, seed=1,
            metric=0.75, stderr=0.01, execution_time_ms=3.0,
        ),
        BenchmarkResult(
            molecule="h2", task="mc", method="f3", mapping="jw", epsilon=1e-3, seed=0,
            success=False, error="optimizer exploded",
        ),
        BenchmarkResult(
            molecule="h2", task="mc", method="derand", mapping="jw", epsilon=1e-3, seed=0,
            metric=1.5, n_groups=7, n_paulis=14, warnings=["derandomization topped up 2 frames"],
        ),
    ]


@pytest.fixture
def config(tmp_path):
    return BenchmarkConfig(
        name="smoke",
        molecules=[MoleculeEntry(label="h2", integrals=tmp_path / "h2.fcidump")],
        methods=["fc-si"],
    )


class TestCsv:
    """Tests for the CSV writer."""

    def test_columns_and_order(self, results):
        """Header is fixed; rows follow (molecule, task, method, mapping, seed)."""
        rows = list(csv.DictReader(io.StringIO(render_csv(results))))
        assert list(rows[0].keys()) == CSV_COLUMNS
        assert [(r["molecule"], r["method"]) for r in rows] == [
            ("h2", "derand"), ("h2", "f3"), ("h2", "qwc-cs"), ("lih", "fc-si"),
        ]

    def test_values(self, results):
        """Metrics are written in millions; missing values are empty."""
        rows = {r["method"]: r for r in csv.DictReader(io.StringIO(render_csv(results)))}
        assert float(rows["fc-si"]["metric_millions"]) == pytest.approx(12.5)
        assert float(rows["qwc-cs"]["stderr_millions"]) == pytest.approx(0.01)
        assert rows["f3"]["metric_millions"] == ""
        assert rows["derand"]["n_paulis"] == "14"

    def test_deterministic(self, results):
        """Input order and timing do not change the bytes."""
        shuffled = [r.model_copy(update={"execution_time_ms": 0.0}) for r in reversed(results)]
        assert render_csv(results) == render_csv(shuffled)


class TestJson:
    """Tests for the JSON dump."""

    def test_provenance_and_config(self, results, config):
        """Rows keep errors and warnings; the config is embedded."""
        document = json.loads(render_json(results, config))
        assert document["config"]["name"] == "smoke"
        by_method = {r["method"]: r for r in document["results"]}
        assert by_method["f3"]["error"] == "optimizer exploded"
        assert by_method["fc-si"]["metric_millions"] == pytest.approx(12.5)
        assert by_method["derand"]["warnings"]


class TestMarkdown:
    """Tests for the Markdown summary."""

    def test_sections(self, results, config):
        """One table per task plus failure and warning sections."""
        text = render_markdown(results, config)
        assert text.startswith("# smoke")
        assert "## MC" in text and "## QSE" in text
        assert ">= 12.5" in text
        assert "failed" in text
        assert "## Failures" in text and "optimizer exploded" in text
        assert "## Warnings" in text and "topped up" in text

    def test_write_reports(self, results, config, tmp_path):
        """All three files land in the output directory."""
        paths = write_reports(results, tmp_path / "out", config)
        assert {p.name for p in paths.values()} == {"results.csv", "results.json", "summary.md"}
        assert all(p.exists() for p in paths.values())
        assert paths["csv"].read_text() == render_csv(results)
