"""
Report writers - CSV rows, a JSON dump with provenance and a Markdown summary.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from jinja2 import Environment, PackageLoader

from measbench.core.models import BenchmarkConfig, BenchmarkResult

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "molecule",
    "task",
    "method",
    "mapping",
    "epsilon",
    "metric_millions",
    "stderr_millions",
    "n_groups",
    "n_paulis",
    "seed",
]

_environment = Environment(
    loader=PackageLoader("measbench.reporting", "templates"),
    keep_trailing_newline=True,
    autoescape=False,
)


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def csv_row(result: BenchmarkResult) -> Dict[str, str]:
    return {
        "molecule": result.molecule,
        "task": result.task.value,
        "method": result.method,
        "mapping": result.mapping.value,
        "epsilon": _format(result.epsilon),
        "metric_millions": _format(result.metric_millions),
        "stderr_millions": _format(result.stderr_millions),
        "n_groups": _format(result.n_groups),
        "n_paulis": _format(result.n_paulis),
        "seed": str(result.seed),
    }


def render_csv(results: Sequence[BenchmarkResult]) -> str:
    """CSV text; only deterministic columns, so reruns are byte-identical."""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for result in sorted(results, key=lambda r: r.sort_key):
        writer.writerow(csv_row(result))
    return buffer.getvalue()


def render_json(results: Sequence[BenchmarkResult], config: Optional[BenchmarkConfig] = None) -> str:
    rows = []
    for result in sorted(results, key=lambda r: r.sort_key):
        row = result.model_dump(mode="json")
        row["metric_millions"] = result.metric_millions
        row["stderr_millions"] = result.stderr_millions
        rows.append(row)
    document = {
        "config": config.model_dump(mode="json") if config else None,
        "results": rows,
    }
    return json.dumps(document, indent=2)


def render_markdown(
    results: Sequence[BenchmarkResult], config: Optional[BenchmarkConfig] = None
) -> str:
    ordered = sorted(results, key=lambda r: r.sort_key)
    tasks: Dict[str, List[BenchmarkResult]] = {}
    for result in ordered:
        tasks.setdefault(result.task.value, []).append(result)
    epsilon = config.epsilon if config else (ordered[0].epsilon if ordered else 1e-3)
    template = _environment.get_template("summary.md.j2")
    return template.render(
        name=config.name if config else "benchmark",
        epsilon=epsilon,
        tasks=tasks,
        failures=[r for r in ordered if not r.success],
        warnings=[r for r in ordered if r.success and r.warnings],
    )


def write_reports(
    results: Sequence[BenchmarkResult],
    output_dir: Path,
    config: Optional[BenchmarkConfig] = None,
) -> Dict[str, Path]:
    """Write results.csv, results.json and summary.md into `output_dir`."""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "csv": output_dir / "results.csv",
        "json": output_dir / "results.json",
        "markdown": output_dir / "summary.md",
    }
    paths["csv"].write_text(render_csv(results), encoding="utf-8")
    paths["json"].write_text(render_json(results, config), encoding="utf-8")
    paths["markdown"].write_text(render_markdown(results, config), encoding="utf-8")
    logger.info(f"Wrote {len(results)} rows to {output_dir}")
    return paths
