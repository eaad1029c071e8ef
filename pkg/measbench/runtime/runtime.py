"""
Benchmark runtime - expands a BenchmarkConfig into combinations and runs them.
"""

from __future__ import annotations

import asyncio
import logging
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from measbench.config import get_settings
from measbench.core.errors import ConfigError, MeasbenchError
from measbench.core.models import (
    BenchmarkConfig,
    BenchmarkResult,
    Mapping,
    MethodFamily,
    MethodSpec,
    MoleculeEntry,
    Task,
)
from measbench.core.strategy import MeasurementStrategy
from measbench.registry.registry import MethodRegistry
from measbench.runtime.context import RunContext
from measbench.runtime.executors import BaseExecutor, default_executors
from measbench.runtime.problem import MeasurementProblem, ProblemCache
from measbench.states.cache import StateCache

logger = logging.getLogger(__name__)


@dataclass
class Combination:
    """One report row to produce."""
    molecule: MoleculeEntry
    task: Task
    spec: MethodSpec
    mapping: Mapping
    seed: int


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


class BenchmarkRuntime:
    """
    Benchmark Runtime - plans and evaluates every configured combination.

    The runtime is responsible for:
    - Resolving method names through the registry
    - Rejecting or skipping infeasible method/task pairs
    - Sharing problems (integrals, observables, states) across methods
    - Running combinations with bounded parallelism
    - Turning failures into unsuccessful result rows

    Usage:
        runtime = BenchmarkRuntime()
        results = runtime.execute_sync(BenchmarkConfig.from_yaml("bench.yaml"))
    """

    def __init__(
        self,
        registry: Optional[MethodRegistry] = None,
        problems: Optional[ProblemCache] = None,
    ):
        self.registry = registry or MethodRegistry()
        if problems is None:
            cache_dir = get_settings().cache_dir
            problems = ProblemCache(StateCache(cache_dir) if cache_dir else None)
        self.problems = problems
        self._executors: Dict[MethodFamily, BaseExecutor] = default_executors()

        self._execution_count = 0
        self._failure_count = 0
        self._counter_lock = threading.Lock()

    # ==================== Expansion ====================

    def combinations(self, config: BenchmarkConfig) -> List[Combination]:
        """
        Expand the config into combinations.

        Mapping-independent methods run once, under Jordan-Wigner. Unsupported
        method/task pairs are skipped when `skip_infeasible` is set.

        Raises:
            ConfigError: Unknown method, or infeasible pair without skip_infeasible
        """
        specs = [self.registry.require(name) for name in config.methods]
        combos: List[Combination] = []
        for molecule in config.molecules:
            for task in config.tasks:
                for spec in specs:
                    if not spec.supports(task):
                        message = f"{spec.name} is not defined for the {task.value} task"
                        if not config.skip_infeasible:
                            raise ConfigError(message)
                        logger.info(f"Skipping {molecule.label}: {message}")
                        continue
                    mappings = [Mapping.JW] if spec.mapping_independent else config.mappings
                    for mapping in mappings:
                        for seed in config.seeds:
                            combos.append(Combination(molecule, task, spec, mapping, seed))
        logger.info(f"{config.name}: {len(combos)} combinations")
        return combos

    # ==================== Execution ====================

    async def run(self, config: BenchmarkConfig) -> List[BenchmarkResult]:
        """Run every combination; results are sorted by (molecule, task, method, mapping, seed)."""
        combos = self.combinations(config)
        semaphore = asyncio.Semaphore(config.max_parallel)

        async def guarded(combo: Combination) -> BenchmarkResult:
            async with semaphore:
                return await asyncio.to_thread(self.execute_combination, combo, config)

        results = await asyncio.gather(*(guarded(c) for c in combos))
        return sorted(results, key=lambda r: r.sort_key)

    def execute_sync(self, config: BenchmarkConfig) -> List[BenchmarkResult]:
        """Synchronous execution wrapper."""
        return asyncio.run(self.run(config))

    def context_for(self, combo: Combination, config: BenchmarkConfig) -> RunContext:
        return RunContext(
            molecule=combo.molecule.label,
            task=combo.task,
            method=combo.spec.name,
            mapping=combo.mapping,
            seed=combo.seed,
            epsilon=config.epsilon,
            shadow_frames=config.shadow_frames,
            shadow_stratified=config.shadow_stratified,
            derand_budget_factor=config.derand_budget_factor,
            derand_qse_frame_cap=config.derand_qse_frame_cap,
            derand_confidence=config.derand_confidence,
            max_sweeps=config.max_sweeps,
            partial_qse_fraction=config.partial_qse_fraction,
        )

    def execute_combination(self, combo: Combination, config: BenchmarkConfig) -> BenchmarkResult:
        """Plan and evaluate one combination; failures become unsuccessful rows."""
        context = self.context_for(combo, config)
        base = dict(
            molecule=combo.molecule.label,
            task=combo.task,
            method=combo.spec.name,
            mapping=combo.mapping,
            epsilon=config.epsilon,
            seed=combo.seed,
        )
        try:
            problem = self.problems.get(combo.molecule, combo.task, combo.mapping)
            strategy, metric = self.plan_and_evaluate(combo.spec, problem, context)
        except MeasbenchError as e:
            logger.error(f"{context.key} failed: {e}")
            self._count(failed=True)
            return BenchmarkResult(
                **base, success=False, error=str(e), execution_time_ms=context.elapsed_ms()
            )
        except Exception as e:
            logger.exception(f"{context.key} failed unexpectedly")
            self._count(failed=True)
            return BenchmarkResult(
                **base,
                success=False,
                error=f"{type(e).__name__}: {e}",
                execution_time_ms=context.elapsed_ms(),
            )

        self._count(failed=False)
        provenance = {
            "seed": combo.seed,
            "checksum": problem.integrals.checksum,
            "n_states": problem.metadata.get("n_states"),
            "integrals": problem.metadata.get("integrals"),
            "e_nuc": problem.metadata.get("e_nuc"),
            "components": problem.metadata.get("components"),
            **context.provenance,
        }
        logger.info(
            f"{context.key}: metric={metric.value:.6g}"
            + (f" +/- {metric.stderr:.2g}" if metric.stderr else "")
        )
        return BenchmarkResult(
            **base,
            metric=metric.value,
            stderr=metric.stderr,
            n_groups=strategy.n_groups,
            n_paulis=problem.observables.n_paulis,
            lower_bound=metric.lower_bound,
            warnings=list(context.warnings),
            provenance=_jsonable(provenance),
            execution_time_ms=context.elapsed_ms(),
        )

    def plan_and_evaluate(
        self,
        spec: MethodSpec,
        problem: MeasurementProblem,
        context: RunContext,
        states: str = "fci",
    ):
        """Returns (strategy, MetricValue)."""
        strategy = self.plan(spec, problem, context)
        executor = self._executors[spec.family]
        return strategy, executor.evaluate(strategy, problem, context, states)

    def plan(
        self, spec: MethodSpec, problem: MeasurementProblem, context: RunContext
    ) -> MeasurementStrategy:
        executor = self._executors[spec.family]
        error = executor.validate(spec, problem)
        if error:
            raise ConfigError(error)
        context.add_to_history("plan_start", {"method": spec.name})
        return executor.plan(spec, problem, context)

    def executor_for(self, spec: MethodSpec) -> BaseExecutor:
        return self._executors[spec.family]

    # ==================== Metrics ====================

    def _count(self, failed: bool):
        with self._counter_lock:
            if failed:
                self._failure_count += 1
            else:
                self._execution_count += 1

    def get_metrics(self) -> Dict[str, Any]:
        """Get runtime metrics."""
        with self._counter_lock:
            return {
                "execution_count": self._execution_count,
                "failure_count": self._failure_count,
                "methods": len(self.registry),
            }

    def reset_metrics(self):
        with self._counter_lock:
            self._execution_count = 0
            self._failure_count = 0


def run_benchmark(
    config: BenchmarkConfig,
    output_dir: Optional[Path] = None,
    runtime: Optional[BenchmarkRuntime] = None,
) -> List[BenchmarkResult]:
    """
    Run a benchmark and write its CSV, JSON and Markdown reports.

    Args:
        config: Benchmark definition
        output_dir: Report directory (config.output_dir when None)
        runtime: Runtime to use (a fresh one when None)

    Returns:
        Sorted result rows
    """
    from measbench.reporting.writers import write_reports

    runtime = runtime or BenchmarkRuntime()
    results = runtime.execute_sync(config)
    write_reports(results, Path(output_dir or config.output_dir), config)
    return results
