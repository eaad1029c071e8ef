"""Benchmark runtime: problems, executors and the async combination runner."""

from measbench.runtime.context import RunContext
from measbench.runtime.documents import StrategyDocument, document_for, load_strategy
from measbench.runtime.executors import (
    BaseExecutor,
    DerandomizedExecutor,
    DeterministicExecutor,
    FermionicExecutor,
    ShadowExecutor,
)
from measbench.runtime.problem import MeasurementProblem, ProblemCache
from measbench.runtime.runtime import BenchmarkRuntime, Combination, run_benchmark

__all__ = [
    "BaseExecutor",
    "BenchmarkRuntime",
    "Combination",
    "DerandomizedExecutor",
    "DeterministicExecutor",
    "FermionicExecutor",
    "MeasurementProblem",
    "ProblemCache",
    "RunContext",
    "ShadowExecutor",
    "StrategyDocument",
    "document_for",
    "load_strategy",
    "run_benchmark",
]
