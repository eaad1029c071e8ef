"""
Measbench - measurement-cost planning for excited-state VQE

Estimates how many shots QSE and MC-VQE need on a quantum computer, for a
range of Pauli-grouping, classical-shadow and fermionic-fragment methods.

Core Concepts:
- Task: ground energy, QSE dressed observables, or the MC-VQE ensemble energy
- Method: a registered way to measure Pauli products (fc-si, qwc-cs, f3, ...)
- Strategy: the plan or scheme a method builds from cheap proxy states
- Metric: epsilon^2 M(epsilon) of the strategy on the exact states

Usage:
    from measbench import BenchmarkConfig, BenchmarkRuntime

    runtime = BenchmarkRuntime()
    results = runtime.execute_sync(BenchmarkConfig.from_yaml("bench.yaml"))
    for row in results:
        print(row.method, row.metric_millions)
"""

from measbench.core.errors import MeasbenchError
from measbench.core.models import (
    BenchmarkConfig,
    BenchmarkResult,
    Compatibility,
    FrameKind,
    Mapping,
    MethodFamily,
    MethodSpec,
    MetricValue,
    MoleculeEntry,
    Task,
)
from measbench.core.strategy import MeasurementStrategy, VarianceEstimate
from measbench.registry.registry import MethodRegistry
from measbench.runtime.runtime import BenchmarkRuntime, run_benchmark

__version__ = "0.1.0"

__all__ = [
    # Core models
    "BenchmarkConfig",
    "BenchmarkResult",
    "Compatibility",
    "FrameKind",
    "Mapping",
    "MethodFamily",
    "MethodSpec",
    "MetricValue",
    "MoleculeEntry",
    "Task",
    # Strategies
    "MeasurementStrategy",
    "VarianceEstimate",
    # Runtime
    "BenchmarkRuntime",
    "MethodRegistry",
    "run_benchmark",
    # Errors
    "MeasbenchError",
]
