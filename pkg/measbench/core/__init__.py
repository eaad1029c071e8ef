"""Core models, errors and the measurement-strategy interface."""

from measbench.core.errors import (
    ConfigError,
    FragmentError,
    HermiticityError,
    IntegralFormatError,
    IntegralGenerationError,
    MeasbenchError,
    MetricError,
    ModeIndexError,
    PlanError,
    QubitCountMismatchError,
    SectorError,
    ShadowError,
    StateError,
)
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
