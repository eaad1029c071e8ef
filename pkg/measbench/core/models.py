"""
Measbench Core Models - Shared enums and pydantic records.

Every benchmark revolves around three choices:
- Task: which quantity the measurements feed (ground energy, QSE matrices,
  MC-VQE ensemble energy)
- Method: how the Pauli products are measured (grouping, shadows, fragments)
- Mapping: which fermion-to-qubit encoding produced the Pauli products

The records below are what travels between the registry, the runtime and the
report writers.
"""

from __future__ import annotations

from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from pydantic import BaseModel, Field, field_validator, model_validator


# ============================================================
# Enums
# ============================================================

class Task(str, Enum):
    """Which measurement problem a plan is built for."""
    GROUND = "ground"   # single Hamiltonian, ground-state proxy
    QSE = "qse"         # D(D+1) dressed observables, worst-case cost
    MC = "mc"           # single Hamiltonian, ensemble proxy


class Mapping(str, Enum):
    """Fermion-to-qubit encoding."""
    JW = "jw"
    BK = "bk"


class Compatibility(str, Enum):
    """Joint-measurability relation used to build groups."""
    QWC = "qwc"     # qubit-wise commuting
    FC = "fc"       # fully commuting


class MethodFamily(str, Enum):
    """How a method turns observables into a measurement strategy."""
    DETERMINISTIC = "deterministic"     # Pauli groups with fixed allocations
    SHADOW = "shadow"                   # randomized frames
    DERANDOMIZED = "derandomized"       # greedy frame sequence
    FERMIONIC = "fermionic"             # orbital-rotated fragments


class FrameKind(str, Enum):
    """Measurement frame families for randomized schemes."""
    QWC = "qwc"             # local X/Y/Z bases
    CLIFFORD = "clifford"   # global random Clifford
    MAJORANA = "majorana"   # perfect matching of Majorana indices


# ============================================================
# Method catalogue
# ============================================================

class MethodSpec(BaseModel):
    """A measurement method the runtime knows how to plan and evaluate."""
    name: str = Field(..., description="Method identifier, e.g. fc-si")
    display_name: str = ""
    family: MethodFamily
    description: str = ""

    # Deterministic planners
    compat: Optional[Compatibility] = None
    pipeline: List[str] = Field(
        default_factory=list,
        description="Planner stages applied in order: si, ima, ics",
    )

    # Randomized schemes
    frame_kind: Optional[FrameKind] = None

    tasks: List[Task] = Field(default_factory=lambda: list(Task))
    mapping_independent: bool = False

    @field_validator("pipeline")
    @classmethod
    def validate_pipeline(cls, v: List[str]) -> List[str]:
        allowed = {"si", "ima", "ics"}
        unknown = [stage for stage in v if stage not in allowed]
        if unknown:
            raise ValueError(f"Unknown planner stages: {unknown}")
        return v

    def supports(self, task: Task) -> bool:
        """Whether the method is defined for the task."""
        return task in self.tasks


# ============================================================
# Benchmark configuration
# ============================================================

class MoleculeEntry(BaseModel):
    """One molecular system to benchmark."""
    label: str
    integrals: Path
    n_electrons: Optional[int] = Field(
        default=None,
        description="Overrides the electron count stored in the integral file",
    )
    n_states: int = Field(default=10, ge=1, description="MC-VQE ensemble size")


class BenchmarkConfig(BaseModel):
    """
    Benchmark definition loaded from YAML.

    Each (molecule, task, method, mapping, seed) combination becomes one row
    in the report.
    """
    name: str = "benchmark"
    molecules: List[MoleculeEntry]
    tasks: List[Task] = Field(default_factory=lambda: [Task.QSE, Task.MC])
    methods: List[str]
    mappings: List[Mapping] = Field(default_factory=lambda: [Mapping.JW])
    seeds: List[int] = Field(default_factory=lambda: [0])
    epsilon: float = Field(default=1e-3, gt=0)

    # Method parameters
    shadow_frames: Optional[int] = Field(
        default=None,
        description="Monte Carlo frame budget; None means exact evaluation",
    )
    shadow_stratified: bool = Field(
        default=True,
        description="Shadow metrics use sum_f Pr(f) Var(H_f); False gives the randomized-frame variance",
    )
    derand_budget_factor: int = Field(default=10, ge=1)
    derand_qse_frame_cap: Optional[int] = Field(
        default=5000,
        ge=1,
        description="Upper bound on QSE derandomization frames; each frame costs O(n N_P) updates",
    )
    derand_confidence: float = Field(default=1.0, gt=0)
    max_sweeps: int = Field(default=20, ge=1)
    partial_qse_fraction: Optional[float] = Field(default=None, gt=0, le=1)

    # Execution
    max_parallel: int = Field(default=2, ge=1)
    skip_infeasible: bool = True
    output_dir: Path = Path("results")

    @model_validator(mode="after")
    def validate_labels(self) -> "BenchmarkConfig":
        labels = [m.label for m in self.molecules]
        if len(set(labels)) != len(labels):
            raise ValueError(f"Molecule labels must be unique: {labels}")
        if len(set(self.methods)) != len(self.methods):
            raise ValueError(f"Methods listed more than once: {self.methods}")
        return self

    @classmethod
    def from_yaml(cls, path: Path) -> "BenchmarkConfig":
        """Load from a YAML file, resolving integral paths against its directory."""
        path = Path(path)
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        config = cls(**data)
        base = path.parent
        for molecule in config.molecules:
            if not molecule.integrals.is_absolute():
                molecule.integrals = base / molecule.integrals
        if not config.output_dir.is_absolute():
            config.output_dir = base / config.output_dir
        return config

    def to_yaml(self) -> str:
        """Serialize to YAML."""
        data = self.model_dump(mode="json")
        return yaml.dump(data, default_flow_style=False, sort_keys=False)


# ============================================================
# Results
# ============================================================

class MetricValue(BaseModel):
    """A measurement-cost figure: epsilon^2 * M(epsilon) with its sampling error."""
    value: float
    stderr: float = 0.0
    lower_bound: bool = Field(
        default=False,
        description="Set when only part of the observables were evaluated",
    )
    warning: Optional[str] = None


class BenchmarkResult(BaseModel):
    """One report row."""
    molecule: str
    task: Task
    method: str
    mapping: Mapping
    epsilon: float
    seed: int

    success: bool = True
    metric: Optional[float] = None
    stderr: Optional[float] = None
    n_groups: Optional[int] = None
    n_paulis: Optional[int] = None
    lower_bound: bool = False

    error: Optional[str] = None
    warnings: List[str] = Field(default_factory=list)
    provenance: Dict[str, Any] = Field(default_factory=dict)
    execution_time_ms: float = 0

    @property
    def metric_millions(self) -> Optional[float]:
        """Shot count M(epsilon) in millions."""
        if self.metric is None:
            return None
        return self.metric / self.epsilon**2 / 1e6

    @property
    def stderr_millions(self) -> Optional[float]:
        if self.stderr is None:
            return None
        return self.stderr / self.epsilon**2 / 1e6

    @property
    def sort_key(self) -> tuple:
        return (self.molecule, self.task.value, self.method, self.mapping.value, self.seed)
