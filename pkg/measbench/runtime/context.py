"""
Run context - per-combination state carried through plan and evaluate.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Dict, List, Optional

import numpy as np

from measbench.core.models import Mapping, Task


@dataclass
class RunContext:
    """
    Context of one (molecule, task, method, mapping, seed) combination.

    Collects provenance and warnings for the report row and hands out the
    seeded generator every randomized step draws from.
    """

    molecule: str
    task: Task
    method: str
    mapping: Mapping
    seed: int = 0
    epsilon: float = 1e-3

    # Method parameters copied from the benchmark config
    shadow_frames: Optional[int] = None
    shadow_stratified: bool = True
    derand_budget_factor: int = 10
    derand_qse_frame_cap: Optional[int] = 5000
    derand_confidence: float = 1.0
    max_sweeps: int = 20
    partial_qse_fraction: Optional[float] = None

    trace_id: str = field(default_factory=lambda: uuid.uuid4().hex[:12])
    started_at: datetime = field(default_factory=datetime.now)
    provenance: Dict[str, Any] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)
    history: List[Dict[str, Any]] = field(default_factory=list)

    def __post_init__(self):
        self.task = Task(self.task)
        self.mapping = Mapping(self.mapping)
        self._rng: Optional[np.random.Generator] = None

    @property
    def rng(self) -> np.random.Generator:
        """Generator seeded from the seed alone, so reruns draw identically."""
        if self._rng is None:
            self._rng = np.random.default_rng(self.seed)
        return self._rng

    def add_to_history(self, event: str, data: Optional[Dict[str, Any]] = None):
        self.history.append({
            "timestamp": datetime.now().isoformat(),
            "event": event,
            "data": data or {},
        })

    def warn(self, message: Optional[str]):
        if message and message not in self.warnings:
            self.warnings.append(message)

    def elapsed_ms(self) -> float:
        return (datetime.now() - self.started_at).total_seconds() * 1000

    @property
    def key(self) -> str:
        return f"{self.molecule}/{self.task.value}/{self.method}/{self.mapping.value}/s{self.seed}"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "trace_id": self.trace_id,
            "key": self.key,
            "started_at": self.started_at.isoformat(),
            "elapsed_ms": self.elapsed_ms(),
            "warnings": list(self.warnings),
            "events": [h["event"] for h in self.history],
        }
