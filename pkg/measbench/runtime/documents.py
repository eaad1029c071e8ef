"""
Strategy documents - the JSON written by `measbench plan` and read by `evaluate`.

A document records the problem (integral file, task, mapping) next to the
strategy itself so the exact states can be rebuilt at evaluation time.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Literal

from pydantic import BaseModel

from measbench.core.errors import ConfigError
from measbench.core.models import Mapping, MoleculeEntry, Task
from measbench.core.strategy import MeasurementStrategy
from measbench.fragments.f3 import FragmentPlan
from measbench.grouping.plan import MeasurementPlan, PlanDocument
from measbench.runtime.problem import MeasurementProblem
from measbench.shadows.estimators import ShadowScheme


class StrategyDocument(BaseModel):
    """Serialized strategy plus the problem it was planned for."""
    method: str
    task: Task
    mapping: Mapping
    molecule: MoleculeEntry
    kind: Literal["plan", "fragments", "shadow"]
    payload: Dict[str, Any]

    def save(self, path: Path):
        Path(path).write_text(self.model_dump_json(indent=2), encoding="utf-8")

    @classmethod
    def load(cls, path: Path) -> "StrategyDocument":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"Plan file not found: {path}")
        return cls.model_validate(json.loads(path.read_text(encoding="utf-8")))


def document_for(
    strategy: MeasurementStrategy, problem: MeasurementProblem, molecule: MoleculeEntry
) -> StrategyDocument:
    common = dict(
        method=strategy.method, task=problem.task, mapping=problem.mapping, molecule=molecule
    )
    if isinstance(strategy, MeasurementPlan):
        return StrategyDocument(
            **common, kind="plan", payload=strategy.to_document().model_dump(mode="json")
        )
    if isinstance(strategy, FragmentPlan):
        return StrategyDocument(
            **common, kind="fragments", payload=json.loads(json.dumps(strategy.to_json(), default=float))
        )
    if isinstance(strategy, ShadowScheme):
        return StrategyDocument(
            **common,
            kind="shadow",
            payload={
                "frame_kind": strategy.kind.value,
                "budget": strategy.budget,
                "seed": strategy.seed,
                "stratified": strategy.stratified,
            },
        )
    raise ConfigError(f"Cannot serialize strategy of type {type(strategy).__name__}")


def load_strategy(document: StrategyDocument, problem: MeasurementProblem) -> MeasurementStrategy:
    """Rebuild the strategy against a problem built from the document's molecule."""
    if document.kind == "plan":
        plan = MeasurementPlan.from_document(
            PlanDocument.model_validate(document.payload), problem.observables
        )
        return plan
    if document.kind == "fragments":
        return FragmentPlan.from_json(document.payload)
    return ShadowScheme(
        problem.observables,
        document.payload["frame_kind"],
        document.payload.get("budget", "exact"),
        seed=int(document.payload.get("seed", 0)),
        stratified=bool(document.payload.get("stratified", True)),
    )
