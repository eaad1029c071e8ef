"""
Method executors - one per method family.

An executor turns a MethodSpec and a MeasurementProblem into a
MeasurementStrategy (plan), and evaluates the task metric of that strategy
on the exact states (evaluate).
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from typing import Optional

from measbench.core.errors import ConfigError
from measbench.core.models import Mapping, MethodFamily, MethodSpec, MetricValue, Task
from measbench.core.strategy import MeasurementStrategy
from measbench.fragments.f3 import build_fragment_plan
from measbench.grouping.ics import ics_split
from measbench.grouping.ima import iterative_allocation
from measbench.grouping.sorted_insertion import sorted_insertion
from measbench.metrics.figures import ground_metric, mc_metric, qse_metric
from measbench.runtime.context import RunContext
from measbench.runtime.problem import MeasurementProblem
from measbench.shadows.derandomize import derandomized_plan
from measbench.shadows.estimators import ShadowScheme

logger = logging.getLogger(__name__)


class BaseExecutor(ABC):
    """Base class for method executors."""

    family: MethodFamily

    @abstractmethod
    def plan(
        self,
        spec: MethodSpec,
        problem: MeasurementProblem,
        context: RunContext,
    ) -> MeasurementStrategy:
        """Build the measurement strategy from the planning proxies."""

    def validate(self, spec: MethodSpec, problem: MeasurementProblem) -> Optional[str]:
        """
        Check the method applies to the problem.
        Returns error message if not, None if it does.
        """
        if not spec.supports(problem.task):
            return f"{spec.name} is not defined for the {problem.task.value} task"
        if spec.mapping_independent and problem.mapping != Mapping.JW:
            return f"{spec.name} is evaluated under Jordan-Wigner only"
        return None

    def evaluate(
        self,
        strategy: MeasurementStrategy,
        problem: MeasurementProblem,
        context: RunContext,
        states: str = "fci",
    ) -> MetricValue:
        """Task metric of `strategy` on the evaluation states."""
        evaluation = problem.evaluation_states(states)
        if problem.task == Task.GROUND:
            metric = ground_metric(strategy, evaluation[0])
        elif problem.task == Task.QSE:
            metric = qse_metric(
                strategy, evaluation[0], context.partial_qse_fraction, seed=context.seed
            )
        else:
            metric = mc_metric(strategy, evaluation)
        context.warn(metric.warning)
        context.add_to_history("evaluated", {"value": metric.value, "stderr": metric.stderr})
        return metric


class DeterministicExecutor(BaseExecutor):
    """Sorted insertion, then IMA and ICS refinements as the pipeline lists."""

    family = MethodFamily.DETERMINISTIC

    def plan(self, spec, problem, context):
        if spec.compat is None:
            raise ConfigError(f"{spec.name}: deterministic methods need a compatibility relation")
        table = problem.covariance_table()
        plan = sorted_insertion(problem.observables, spec.compat, table=table)
        plan.method = spec.name
        context.add_to_history("si", {"groups": plan.n_groups})

        for stage in spec.pipeline:
            if stage == "ima":
                plan = iterative_allocation(
                    plan, table, cost_mode=problem.task, max_sweeps=context.max_sweeps
                )
                context.add_to_history("ima", {"groups": plan.n_groups})
            elif stage == "ics":
                plan = ics_split(plan, table, cost_mode=problem.task, max_sweeps=context.max_sweeps)
                context.add_to_history("ics", {"groups": plan.n_groups})
        plan.method = spec.name
        plan.provenance["proxy_cost"] = float(plan.proxy_cost(table))
        context.provenance.update(
            {k: v for k, v in plan.provenance.items() if not k.endswith("history")}
        )
        return plan


class ShadowExecutor(BaseExecutor):
    """Classical shadows over QWC, Clifford or Majorana frames."""

    family = MethodFamily.SHADOW

    def plan(self, spec, problem, context):
        if spec.frame_kind is None:
            raise ConfigError(f"{spec.name}: shadow methods need a frame kind")
        budget = context.shadow_frames if context.shadow_frames is not None else "exact"
        scheme = ShadowScheme(
            problem.observables,
            spec.frame_kind,
            budget,
            seed=context.seed,
            stratified=context.shadow_stratified,
        )
        context.provenance.update(scheme.provenance)
        context.add_to_history("shadow", {"budget": budget})
        return scheme


class DerandomizedExecutor(BaseExecutor):
    """Derandomized local bases, evaluated as a deterministic plan."""

    family = MethodFamily.DERANDOMIZED

    def plan(self, spec, problem, context):
        observables = problem.observables
        budget = context.derand_budget_factor * observables.n_paulis
        cap = context.derand_qse_frame_cap
        if problem.task == Task.QSE and cap is not None and budget > cap:
            context.warn(f"derandomization budget {budget} capped at {cap} frames")
            budget = cap
        plan = derandomized_plan(observables, budget, context.derand_confidence)
        plan.method = spec.name
        if plan.provenance.get("topped_up"):
            context.warn(f"derandomization topped up {plan.provenance['topped_up']} frames")
        context.provenance.update(plan.provenance)
        context.add_to_history("derand", {"frames": budget, "groups": plan.n_groups})
        return plan


class FermionicExecutor(BaseExecutor):
    """Low-rank fermionic fragments with fluid one-body collection."""

    family = MethodFamily.FERMIONIC

    def plan(self, spec, problem, context):
        plan = build_fragment_plan(
            problem.integrals,
            problem.planning_states,
            problem.planning_weights,
            optimize=True,
            cost_mode=problem.task,
        )
        plan.method = spec.name
        if plan.provenance.get("f3_converged") is False:
            context.warn("F3 optimizer did not converge")
        context.provenance.update(
            {k: v for k, v in plan.provenance.items() if not k.endswith("history")}
        )
        context.add_to_history("fragments", {"fragments": plan.n_groups})
        return plan


def default_executors() -> dict:
    return {
        executor.family: executor
        for executor in (
            DeterministicExecutor(),
            ShadowExecutor(),
            DerandomizedExecutor(),
            FermionicExecutor(),
        )
    }
