"""
Iterative measurement allocation (IMA).

Starting from a plan where each product sits in one group, products are
moved whole between compatible groups whenever the move lowers the proxy
cost (sum_alpha sqrt(g_alpha))^2, g_alpha = max_n Var(A_n^(alpha)). Only
improving moves are applied, so the cost never increases.
"""

from __future__ import annotations

import logging
import math
from typing import List, Optional

import numpy as np

from measbench.core.errors import PlanError
from measbench.core.models import Task
from measbench.grouping.allocation import optimal_cost
from measbench.grouping.covariance import CovarianceTable
from measbench.grouping.plan import MeasurableGroup, MeasurementPlan, compatible
from measbench.grouping.sorted_insertion import descending_order

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-4
DEFAULT_MAX_SWEEPS = 20


def iterative_allocation(
    plan: MeasurementPlan,
    table: CovarianceTable,
    cost_mode: Task | str = Task.QSE,
    tolerance: float = DEFAULT_TOLERANCE,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> MeasurementPlan:
    """
    Refine `plan` by whole-product moves; returns a new plan.

    Args:
        plan: Plan with unit coefficient fractions (e.g. from sorted insertion)
        table: Proxy covariance table (CISD ground state or ensemble)
        cost_mode: Task the proxy cost is computed for (recorded in provenance)
        tolerance: Stop when a sweep improves the cost by less than this fraction
        max_sweeps: Upper bound on sweeps

    Returns:
        Plan with optimal allocations and a cost history in provenance
    """
    cost_mode = Task(cost_mode)
    for group in plan.groups:
        if not np.allclose(group.fractions, 1.0):
            raise PlanError("IMA moves whole products; coefficient-split plans are not accepted")

    observables = plan.observables
    paulis = observables.paulis
    coefficients = observables.components.tocsc()
    owners = observables.component_owner
    n_rows = coefficients.shape[0]
    weights = observables.importance_weights()
    groups: List[List[int]] = [list(g.members) for g in plan.groups]
    owner = {k: alpha for alpha, members in enumerate(groups) for k in members}

    def variances_of(members: List[int]) -> np.ndarray:
        if not members:
            return np.zeros(n_rows)
        block = coefficients[:, members].toarray().T
        return table.fragment_variances(members, block)

    def worst(component_variances: np.ndarray) -> float:
        return float(observables.fold(component_variances, owners, observables.n_op).max())

    history = []
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        variance = [variances_of(m) for m in groups]
        scalars = np.array([worst(v) for v in variance])
        start_cost = optimal_cost(scalars)
        if not history:
            history.append(start_cost)
        moves = 0

        for k in descending_order(weights):
            alpha = owner[k]
            column = coefficients[:, k]
            obs, ck = column.indices, column.data
            ckk = table.diag[k]

            def shift(members: List[int], sign: float) -> np.ndarray:
                others = [l for l in members if l != k]
                if not others:
                    return sign * ck**2 * ckk
                row = table.row(k, others)
                r = coefficients[obs, :][:, others].toarray() @ row
                return sign * (2.0 * ck * r + ck**2 * ckk)

            removed = variance[alpha].copy()
            removed[obs] += shift(groups[alpha], -1.0)
            np.maximum(removed, 0.0, out=removed)
            g_alpha_new = worst(removed) if len(groups[alpha]) > 1 else 0.0
            roots = np.sqrt(scalars)
            base = roots.sum()
            current = base**2

            best = None
            for beta, members in enumerate(groups):
                if beta == alpha or not members:
                    continue
                if not all(compatible(paulis[k], paulis[l], plan.compat) for l in members):
                    continue
                added = variance[beta].copy()
                added[obs] += shift(members, 1.0)
                g_beta_new = worst(added)
                total = (
                    base - roots[alpha] - roots[beta]
                    + math.sqrt(max(g_alpha_new, 0.0)) + math.sqrt(max(g_beta_new, 0.0))
                ) ** 2
                if total < current * (1 - 1e-12) and (best is None or total < best[0]):
                    best = (total, beta, added, g_beta_new)

            if best is not None:
                total, beta, added, g_beta_new = best
                groups[alpha].remove(k)
                groups[beta].append(k)
                owner[k] = beta
                variance[alpha] = removed if groups[alpha] else np.zeros(n_rows)
                variance[beta] = added
                scalars[alpha] = g_alpha_new
                scalars[beta] = g_beta_new
                moves += 1

        end_cost = optimal_cost(np.array([worst(variances_of(m)) for m in groups]))
        history.append(end_cost)
        logger.debug(f"IMA sweep {sweeps}: {moves} moves, cost {start_cost:.6g} -> {end_cost:.6g}")
        if moves == 0 or start_cost <= 0 or (start_cost - end_cost) / start_cost < tolerance:
            break

    refined = MeasurementPlan(
        observables,
        [MeasurableGroup(members) for members in groups if members],
        plan.compat,
        method=f"{plan.compat.value}-ima",
        provenance={**plan.provenance, "cost_mode": cost_mode.value, "ima_sweeps": sweeps},
    )
    cost = refined.reallocate(table)
    refined.provenance["proxy_cost"] = cost
    refined.provenance["ima_history"] = history
    logger.info(
        f"IMA ({plan.compat.value}): {len(plan.groups)} -> {len(refined.groups)} groups, "
        f"cost {history[0]:.6g} -> {cost:.6g} in {sweeps} sweeps"
    )
    return refined
