"""Shot allocation and proxy cost of a grouped measurement plan."""

from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np

logger = logging.getLogger(__name__)

ALLOCATION_FLOOR = 1e-6


def optimal_allocation(group_variances: Sequence[float]) -> np.ndarray:
    """
    m_alpha proportional to sqrt(Var_alpha), floored at 1e-6 and renormalised.

    This minimises sum_alpha Var_alpha / m_alpha under sum m = 1, where the
    minimum equals (sum_alpha sqrt(Var_alpha))^2. All-zero variances give a
    uniform allocation.
    """
    variances = np.maximum(np.asarray(group_variances, dtype=float), 0.0)
    if len(variances) == 0:
        return variances
    roots = np.sqrt(variances)
    total = roots.sum()
    if total <= 0:
        return np.full(len(variances), 1.0 / len(variances))
    allocation = roots / total
    floored = allocation < ALLOCATION_FLOOR
    if np.any(floored):
        logger.debug(f"{int(floored.sum())} groups raised to the allocation floor")
        allocation = np.maximum(allocation, ALLOCATION_FLOOR)
        allocation /= allocation.sum()
    return allocation


def allocation_cost(group_costs: Sequence[float], allocation: Sequence[float]) -> float:
    """
    sum_alpha g_alpha / m_alpha; infinite when a group with g > 0 gets no shots.
    """
    total = 0.0
    for g, m in zip(group_costs, allocation):
        if g <= 0:
            continue
        if m <= 0:
            logger.warning("Group with positive variance has zero allocation")
            return math.inf
        total += g / m
    return total


def optimal_cost(group_costs: Sequence[float]) -> float:
    """(sum_alpha sqrt(g_alpha))^2, the cost under optimal allocation."""
    return float(np.sum(np.sqrt(np.maximum(group_costs, 0.0))) ** 2)


def group_cost_scalars(variance_matrix: np.ndarray) -> np.ndarray:
    """
    Per-group cost driver g_alpha = max_n Var(A_n^(alpha)).

    For single-observable tasks this is the group variance itself; for QSE it
    is the worst observable, which makes sum_alpha g_alpha / m_alpha the
    per-group worst-case proxy cost.
    """
    if variance_matrix.size == 0:
        return np.zeros(variance_matrix.shape[0])
    return variance_matrix.max(axis=1)
