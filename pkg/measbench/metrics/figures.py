"""
Measurement-cost figures of merit.

All metrics are reported as epsilon^2 * M(epsilon), the total shot count
scaled by the squared accuracy target; it equals the single-shot estimator
variance of the strategy and does not depend on epsilon. `to_millions`
converts to the shot count M(epsilon) in millions.
"""

from __future__ import annotations

import logging
import math
from typing import List, Optional, Sequence

import numpy as np

from measbench.core.errors import MetricError
from measbench.core.models import MetricValue
from measbench.core.strategy import MeasurementStrategy, VarianceEstimate
from measbench.states.wavevector import WaveVector

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-3


def to_millions(value: float, epsilon: float = DEFAULT_EPSILON) -> float:
    """epsilon^2 M(epsilon) -> M(epsilon) / 10^6."""
    if epsilon <= 0:
        raise MetricError("Accuracy target must be positive")
    return value / epsilon**2 / 1e6


def _combine(estimates: Sequence[VarianceEstimate]) -> Optional[str]:
    warnings = [e.warning for e in estimates if e.warning]
    return "; ".join(sorted(set(warnings))) if warnings else None


def ground_metric(strategy: MeasurementStrategy, state: WaveVector) -> MetricValue:
    """Estimator variance of the first observable (the Hamiltonian) on `state`."""
    estimate = strategy.estimator_variances(state, [0])[0]
    return MetricValue(value=estimate.value, stderr=estimate.stderr, warning=estimate.warning)


def qse_metric(
    strategy: MeasurementStrategy,
    state: WaveVector,
    partial_fraction: Optional[float] = None,
    seed: int = 0,
) -> MetricValue:
    """
    max_n of the estimator variance of every dressed observable on `state`.

    With `partial_fraction` only a seeded random subset of the observables is
    evaluated and the result is flagged as a lower bound.
    """
    n_op = strategy.n_observables
    if n_op == 0:
        return MetricValue(value=0.0)
    indices: List[int] = list(range(n_op))
    lower_bound = False
    if partial_fraction is not None and partial_fraction < 1.0:
        if partial_fraction <= 0:
            raise MetricError("Partial QSE fraction must be in (0, 1]")
        count = max(1, int(math.ceil(partial_fraction * n_op)))
        rng = np.random.default_rng(seed)
        indices = sorted(int(i) for i in rng.choice(n_op, size=count, replace=False))
        lower_bound = count < n_op
        logger.info(f"Partial QSE: evaluating {count} of {n_op} observables")

    estimates = strategy.estimator_variances(state, indices)
    worst = int(np.argmax([e.value for e in estimates]))
    return MetricValue(
        value=estimates[worst].value,
        stderr=estimates[worst].stderr,
        lower_bound=lower_bound,
        warning=_combine(estimates),
    )


def mc_metric(
    strategy: MeasurementStrategy,
    states: Sequence[WaveVector],
    n_states: Optional[int] = None,
) -> MetricValue:
    """Sum over the exact states of the Hamiltonian estimator variance."""
    if n_states is not None and len(states) != n_states:
        raise MetricError(f"Expected {n_states} states, got {len(states)}")
    if not states:
        raise MetricError("MC metric needs at least one state")
    estimates = [strategy.estimator_variances(state, [0])[0] for state in states]
    return MetricValue(
        value=float(sum(e.value for e in estimates)),
        stderr=float(math.sqrt(sum(e.stderr**2 for e in estimates))),
        warning=_combine(estimates),
    )


def n_crit(mc_per_iteration: float, ground_per_iteration: float, qse_total: float) -> int:
    """
    Smallest k with k * (mc - ground) > qse.

    Raises:
        MetricError: mc <= ground, where MC-VQE never overtakes QSE
    """
    difference = mc_per_iteration - ground_per_iteration
    if difference <= 0:
        raise MetricError(
            f"MC cost {mc_per_iteration:g} does not exceed ground cost {ground_per_iteration:g}"
        )
    if qse_total < 0:
        raise MetricError("QSE cost must be non-negative")
    return int(math.floor(qse_total / difference)) + 1
