"""Figures of merit, the MC-VQE/QSE crossover and QSE eigenproblem utilities."""

from measbench.metrics.figures import (
    DEFAULT_EPSILON,
    ground_metric,
    mc_metric,
    n_crit,
    qse_metric,
    to_millions,
)
from measbench.metrics.qse import noisy_qse_matrices, qse_matrices, solve_qse
from measbench.metrics.simulate import PlanSimulator, simulate_plan_estimates
