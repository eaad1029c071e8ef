"""Deterministic measurement plans: sorted insertion, IMA and coefficient splitting."""

from measbench.grouping.allocation import (
    ALLOCATION_FLOOR,
    allocation_cost,
    group_cost_scalars,
    optimal_allocation,
    optimal_cost,
)
from measbench.grouping.covariance import CovarianceTable
from measbench.grouping.ics import ics_split
from measbench.grouping.ima import iterative_allocation
from measbench.grouping.plan import (
    MeasurableGroup,
    MeasurementPlan,
    PlanDocument,
    compatible,
)
from measbench.grouping.sorted_insertion import descending_order, sorted_insertion
