"""Sorted insertion: first-fit grouping in descending coefficient weight."""

from __future__ import annotations

import logging
from typing import List, Optional

import numpy as np

from measbench.chemistry.observables import ObservableSet
from measbench.core.models import Compatibility
from measbench.grouping.covariance import CovarianceTable
from measbench.grouping.plan import MeasurableGroup, MeasurementPlan
from measbench.pauli.product import PauliProduct

logger = logging.getLogger(__name__)


class _QubitwiseFrame:
    """Per-qubit letters fixed by a QWC group; membership test is O(1)."""

    __slots__ = ("x", "z", "support")

    def __init__(self):
        self.x = self.z = self.support = 0

    def accepts(self, p: PauliProduct) -> bool:
        overlap = self.support & p.support
        return ((self.x ^ p.x) & overlap) == 0 and ((self.z ^ p.z) & overlap) == 0

    def add(self, p: PauliProduct):
        self.x |= p.x
        self.z |= p.z
        self.support |= p.support


def descending_order(weights: np.ndarray) -> List[int]:
    """Indices by descending weight; ties keep table order."""
    return sorted(range(len(weights)), key=lambda k: (-weights[k], k))


def sorted_insertion(
    observables: ObservableSet,
    compat: Compatibility | str = Compatibility.FC,
    weights: Optional[np.ndarray] = None,
    table: Optional[CovarianceTable] = None,
) -> MeasurementPlan:
    """
    Group every non-identity Pauli product of `observables`.

    Products are visited by descending weight (sum_n |c_{n,k}| by default)
    and placed in the first group whose members are all compatible; otherwise
    they open a new group. With a proxy covariance table the allocations are
    set optimally, else uniformly.
    """
    compat = Compatibility(compat)
    paulis = observables.paulis
    if weights is None:
        weights = observables.importance_weights()

    groups: List[List[int]] = []
    frames: List[_QubitwiseFrame] = []
    for k in descending_order(weights):
        p = paulis[k]
        placed = False
        for alpha, members in enumerate(groups):
            if compat == Compatibility.QWC:
                fits = frames[alpha].accepts(p)
            else:
                fits = all(p.commutes_fully(paulis[l]) for l in members)
            if fits:
                members.append(k)
                if compat == Compatibility.QWC:
                    frames[alpha].add(p)
                placed = True
                break
        if not placed:
            groups.append([k])
            frame = _QubitwiseFrame()
            frame.add(p)
            frames.append(frame)

    plan = MeasurementPlan(
        observables,
        [MeasurableGroup(members) for members in groups],
        compat,
        method=f"{compat.value}-si",
    )
    if table is not None:
        cost = plan.reallocate(table)
        plan.provenance["proxy_cost"] = cost
    else:
        for group in plan.groups:
            group.allocation = 1.0 / len(plan.groups)
    logger.info(f"Sorted insertion ({compat.value}): {observables.n_paulis} products -> {len(groups)} groups")
    return plan
