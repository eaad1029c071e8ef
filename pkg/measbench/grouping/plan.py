"""
Measurement plans: groups of jointly measurable Pauli products.

Group alpha holds member products and, for each member k, the fraction of
its coefficient assigned to the group, so the fragment of observable n is

    A_n^(alpha) = sum_{k in alpha} f_k^(alpha) c_{n,k} P_k,

with sum_alpha f_k^(alpha) = 1 for every k. Sorted insertion and IMA use
f = 1 (each product in exactly one group); coefficient splitting spreads a
product over several groups.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, Field

from measbench.chemistry.observables import ObservableSet
from measbench.core.errors import PlanError
from measbench.core.models import Compatibility, Task
from measbench.core.strategy import MeasurementStrategy, VarianceEstimate
from measbench.grouping.allocation import (
    allocation_cost,
    group_cost_scalars,
    optimal_allocation,
)
from measbench.grouping.covariance import CovarianceTable
from measbench.pauli.polynomial import PauliPolynomial
from measbench.pauli.product import PauliProduct
from measbench.states.wavevector import WaveVector

logger = logging.getLogger(__name__)

SHARE_TOL = 1e-10


def compatible(a: PauliProduct, b: PauliProduct, compat: Compatibility) -> bool:
    if compat == Compatibility.QWC:
        return a.commutes_qubitwise(b)
    return a.commutes_fully(b)


# ============================================================
# Plan documents (JSON)
# ============================================================

class ShareEntry(BaseModel):
    """Coefficient c + i ci of Pauli k in observable n assigned to a group."""
    n: int
    k: int
    c: float
    ci: float = 0.0


class GroupDocument(BaseModel):
    paulis: List[str]
    shares: List[ShareEntry] = Field(default_factory=list)
    m: float


class PlanDocument(BaseModel):
    """Serialized MeasurementPlan."""
    method: str
    compat: Compatibility
    task: Task
    n_qubits: int
    pauli_table: List[str]
    groups: List[GroupDocument]
    provenance: Dict[str, Any] = Field(default_factory=dict)


# ============================================================
# Plans
# ============================================================

@dataclass
class MeasurableGroup:
    """Jointly measurable Pauli products with coefficient fractions."""
    members: List[int]
    fractions: np.ndarray = field(default=None)  # type: ignore[assignment]
    allocation: float = 0.0

    def __post_init__(self):
        if self.fractions is None:
            self.fractions = np.ones(len(self.members))
        self.fractions = np.asarray(self.fractions, dtype=float)
        if len(self.fractions) != len(self.members):
            raise PlanError("One coefficient fraction per member is required")

    def __len__(self) -> int:
        return len(self.members)


@dataclass
class MeasurementPlan(MeasurementStrategy):
    """
    Deterministic measurement plan over an ObservableSet.

    Allocations m_alpha sum to one; the estimator variance of observable n is
    sum_alpha Var(A_n^(alpha)) / m_alpha per total shot.
    """

    observables: ObservableSet
    groups: List[MeasurableGroup]
    compat: Compatibility
    method: str = "plan"
    provenance: Dict[str, Any] = field(default_factory=dict)

    # ==================== Structure ====================

    @property
    def n_observables(self) -> int:
        return self.observables.n_op

    @property
    def n_groups(self) -> Optional[int]:
        return len(self.groups)

    @property
    def allocations(self) -> np.ndarray:
        return np.array([g.allocation for g in self.groups])

    def coefficient_block(
        self, group: MeasurableGroup, indices: Optional[Sequence[int]] = None
    ) -> np.ndarray:
        """(len(members), n_obs) matrix of f_k Re c_{n,k}."""
        return self._block(self.observables.coefficients, group, indices)

    def imaginary_block(
        self, group: MeasurableGroup, indices: Optional[Sequence[int]] = None
    ) -> np.ndarray:
        """(len(members), n_obs) matrix of f_k Im c_{n,k}."""
        return self._block(self.observables.imaginary_coefficients, group, indices)

    @staticmethod
    def _block(
        matrix: sp.csr_matrix, group: MeasurableGroup, indices: Optional[Sequence[int]] = None
    ) -> np.ndarray:
        if indices is not None:
            matrix = matrix[list(indices), :]
        return group.fractions[:, None] * matrix[:, group.members].toarray().T

    def fragment(self, n: int, alpha: int) -> PauliPolynomial:
        """Hermitian part of A_n^(alpha) as a polynomial."""
        group = self.groups[alpha]
        block = self.coefficient_block(group, [n])[:, 0]
        paulis = self.observables.paulis
        return PauliPolynomial(
            self.observables.n_qubits,
            {paulis[k].key: c for k, c in zip(group.members, block)},
        )

    def validate(self):
        """Every product covered exactly once in total; groups jointly measurable."""
        coverage = np.zeros(self.observables.n_paulis)
        paulis = self.observables.paulis
        for alpha, group in enumerate(self.groups):
            coverage[group.members] += group.fractions
            for i, k in enumerate(group.members):
                for l in group.members[i + 1:]:
                    if not compatible(paulis[k], paulis[l], self.compat):
                        raise PlanError(
                            f"Group {alpha}: {paulis[k].label} and {paulis[l].label} "
                            f"are not {self.compat.value}-compatible"
                        )
        missing = np.nonzero(np.abs(coverage - 1.0) > SHARE_TOL)[0]
        if len(missing):
            raise PlanError(
                f"{len(missing)} Pauli products not fully covered, e.g. {paulis[missing[0]].label}"
            )
        if self.groups and abs(self.allocations.sum() - 1.0) > 1e-8:
            raise PlanError(f"Allocations sum to {self.allocations.sum()}")

    # ==================== Variances ====================

    def variance_matrix(
        self, table: CovarianceTable, indices: Optional[Sequence[int]] = None
    ) -> np.ndarray:
        """(n_groups, n_selected) variances Var(R_n^(alpha)) + Var(K_n^(alpha)) under `table`'s states."""
        width = self.observables.n_op if indices is None else len(indices)
        rows, owners = self.observables.component_rows(indices)
        out = np.zeros((len(self.groups), width))
        for alpha, group in enumerate(self.groups):
            if group.members:
                block = self._block(rows, group)
                out[alpha] = self.observables.fold(
                    table.fragment_variances(group.members, block), owners, width
                )
        return out

    def reallocate(self, table: CovarianceTable) -> float:
        """Set optimal allocations from proxy variances; returns the proxy cost."""
        scalars = group_cost_scalars(self.variance_matrix(table))
        for group, m in zip(self.groups, optimal_allocation(scalars)):
            group.allocation = float(m)
        return allocation_cost(scalars, self.allocations)

    def proxy_cost(self, table: CovarianceTable) -> float:
        """sum_alpha max_n Var(A_n^(alpha)) / m_alpha (Var on the proxy)."""
        scalars = group_cost_scalars(self.variance_matrix(table))
        return allocation_cost(scalars, self.allocations)

    def estimator_variances(
        self, state: WaveVector, indices: Optional[Sequence[int]] = None
    ) -> List[VarianceEstimate]:
        table = CovarianceTable.for_state(self.observables.paulis, state, dense_limit=0)
        variances = self.variance_matrix(table, indices)
        totals = [allocation_cost(variances[:, j], self.allocations) for j in range(variances.shape[1])]
        return [VarianceEstimate(value=float(v)) for v in totals]

    # ==================== Serialization ====================

    def to_document(self) -> PlanDocument:
        labels = [p.label for p in self.observables.paulis]
        coefficients = self.observables.coefficients.tocsc()
        imaginary = self.observables.imaginary_coefficients.tocsc()
        groups = []
        for group in self.groups:
            shares = []
            for k, f in zip(group.members, group.fractions):
                parts: Dict[int, List[float]] = {}
                for part, matrix in enumerate((coefficients, imaginary)):
                    column = matrix[:, k]
                    for n, c in zip(column.indices, column.data):
                        parts.setdefault(int(n), [0.0, 0.0])[part] = float(f * c)
                shares.extend(
                    ShareEntry(n=n, k=int(k), c=c, ci=ci) for n, (c, ci) in sorted(parts.items())
                )
            groups.append(
                GroupDocument(
                    paulis=[labels[k] for k in group.members], shares=shares, m=group.allocation
                )
            )
        return PlanDocument(
            method=self.method,
            compat=self.compat,
            task=self.observables.task,
            n_qubits=self.observables.n_qubits,
            pauli_table=labels,
            groups=groups,
            provenance=self.provenance,
        )

    @classmethod
    def from_document(cls, document: PlanDocument, observables: ObservableSet) -> "MeasurementPlan":
        """Rebuild a plan against an ObservableSet holding the same Pauli table."""
        n = observables.n_qubits
        positions = []
        for label in document.pauli_table:
            position = observables.pauli_position(PauliProduct.from_label(label, n))
            if position is None:
                raise PlanError(f"Pauli {label} of the plan is not in the observable set")
            positions.append(position)
        coefficients = observables.coefficients.tocsc()
        imaginary = observables.imaginary_coefficients.tocsc()

        table_index = {label: i for i, label in enumerate(document.pauli_table)}
        groups = []
        for entry in document.groups:
            members = [positions[table_index[l]] for l in entry.paulis]
            fractions = np.zeros(len(members))
            for share in entry.shares:
                k = positions[share.k]
                if k not in members or fractions[members.index(k)] != 0:
                    continue
                real, imag = coefficients[share.n, k], imaginary[share.n, k]
                if real != 0:
                    fractions[members.index(k)] = share.c / real
                elif imag != 0:
                    fractions[members.index(k)] = share.ci / imag
            groups.append(MeasurableGroup(members, fractions, entry.m))
        return cls(observables, groups, document.compat, document.method, dict(document.provenance))

    def save(self, path: Path):
        Path(path).write_text(self.to_document().model_dump_json(indent=2), encoding="utf-8")

    @staticmethod
    def load_document(path: Path) -> PlanDocument:
        return PlanDocument.model_validate(json.loads(Path(path).read_text(encoding="utf-8")))
