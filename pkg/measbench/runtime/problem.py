"""
Measurement problems - integrals, qubit Hamiltonian, task observables and states.

Building a problem is the expensive shared part of a benchmark: the same
molecule and mapping feed every method, so the cache keeps each stage.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from measbench.chemistry.hamiltonian import (
    build_cis_operators,
    build_electronic_hamiltonian,
    cis_labels,
)
from measbench.chemistry.integrals import MolecularIntegrals, load_integrals
from measbench.chemistry.observables import (
    ObservableSet,
    build_ground_observables,
    build_mc_observables,
    build_qse_observables,
)
from measbench.core.errors import ConfigError
from measbench.core.models import Mapping, MoleculeEntry, Task
from measbench.fermion.encodings import map_operator
from measbench.fermion.operators import FermionPolynomial
from measbench.grouping.covariance import CovarianceTable
from measbench.pauli.polynomial import PauliPolynomial
from measbench.states.cache import StateCache
from measbench.states.solver import build_state_bundle, cisd_basis
from measbench.states.wavevector import StateBundle, WaveVector

logger = logging.getLogger(__name__)


@dataclass
class MeasurementProblem:
    """
    Everything a method needs for one (molecule, task, mapping).

    Planning uses the CISD proxies (ground proxy for ground and QSE, the
    trace-1 proxy ensemble for MC); evaluation uses the exact states.
    """

    label: str
    integrals: MolecularIntegrals
    mapping: Mapping
    task: Task
    fermion_hamiltonian: FermionPolynomial
    hamiltonian: PauliPolynomial
    observables: ObservableSet
    bundle: StateBundle
    metadata: Dict[str, object] = field(default_factory=dict)

    @property
    def planning_states(self) -> List[WaveVector]:
        if self.task == Task.MC:
            return list(self.bundle.proxy)
        return [self.bundle.ground_proxy]

    @property
    def planning_weights(self) -> Optional[np.ndarray]:
        if self.task == Task.MC:
            return self.bundle.weights
        return None

    def evaluation_states(self, source: str = "fci") -> List[WaveVector]:
        """Exact ("fci") or proxy ("cisd") states the metric is evaluated on."""
        if source not in ("fci", "cisd"):
            raise ConfigError(f"Unknown state source {source!r}; use fci or cisd")
        states = self.bundle.exact if source == "fci" else self.bundle.proxy
        return list(states) if self.task == Task.MC else [states[0]]

    def covariance_table(self) -> CovarianceTable:
        """Fresh proxy covariance table; tables cache vectors and are not shared across threads."""
        return CovarianceTable(
            self.observables.paulis, self.planning_states, self.planning_weights
        )


class ProblemCache:
    """
    Thread-safe cache of loaded integrals, Hamiltonians, state bundles and problems.

    Usage:
        problems = ProblemCache()
        problem = problems.get(entry, Task.QSE, Mapping.JW)
    """

    def __init__(self, state_cache: Optional[StateCache] = None):
        self.state_cache = state_cache
        self._lock = threading.RLock()
        self._integrals: Dict[Path, MolecularIntegrals] = {}
        self._hamiltonians: Dict[Tuple[str, Mapping], Tuple[FermionPolynomial, PauliPolynomial]] = {}
        self._bundles: Dict[Tuple[str, Mapping, int], StateBundle] = {}
        self._problems: Dict[Tuple[str, Task, Mapping], MeasurementProblem] = {}

    # ==================== Stages ====================

    def integrals(self, entry: MoleculeEntry) -> MolecularIntegrals:
        with self._lock:
            path = Path(entry.integrals)
            if path not in self._integrals:
                try:
                    self._integrals[path] = load_integrals(path)
                except FileNotFoundError as e:
                    raise ConfigError(str(e)) from e
            integrals = self._integrals[path]
            if entry.n_electrons is not None and entry.n_electrons != integrals.n_electrons:
                integrals = integrals.with_electrons(entry.n_electrons)
            return integrals

    def hamiltonian(
        self, label: str, integrals: MolecularIntegrals, mapping: Mapping
    ) -> Tuple[FermionPolynomial, PauliPolynomial]:
        with self._lock:
            key = (label, mapping)
            if key not in self._hamiltonians:
                fermion = build_electronic_hamiltonian(integrals)
                qubit = map_operator(fermion, mapping)
                logger.info(
                    f"{label}/{mapping.value}: {integrals.n_modes} qubits, "
                    f"{len(qubit.without_identity())} Pauli products"
                )
                self._hamiltonians[key] = (fermion, qubit)
            return self._hamiltonians[key]

    def bundle(
        self,
        label: str,
        integrals: MolecularIntegrals,
        hamiltonian: PauliPolynomial,
        mapping: Mapping,
        n_states: int,
    ) -> StateBundle:
        with self._lock:
            key = (label, mapping, n_states)
            if key in self._bundles:
                return self._bundles[key]

            cache_key = None
            bundle = None
            if self.state_cache is not None and integrals.checksum:
                cache_key = StateCache.key(
                    integrals.checksum, mapping.value, integrals.n_electrons, n_states
                )
                bundle = self.state_cache.load(cache_key)
            if bundle is None:
                bundle = build_state_bundle(hamiltonian, integrals.n_electrons, n_states, mapping)
                if cache_key is not None:
                    self.state_cache.save(cache_key, bundle, molecule=label)
            self._bundles[key] = bundle
            return bundle

    # ==================== Problems ====================

    def state_count(self, entry: MoleculeEntry, integrals: MolecularIntegrals, task: Task) -> int:
        """1 for ground and QSE; the ensemble size for MC, capped by the CISD space."""
        if task != Task.MC:
            return 1
        available = len(cisd_basis(integrals.n_modes, integrals.n_electrons))
        if entry.n_states > available:
            logger.warning(
                f"{entry.label}: {entry.n_states} states requested, "
                f"CISD space holds {available}; using {available}"
            )
            return available
        return entry.n_states

    def get(self, entry: MoleculeEntry, task: Task | str, mapping: Mapping | str) -> MeasurementProblem:
        task, mapping = Task(task), Mapping(mapping)
        with self._lock:
            key = (entry.label, task, mapping)
            if key in self._problems:
                return self._problems[key]

            integrals = self.integrals(entry)
            fermion, qubit = self.hamiltonian(entry.label, integrals, mapping)
            n_states = self.state_count(entry, integrals, task)
            bundle = self.bundle(entry.label, integrals, qubit, mapping, n_states)

            if task == Task.QSE:
                operators = build_cis_operators(integrals.n_electrons, integrals.n_modes)
                labels = cis_labels(integrals.n_electrons, integrals.n_modes)
                observables = build_qse_observables(fermion, operators, mapping, labels)
            elif task == Task.MC:
                observables = build_mc_observables(qubit)
            else:
                observables = build_ground_observables(qubit)

            problem = MeasurementProblem(
                label=entry.label,
                integrals=integrals,
                mapping=mapping,
                task=task,
                fermion_hamiltonian=fermion,
                hamiltonian=qubit,
                observables=observables,
                bundle=bundle,
                metadata={
                    "n_states": n_states,
                    "checksum": integrals.checksum,
                    "integrals": Path(entry.integrals).name,
                    "e_nuc": integrals.e_nuc,
                    "components": int(observables.components.shape[0]),
                },
            )
            self._problems[key] = problem
            return problem

    def clear(self):
        with self._lock:
            self._integrals.clear()
            self._hamiltonians.clear()
            self._bundles.clear()
            self._problems.clear()
