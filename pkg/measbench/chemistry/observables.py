"""
Observable sets: the Pauli-level measurement targets of a task.

For QSE the set holds the raw products A = O_I^dagger H O_J and O_I^dagger O_J
for every I <= J, split as A = R + iK with Hermitian R and K; both parts are
estimated from the same measurements, and the estimator variance of A is
Var(R) + Var(K). For ground and MC tasks the set holds H alone.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from measbench.core.errors import QubitCountMismatchError
from measbench.core.models import Mapping, Task
from measbench.fermion.encodings import FermionEncoding
from measbench.fermion.operators import FermionPolynomial
from measbench.pauli.polynomial import PauliPolynomial
from measbench.pauli.product import PauliProduct

logger = logging.getLogger(__name__)


@dataclass
class ObservableSet:
    """
    Ordered observables over a shared table of non-identity Pauli products.

    Identity coefficients are kept apart in `constants`: they carry no
    variance and are never measured, so they are excluded from the Pauli
    table and from N_P.

    `observables` holds the Hermitian parts R_n; `imaginary_parts`, when
    given, holds K_n with A_n = R_n + i K_n. Variance bookkeeping runs over
    component rows (every R_n, then every non-zero K_n) and is folded back
    onto observables with `fold`.
    """

    n_qubits: int
    observables: List[PauliPolynomial]
    labels: List[str]
    task: Task = Task.QSE
    entries: List[Tuple[str, int, int]] = field(default_factory=list)
    imaginary_parts: Optional[List[PauliPolynomial]] = None

    def __post_init__(self):
        if len(self.labels) != len(self.observables):
            raise ValueError("One label per observable is required")
        if self.imaginary_parts is not None and len(self.imaginary_parts) != len(self.observables):
            raise ValueError("One imaginary part per observable is required")
        for observable in self.observables + list(self.imaginary_parts or []):
            if observable.n_qubits != self.n_qubits:
                raise QubitCountMismatchError(
                    f"{observable.n_qubits}-qubit observable in {self.n_qubits}-qubit set"
                )

        index: Dict[Tuple[int, int], int] = {}
        real = self._triplets(self.observables, index)
        imaginary = self._triplets(self.imaginary_parts or [], index)
        self._keys: List[Tuple[int, int]] = list(index)
        self._index = index

        shape = (len(self.observables), len(index))
        self.coefficients = sp.csr_matrix((real[2], (real[0], real[1])), shape=shape)
        self.imaginary_coefficients = sp.csr_matrix(
            (imaginary[2], (imaginary[0], imaginary[1])), shape=shape
        )
        self.constants = np.array([o.constant for o in self.observables])
        self.imaginary_constants = np.array(
            [o.constant for o in self.imaginary_parts] if self.imaginary_parts
            else np.zeros(len(self.observables))
        )

        with_imaginary = np.nonzero(np.diff(self.imaginary_coefficients.indptr) > 0)[0]
        self.component_owner = np.concatenate([np.arange(len(self.observables)), with_imaginary])
        self.components = self.coefficients
        if len(with_imaginary):
            self.components = sp.vstack(
                [self.coefficients, self.imaginary_coefficients[with_imaginary]], format="csr"
            )

    @staticmethod
    def _triplets(
        polynomials: Sequence[PauliPolynomial], index: Dict[Tuple[int, int], int]
    ) -> Tuple[List[int], List[int], List[float]]:
        rows, cols, data = [], [], []
        for n, polynomial in enumerate(polynomials):
            for key, coeff in sorted(
                ((k, v) for k, v in polynomial.items_by_key() if k != (0, 0))
            ):
                rows.append(n)
                cols.append(index.setdefault(key, len(index)))
                data.append(coeff)
        return rows, cols, data

    # ==================== Construction ====================

    @classmethod
    def from_polynomial(
        cls, hamiltonian: PauliPolynomial, task: Task = Task.MC, label: str = "H"
    ) -> "ObservableSet":
        return cls(hamiltonian.n_qubits, [hamiltonian], [label], task)

    # ==================== Sizes ====================

    @property
    def n_op(self) -> int:
        return len(self.observables)

    @property
    def n_paulis(self) -> int:
        """N_P: distinct non-identity Pauli products across all observables."""
        return len(self._keys)

    @property
    def has_imaginary_parts(self) -> bool:
        return self.imaginary_coefficients.nnz > 0

    # ==================== Components ====================

    def component_rows(self, indices: Optional[Sequence[int]] = None) -> Tuple[sp.csr_matrix, np.ndarray]:
        """
        Coefficient rows of the selected observables and the position each row folds to.

        Returns:
            (matrix, owners): matrix has one row per component, owners[r] is the
            position in `indices` (or the observable index when None)
        """
        if indices is None:
            return self.components, self.component_owner
        indices = list(indices)
        position = {n: i for i, n in enumerate(indices)}
        rows = [r for r, n in enumerate(self.component_owner) if n in position]
        owners = np.array([position[self.component_owner[r]] for r in rows], dtype=int)
        return self.components[rows], owners

    @staticmethod
    def fold(values: np.ndarray, owners: np.ndarray, width: int) -> np.ndarray:
        """Sum component values onto their observables."""
        return np.bincount(owners, weights=np.asarray(values, dtype=float), minlength=width)

    # ==================== Pauli table ====================

    @cached_property
    def paulis(self) -> List[PauliProduct]:
        return [PauliProduct(self.n_qubits, x, z) for x, z in self._keys]

    def pauli_position(self, product: PauliProduct) -> Optional[int]:
        return self._index.get(product.key)

    @cached_property
    def pauli_index(self) -> Dict[PauliProduct, List[Tuple[int, complex]]]:
        """Pauli -> [(observable n, coefficient c_{n,k})], complex for QSE products."""
        merged = (self.coefficients + 1j * self.imaginary_coefficients).tocsc()
        table: Dict[PauliProduct, List[Tuple[int, complex]]] = {}
        for k, product in enumerate(self.paulis):
            start, end = merged.indptr[k], merged.indptr[k + 1]
            table[product] = [
                (int(n), complex(c)) for n, c in zip(merged.indices[start:end], merged.data[start:end])
            ]
        return table

    def importance_weights(self) -> np.ndarray:
        """w_k = sum_n |c_{n,k}|, the sort key of greedy planners."""
        real, imaginary = self.coefficients, self.imaginary_coefficients
        magnitude = (real.multiply(real) + imaginary.multiply(imaginary)).sqrt()
        return np.asarray(magnitude.sum(axis=0)).ravel()

    def observables_of(self, k: int) -> np.ndarray:
        """Observables whose expansion contains Pauli k."""
        column = self.components.tocsc()[:, k]
        return np.unique(self.component_owner[column.indices])

    def subset(self, indices: Sequence[int]) -> "ObservableSet":
        return ObservableSet(
            self.n_qubits,
            [self.observables[i] for i in indices],
            [self.labels[i] for i in indices],
            self.task,
            [self.entries[i] for i in indices] if self.entries else [],
            [self.imaginary_parts[i] for i in indices] if self.imaginary_parts else None,
        )


def build_mc_observables(hamiltonian: PauliPolynomial) -> ObservableSet:
    return ObservableSet.from_polynomial(hamiltonian, Task.MC)


def build_ground_observables(hamiltonian: PauliPolynomial) -> ObservableSet:
    return ObservableSet.from_polynomial(hamiltonian, Task.GROUND)


def build_qse_observables(
    hamiltonian: FermionPolynomial,
    operators: Sequence[FermionPolynomial],
    mapping: Mapping | str = Mapping.JW,
    labels: Optional[Sequence[str]] = None,
    hermitian_only: bool = False,
) -> ObservableSet:
    """
    Dressed QSE observables O_I^dagger H O_J and O_I^dagger O_J, I <= J.

    Products are formed between mapped operators; the encodings are algebra
    homomorphisms so this equals mapping the normal-ordered fermion product.
    With `hermitian_only` the anti-Hermitian parts are dropped, which keeps
    the H and S expectation values of real states but measures fewer products.
    """
    encoding = FermionEncoding.for_mapping(mapping, hamiltonian.n_modes)
    h_image = encoding.map_complex(hamiltonian)
    images = [encoding.map_complex(op) for op in operators]
    adjoints = [image.adjoint() for image in images]
    names = list(labels) if labels else [str(i) for i in range(len(operators))]

    observables: List[PauliPolynomial] = []
    imaginary: List[PauliPolynomial] = []
    observable_labels: List[str] = []
    entries: List[Tuple[str, int, int]] = []
    for j, image in enumerate(images):
        h_times_j = h_image.multiply(image)
        for i in range(j + 1):
            for product in (adjoints[i].multiply(h_times_j), adjoints[i].multiply(image)):
                observables.append(product.hermitian_part())
                imaginary.append(product.anti_hermitian_part())
            observable_labels.append(f"H[{names[i]},{names[j]}]")
            observable_labels.append(f"S[{names[i]},{names[j]}]")
            entries.extend([("H", i, j), ("S", i, j)])

    result = ObservableSet(
        encoding.n_modes,
        observables,
        observable_labels,
        Task.QSE,
        entries,
        None if hermitian_only else imaginary,
    )
    logger.info(
        f"QSE observables: D={len(operators)}, N_op={result.n_op}, N_P={result.n_paulis}"
        + (" (Hermitian parts only)" if hermitian_only else "")
    )
    return result
