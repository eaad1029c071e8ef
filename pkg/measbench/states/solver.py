"""
Eigensolvers restricted to an electron-number sector or a CISD subspace.

Matrices are assembled only over the selected basis indices; eigenvectors are
embedded back into the full 2^n space.
"""

from __future__ import annotations

import logging
from itertools import combinations
from typing import List, Optional, Sequence, Union

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from measbench.core.errors import SectorError
from measbench.core.models import Mapping
from measbench.fermion.encodings import FermionEncoding
from measbench.pauli.polynomial import PauliPolynomial, group_terms_by_x
from measbench.states.wavevector import StateBundle, WaveVector

logger = logging.getLogger(__name__)

DENSE_LIMIT = 4096
LANCZOS_TOL = 1e-10


def sector_basis(n_qubits: int, n_electrons: int, mapping: Mapping | str = Mapping.JW) -> np.ndarray:
    """Sorted qubit basis indices whose decoded occupation has n_electrons particles."""
    encoding = FermionEncoding.for_mapping(mapping, n_qubits)
    counts = encoding.electron_counts()
    return np.nonzero(counts == n_electrons)[0].astype(np.int64)


def hartree_fock_occupation(n_electrons: int) -> int:
    """Lowest n_electrons spin orbitals occupied."""
    return (1 << n_electrons) - 1


Reference = Union[int, Sequence[int]]


def occupation_mask(reference: Reference, n_qubits: int, n_electrons: int) -> int:
    """
    Bitmask of a reference determinant given as a mask or a 0/1 vector (mode 0 first).

    Raises:
        SectorError: wrong register size or electron count
    """
    if isinstance(reference, (int, np.integer)):
        mask = int(reference)
    else:
        bits = [int(b) for b in reference]
        if len(bits) != n_qubits or any(b not in (0, 1) for b in bits):
            raise SectorError(f"Reference must be {n_qubits} bits of 0/1, got {bits}")
        mask = sum(b << i for i, b in enumerate(bits))
    if mask < 0 or mask >> n_qubits:
        raise SectorError(f"Reference {mask:#b} does not fit {n_qubits} modes")
    if mask.bit_count() != n_electrons:
        raise SectorError(f"Reference holds {mask.bit_count()} electrons, expected {n_electrons}")
    return mask


def cisd_basis(
    n_qubits: int,
    n_electrons: int,
    mapping: Mapping | str = Mapping.JW,
    max_level: int = 2,
    reference: Optional[Reference] = None,
) -> np.ndarray:
    """
    Basis indices of determinants at most `max_level` excitations from a reference.

    The reference defaults to the aufbau (Hartree-Fock) determinant.
    """
    encoding = FermionEncoding.for_mapping(mapping, n_qubits)
    if reference is None:
        reference = hartree_fock_occupation(n_electrons)
    reference = occupation_mask(reference, n_qubits, n_electrons)
    occupied = [i for i in range(n_qubits) if (reference >> i) & 1]
    virtual = [a for a in range(n_qubits) if not (reference >> a) & 1]
    indices = set()
    for level in range(max_level + 1):
        for holes in combinations(occupied, level):
            for particles in combinations(virtual, level):
                occupation = reference
                for i in holes:
                    occupation ^= 1 << i
                for a in particles:
                    occupation ^= 1 << a
                indices.add(encoding.encode_occupation(occupation))
    return np.array(sorted(indices), dtype=np.int64)


def restricted_matrix(op: PauliPolynomial, basis: np.ndarray) -> sp.csr_matrix:
    """Matrix of `op` between the given basis states (op must preserve their span)."""
    n = op.n_qubits
    dim = len(basis)
    position = np.full(1 << n, -1, dtype=np.int64)
    position[basis] = np.arange(dim)
    shifts = np.arange(n, dtype=np.int64)
    bits = ((basis[:, None] >> shifts[None, :]) & 1).astype(np.int64)

    rows, cols, data = [], [], []
    for x, zs in group_terms_by_x(op.items_by_key()).items():
        values = np.zeros(dim, dtype=complex)
        for z, coeff in zs:
            zvec = np.array([(z >> j) & 1 for j in range(n)], dtype=np.int64)
            signs = 1.0 - 2.0 * ((bits @ zvec) & 1)
            values += coeff * (1j ** ((x & z).bit_count() % 4)) * signs
        targets = position[basis ^ x]
        keep = targets >= 0
        rows.append(targets[keep])
        cols.append(np.arange(dim)[keep])
        data.append(values[keep])
    if not data:
        return sp.csr_matrix((dim, dim), dtype=complex)
    return sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    ).tocsr()


def _fix_phase(vector: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude amplitude real and positive."""
    pivot = np.argmax(np.abs(vector))
    return vector * (abs(vector[pivot]) / vector[pivot])


def _eigensolve(matrix: sp.csr_matrix, count: int):
    dim = matrix.shape[0]
    if dim <= DENSE_LIMIT:
        values, vectors = la.eigh(matrix.toarray(), subset_by_index=[0, count - 1])
        return values, vectors
    logger.info(f"Sparse eigensolver on dimension {dim} for {count} states")
    values, vectors = eigsh(matrix, k=count, which="SA", tol=LANCZOS_TOL)
    order = np.argsort(values)
    return values[order], vectors[:, order]


def eigenstates_in_basis(
    op: PauliPolynomial, basis: np.ndarray, count: int, label: str = "state"
) -> List[WaveVector]:
    """Lowest `count` eigenpairs of `op` restricted to span(basis), embedded in 2^n."""
    if count < 1:
        raise SectorError("At least one state must be requested")
    if count > len(basis):
        raise SectorError(f"Requested {count} states from a space of dimension {len(basis)}")
    values, vectors = _eigensolve(restricted_matrix(op, basis), count)
    states = []
    for i in range(count):
        full = np.zeros(1 << op.n_qubits, dtype=complex)
        full[basis] = _fix_phase(vectors[:, i])
        states.append(WaveVector.normalized(full, label=f"{label}{i}", energy=float(values[i])))
    return states


def lowest_eigenstates(
    hamiltonian: PauliPolynomial,
    n_electrons: int,
    count: int,
    mapping: Mapping | str = Mapping.JW,
) -> List[WaveVector]:
    """Lowest `count` eigenstates in the n-electron sector, ascending in energy."""
    basis = sector_basis(hamiltonian.n_qubits, n_electrons, mapping)
    return eigenstates_in_basis(hamiltonian, basis, count, label="fci")


def cisd_states(
    hamiltonian: PauliPolynomial,
    n_electrons: int,
    count: int,
    mapping: Mapping | str = Mapping.JW,
    reference: Optional[Reference] = None,
) -> List[WaveVector]:
    """Lowest `count` eigenstates within the CISD space of `reference` (Hartree-Fock by default)."""
    basis = cisd_basis(hamiltonian.n_qubits, n_electrons, mapping, reference=reference)
    return eigenstates_in_basis(hamiltonian, basis, count, label="cisd")


def build_state_bundle(
    hamiltonian: PauliPolynomial,
    n_electrons: int,
    n_states: int = 1,
    mapping: Mapping | str = Mapping.JW,
    weights: Optional[Sequence[float]] = None,
    reference: Optional[Reference] = None,
) -> StateBundle:
    """Exact sector eigenstates plus CISD proxies with a uniform trace-1 ensemble."""
    exact = lowest_eigenstates(hamiltonian, n_electrons, n_states, mapping)
    proxy = cisd_states(hamiltonian, n_electrons, n_states, mapping, reference=reference)
    logger.info(
        f"States: E0={exact[0].energy:.8f} (exact), {proxy[0].energy:.8f} (CISD), "
        f"{n_states} per set"
    )
    return StateBundle(exact, proxy, None if weights is None else np.asarray(weights))
