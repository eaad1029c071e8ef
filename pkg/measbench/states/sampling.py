"""Projective sampling of commuting Pauli products on a state vector."""

from __future__ import annotations

from typing import Sequence, Tuple

import numpy as np

from measbench.core.errors import StateError
from measbench.pauli.product import PauliProduct
from measbench.states.wavevector import WaveVector

MAX_SAMPLING_QUBITS = 12


def joint_eigenbasis(
    products: Sequence[PauliProduct], n_qubits: int, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Common eigenbasis of mutually commuting products.

    A random real combination of the products is diagonalised; its eigenspaces
    are the joint eigenspaces with probability one.

    Returns:
        (basis, values): (2^n, 2^n) eigenvectors as columns and the
        (2^n, len(products)) table of +-1 eigenvalues
    """
    if n_qubits > MAX_SAMPLING_QUBITS:
        raise StateError(f"Outcome sampling is limited to {MAX_SAMPLING_QUBITS} qubits")
    dim = 1 << n_qubits
    if not products:
        return np.eye(dim, dtype=complex), np.zeros((dim, 0))
    matrices = [p.to_matrix() for p in products]
    combination = sum(r * m for r, m in zip(rng.normal(size=len(matrices)), matrices))
    _, basis = np.linalg.eigh(combination)
    values = np.empty((dim, len(matrices)))
    for k, m in enumerate(matrices):
        values[:, k] = np.sign(np.einsum("di,de,ei->i", basis.conj(), m, basis).real)
    return basis, values


def sample_joint_outcomes(
    products: Sequence[PauliProduct],
    state: WaveVector,
    shots: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """(shots, len(products)) +-1 outcomes of one joint measurement per shot."""
    basis, values = joint_eigenbasis(products, state.n_qubits, rng)
    probabilities = np.abs(basis.conj().T @ state.amplitudes) ** 2
    probabilities /= probabilities.sum()
    counts = rng.multinomial(shots, probabilities)
    return np.repeat(values, counts, axis=0)
