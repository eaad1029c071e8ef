"""
Dense brute-force references for small registers.

Everything here works on explicit 2^n matrices built from first principles
(Fock-space ladder matrices, Kronecker products of 2x2 Paulis) and shares no
code with the package beyond plain data types.
"""

from __future__ import annotations

from functools import reduce
from itertools import combinations
from typing import Dict, Sequence

import numpy as np

PAULI_2x2 = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_matrix(letters: Dict[int, str], n_qubits: int) -> np.ndarray:
    """Dense product; qubit 0 is bit 0 of the basis index."""
    factors = [PAULI_2x2[letters.get(q, "I")] for q in reversed(range(n_qubits))]
    return reduce(np.kron, factors, np.array([[1.0 + 0j]]))


def annihilation(mode: int, n_modes: int) -> np.ndarray:
    """a_p with the occupation of mode p stored in bit p and ascending-mode sign string."""
    dim = 1 << n_modes
    matrix = np.zeros((dim, dim))
    for b in range(dim):
        if (b >> mode) & 1:
            sign = (-1) ** bin(b & ((1 << mode) - 1)).count("1")
            matrix[b ^ (1 << mode), b] = sign
    return matrix


def fermion_matrix(terms, n_modes: int) -> np.ndarray:
    """Dense matrix of {((mode, dagger), ...): coeff}, operators applied right to left."""
    dim = 1 << n_modes
    lowering = [annihilation(p, n_modes) for p in range(n_modes)]
    total = np.zeros((dim, dim), dtype=complex)
    for term, coeff in terms:
        matrix = np.eye(dim, dtype=complex)
        for mode, dagger in term:
            matrix = matrix @ (lowering[mode].T if dagger else lowering[mode])
        total += coeff * matrix
    return total


def hamiltonian_matrix(h: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Spin-orbital electronic Hamiltonian from spatial h and chemist-order (pq|rs)."""
    n = h.shape[0]
    n_modes = 2 * n
    lowering = [annihilation(p, n_modes) for p in range(n_modes)]
    raising = [a.T for a in lowering]
    dim = 1 << n_modes
    total = np.zeros((dim, dim))
    for p in range(n_modes):
        for q in range(n_modes):
            if p % 2 == q % 2:
                total += h[p // 2, q // 2] * raising[p] @ lowering[q]
    for p in range(n_modes):
        for q in range(n_modes):
            for r in range(n_modes):
                for s in range(n_modes):
                    if p % 2 != q % 2 or r % 2 != s % 2:
                        continue
                    value = g[p // 2, q // 2, r // 2, s // 2]
                    if value == 0:
                        continue
                    # 1/2 sum (pq|rs) a_p^+ a_r^+ a_s a_q
                    total += 0.5 * value * raising[p] @ raising[r] @ lowering[s] @ lowering[q]
    return total


def sector_indices(n_modes: int, n_electrons: int) -> np.ndarray:
    return np.array(
        [sum(1 << p for p in occ) for occ in combinations(range(n_modes), n_electrons)],
        dtype=np.int64,
    )


def fci_energies(h: np.ndarray, g: np.ndarray, n_electrons: int, count: int = 1) -> np.ndarray:
    """Lowest eigenvalues of the dense Hamiltonian in the n-electron sector."""
    full = hamiltonian_matrix(h, g)
    index = sector_indices(2 * h.shape[0], n_electrons)
    block = full[np.ix_(index, index)]
    return np.linalg.eigvalsh(block)[:count]


def variance(matrix: np.ndarray, state: np.ndarray) -> float:
    mean = np.vdot(state, matrix @ state).real
    second = np.vdot(state, matrix @ (matrix @ state)).real
    return float(second - mean**2)


def random_integrals(n_spatial: int, seed: int = 0):
    """Random h and (pq|rs) with 8-fold symmetry and a positive semidefinite supermatrix."""
    rng = np.random.default_rng(seed)
    h = rng.normal(size=(n_spatial, n_spatial))
    h = 0.5 * (h + h.T) - 2.0 * np.eye(n_spatial)
    pairs = n_spatial * n_spatial
    factors = rng.normal(scale=0.3, size=(pairs, 3))
    supermatrix = factors @ factors.T
    g = supermatrix.reshape(n_spatial, n_spatial, n_spatial, n_spatial)
    g = 0.5 * (g + g.transpose(1, 0, 2, 3))
    g = 0.5 * (g + g.transpose(0, 1, 3, 2))
    g = 0.5 * (g + g.transpose(2, 3, 0, 1))
    return h, g


def dense_sum(matrices: Sequence[np.ndarray], coefficients: Sequence[float]) -> np.ndarray:
    return sum(c * m for c, m in zip(coefficients, matrices))
