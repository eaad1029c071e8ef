"""
Covariance of Pauli products on a state or a trace-1 ensemble.

C_kl = sum_s w_s Re<P_k phi_s | P_l phi_s> - mu_k mu_l,  mu_k = sum_s w_s <P_k>_s.

The vectors P_k|phi_s> are produced on demand and kept in a bounded cache;
for small tables the full matrix is materialised once.
"""

from __future__ import annotations

import logging
from collections import OrderedDict
from typing import List, Optional, Sequence

import numpy as np

from measbench.core.errors import StateError
from measbench.pauli.product import PauliProduct, parity_vector
from measbench.states.wavevector import WaveVector

logger = logging.getLogger(__name__)

DENSE_PAULI_LIMIT = 3000
CACHE_BYTES = 256 * 1024 * 1024


class CovarianceTable:
    """
    Lazily evaluated covariance table of a Pauli list.

    Usage:
        table = CovarianceTable(observables.paulis, bundle.proxy, bundle.weights)
        v = table.fragment_variances(members, coefficients)
    """

    def __init__(
        self,
        paulis: Sequence[PauliProduct],
        states: Sequence[WaveVector],
        weights: Optional[Sequence[float]] = None,
        dense_limit: int = DENSE_PAULI_LIMIT,
    ):
        if not states:
            raise StateError("Covariance needs at least one state")
        self.paulis = list(paulis)
        self.n_qubits = states[0].n_qubits
        for state in states:
            if state.n_qubits != self.n_qubits:
                raise StateError("States differ in qubit count")
        self.states = np.stack([s.amplitudes for s in states])
        if weights is None:
            weights = np.full(len(states), 1.0 / len(states))
        self.weights = np.asarray(weights, dtype=float)
        if abs(self.weights.sum() - 1.0) > 1e-10 or np.any(self.weights < 0):
            raise StateError("Ensemble weights must be non-negative and sum to 1")

        dim = 1 << self.n_qubits
        self._index = np.arange(dim, dtype=np.int64)
        self._cache: "OrderedDict[int, np.ndarray]" = OrderedDict()
        per_vector = 16 * dim * len(states)
        self._cache_size = max(64, CACHE_BYTES // max(per_vector, 1))

        self.mean = np.zeros(len(self.paulis))
        for k in range(len(self.paulis)):
            self.mean[k] = self._weighted_inner(self.states, self.vectors(k))
        self.diag = 1.0 - self.mean**2

        self._dense: Optional[np.ndarray] = None
        if len(self.paulis) <= dense_limit:
            self._dense = self._full_matrix()

    @classmethod
    def for_state(
        cls,
        paulis: Sequence[PauliProduct],
        state: WaveVector,
        dense_limit: int = DENSE_PAULI_LIMIT,
    ) -> "CovarianceTable":
        return cls(paulis, [state], [1.0], dense_limit=dense_limit)

    def __len__(self) -> int:
        return len(self.paulis)

    # ==================== Vectors ====================

    def _compute(self, k: int) -> np.ndarray:
        p = self.paulis[k]
        source = self._index ^ p.x
        signs = 1.0 - 2.0 * parity_vector(p.z, self.n_qubits)[source]
        factor = 1j ** ((p.x & p.z).bit_count() % 4)
        return factor * signs[None, :] * self.states[:, source]

    def vectors(self, k: int) -> np.ndarray:
        """(n_states, 2^n) stack of P_k|phi_s>."""
        cached = self._cache.get(k)
        if cached is not None:
            self._cache.move_to_end(k)
            return cached
        vec = self._compute(k)
        self._cache[k] = vec
        if len(self._cache) > self._cache_size:
            self._cache.popitem(last=False)
        return vec

    def _stack(self, ks: Sequence[int]) -> np.ndarray:
        """(n_states, 2^n, len(ks))."""
        if len(ks) == 0:
            return np.zeros((len(self.weights), 1 << self.n_qubits, 0), dtype=complex)
        return np.stack([self.vectors(k) for k in ks], axis=2)

    def _weighted_inner(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(np.sum(self.weights * np.einsum("sd,sd->s", a.conj(), b).real))

    def _full_matrix(self) -> np.ndarray:
        n = len(self.paulis)
        chunk = max(1, min(n, self._cache_size // 2))
        second = np.zeros((n, n))
        for i0 in range(0, n, chunk):
            rows = range(i0, min(i0 + chunk, n))
            a = np.stack([self._compute(k) for k in rows], axis=2)
            for j0 in range(i0, n, chunk):
                cols = range(j0, min(j0 + chunk, n))
                b = a if j0 == i0 else np.stack([self._compute(k) for k in cols], axis=2)
                block = np.zeros((len(rows), len(cols)))
                for s, w in enumerate(self.weights):
                    block += w * (a[s].conj().T @ b[s]).real
                second[i0 : i0 + len(rows), j0 : j0 + len(cols)] = block
                second[j0 : j0 + len(cols), i0 : i0 + len(rows)] = block.T
        return second - np.outer(self.mean, self.mean)

    # ==================== Covariances ====================

    def block(self, ks: Sequence[int], ls: Sequence[int]) -> np.ndarray:
        ks, ls = list(ks), list(ls)
        if self._dense is not None:
            return self._dense[np.ix_(ks, ls)]
        a, b = self._stack(ks), self._stack(ls)
        second = np.zeros((len(ks), len(ls)))
        for s, w in enumerate(self.weights):
            second += w * (a[s].conj().T @ b[s]).real
        return second - np.outer(self.mean[ks], self.mean[ls])

    def row(self, k: int, ls: Sequence[int]) -> np.ndarray:
        return self.block([k], ls)[0]

    def fragment_variances(self, members: Sequence[int], coefficients: np.ndarray) -> np.ndarray:
        """
        Variance of sum_k coefficients[k, n] P_k for every column n.

        Args:
            members: Pauli indices
            coefficients: (len(members), n_columns) weights

        Returns:
            (n_columns,) variances, clipped at zero
        """
        members = list(members)
        coefficients = np.asarray(coefficients, dtype=float)
        if coefficients.ndim == 1:
            coefficients = coefficients[:, None]
        if self._dense is not None:
            cov = self._dense[np.ix_(members, members)]
            values = np.einsum("kn,kl,ln->n", coefficients, cov, coefficients)
        else:
            stack = self._stack(members)
            second = np.zeros(coefficients.shape[1])
            for s, w in enumerate(self.weights):
                images = stack[s] @ coefficients
                second += w * np.sum(np.abs(images) ** 2, axis=0)
            values = second - (self.mean[members] @ coefficients) ** 2
        return np.maximum(values, 0.0)
