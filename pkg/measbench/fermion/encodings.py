"""
Fermion-to-qubit encodings.

Both supported encodings are linear over GF(2): the qubit basis index b of an
occupation vector n is b = beta n (mod 2). Jordan-Wigner uses beta = I;
Bravyi-Kitaev uses the Fenwick-tree matrix, defined for any register size.
A ladder operator then maps to

    a_j = 1/2 X_{flip(j)} Z_{parity(j)} (1 - Z_{occ(j)})

where flip(j) is column j of beta, parity(j) the qubits whose XOR gives
n_0 + ... + n_{j-1}, and occ(j) the qubits whose XOR gives n_j.
"""

from __future__ import annotations

import logging
import threading
from collections import OrderedDict
from functools import lru_cache
from typing import Dict

import numpy as np

from measbench.core.errors import ModeIndexError
from measbench.core.models import Mapping
from measbench.fermion.operators import FermionPolynomial, Term
from measbench.pauli.polynomial import PauliAccumulator, PauliPolynomial
from measbench.pauli.product import PauliProduct, parity_vector

logger = logging.getLogger(__name__)

MONOMIAL_CACHE_SIZE = 65536


def fenwick_matrix(n_modes: int) -> np.ndarray:
    """beta[i, k] = 1 when Fenwick node i stores occupation k."""
    beta = np.zeros((n_modes, n_modes), dtype=np.uint8)
    for i in range(n_modes):
        beta[i, i & (i + 1): i + 1] = 1
    return beta


def gf2_inverse(matrix: np.ndarray) -> np.ndarray:
    """Inverse over GF(2) by Gauss-Jordan elimination."""
    n = matrix.shape[0]
    work = np.concatenate([matrix.astype(np.uint8) % 2, np.eye(n, dtype=np.uint8)], axis=1)
    for col in range(n):
        pivots = np.nonzero(work[col:, col])[0]
        if len(pivots) == 0:
            raise ValueError("Encoding matrix is singular over GF(2)")
        pivot = col + pivots[0]
        if pivot != col:
            work[[col, pivot]] = work[[pivot, col]]
        for row in range(n):
            if row != col and work[row, col]:
                work[row] ^= work[col]
    return work[:, n:]


def _row_mask(row: np.ndarray) -> int:
    return sum(1 << int(i) for i in np.nonzero(row)[0])


class FermionEncoding:
    """
    Linear fermion-to-qubit encoding with cached ladder images.

    Instances are shared through `for_mapping`; image caches are filled under
    a lock and the monomial cache is bounded.

    Usage:
        encoding = FermionEncoding.for_mapping(Mapping.BK, 8)
        qubit_op = encoding.map(fermion_op)
    """

    def __init__(self, name: str, beta: np.ndarray):
        self.name = name
        self.beta = beta.astype(np.uint8) % 2
        self.n_modes = beta.shape[0]
        self.beta_inv = gf2_inverse(self.beta)

        n = self.n_modes
        self._encode_rows = [_row_mask(self.beta[i]) for i in range(n)]
        self.flip_masks = [_row_mask(self.beta[:, j]) for j in range(n)]
        self.occupation_masks = [_row_mask(self.beta_inv[j]) for j in range(n)]
        cumulative = np.cumsum(self.beta_inv, axis=0) % 2
        self.parity_masks = [0] + [_row_mask(cumulative[j - 1]) for j in range(1, n)]

        self._ladders: Dict[tuple, PauliAccumulator] = {}
        self._monomials: "OrderedDict[Term, PauliAccumulator]" = OrderedDict()
        self._lock = threading.RLock()

    @classmethod
    def jordan_wigner(cls, n_modes: int) -> "FermionEncoding":
        return cls("jw", np.eye(n_modes, dtype=np.uint8))

    @classmethod
    def bravyi_kitaev(cls, n_modes: int) -> "FermionEncoding":
        return cls("bk", fenwick_matrix(n_modes))

    @classmethod
    def for_mapping(cls, mapping: Mapping | str, n_modes: int) -> "FermionEncoding":
        return _cached_encoding(Mapping(mapping), n_modes)

    # ==================== Basis bookkeeping ====================

    def encode_occupation(self, occupation: int) -> int:
        """Qubit basis index of an occupation bitmask."""
        return sum(
            ((occupation & row).bit_count() & 1) << i
            for i, row in enumerate(self._encode_rows)
        )

    def decode_basis_index(self, index: int) -> int:
        """Occupation bitmask of a qubit basis index."""
        return sum(
            ((index & mask).bit_count() & 1) << j
            for j, mask in enumerate(self.occupation_masks)
        )

    def occupation_table(self) -> np.ndarray:
        """(2^n, n) 0/1 occupations of every qubit basis state."""
        return np.stack(
            [parity_vector(mask, self.n_modes) for mask in self.occupation_masks], axis=1
        )

    def electron_counts(self) -> np.ndarray:
        return self.occupation_table().sum(axis=1)

    # ==================== Operator images ====================

    def ladder_image(self, mode: int, dagger: bool) -> PauliAccumulator:
        if not 0 <= mode < self.n_modes:
            raise ModeIndexError(f"Mode {mode} outside register of {self.n_modes}")
        key = (mode, dagger)
        with self._lock:
            if key not in self._ladders:
                self._fill_ladders(mode)
            return self._ladders[key]

    def _fill_ladders(self, mode: int):
        n = self.n_modes
        flip = PauliProduct(n, self.flip_masks[mode], 0)
        parity = PauliProduct(n, 0, self.parity_masks[mode])
        occupied = PauliProduct(n, 0, self.occupation_masks[mode])
        head = flip.multiply(parity)
        annihilate = PauliAccumulator(n)
        annihilate.add(head, 0.5)
        annihilate.add(head.multiply(occupied), -0.5)
        self._ladders[(mode, False)] = annihilate
        self._ladders[(mode, True)] = annihilate.adjoint()

    def monomial_image(self, term: Term) -> PauliAccumulator:
        with self._lock:
            image = self._monomials.get(term)
            if image is not None:
                self._monomials.move_to_end(term)
                return image
        image = PauliAccumulator.identity(self.n_modes)
        for mode, dagger in term:
            image = image.multiply(self.ladder_image(mode, dagger))
        with self._lock:
            self._monomials[term] = image
            if len(self._monomials) > MONOMIAL_CACHE_SIZE:
                self._monomials.popitem(last=False)
        return image

    def map_complex(self, op: FermionPolynomial) -> PauliAccumulator:
        """Image of an arbitrary (possibly non-Hermitian) fermion polynomial."""
        if op.n_modes != self.n_modes:
            raise ModeIndexError(
                f"{op.n_modes}-mode operator for a {self.n_modes}-mode encoding"
            )
        acc = PauliAccumulator(self.n_modes)
        for term, coeff in op.items():
            acc.add_scaled(self.monomial_image(term), coeff)
        return acc

    def map(self, op: FermionPolynomial) -> PauliPolynomial:
        """Image of a Hermitian fermion polynomial."""
        return self.map_complex(op).to_polynomial()

    def __repr__(self) -> str:
        return f"FermionEncoding({self.name}, {self.n_modes} modes)"


@lru_cache(maxsize=16)
def _cached_encoding(mapping: Mapping, n_modes: int) -> FermionEncoding:
    if mapping == Mapping.JW:
        return FermionEncoding.jordan_wigner(n_modes)
    return FermionEncoding.bravyi_kitaev(n_modes)


def jordan_wigner(op: FermionPolynomial) -> PauliPolynomial:
    return FermionEncoding.for_mapping(Mapping.JW, op.n_modes).map(op)


def bravyi_kitaev(op: FermionPolynomial) -> PauliPolynomial:
    return FermionEncoding.for_mapping(Mapping.BK, op.n_modes).map(op)


def map_operator(op: FermionPolynomial, mapping: Mapping | str) -> PauliPolynomial:
    return FermionEncoding.for_mapping(mapping, op.n_modes).map(op)
