"""
Pauli products in symplectic form.

A product on n qubits is stored as two integer bitmasks (x, z) and a phase
exponent k so that the operator is i^k * prod_j sigma_j, with
(x_j, z_j) = (0,0) I, (1,0) X, (1,1) Y, (0,1) Z. Qubit j is bit j of both
masks and bit j of a computational-basis index.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Tuple

import numpy as np

from measbench.core.errors import QubitCountMismatchError

_LETTERS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_BITS = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_TOKEN = re.compile(r"^([XYZxyz])(\d+)$")

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@lru_cache(maxsize=32)
def basis_bits(n_qubits: int) -> np.ndarray:
    """(2^n, n) uint8 table: entry [b, j] is bit j of basis index b."""
    index = np.arange(1 << n_qubits, dtype=np.int64)
    shifts = np.arange(n_qubits, dtype=np.int64)
    table = ((index[:, None] >> shifts[None, :]) & 1).astype(np.uint8)
    table.flags.writeable = False
    return table


def mask_bits(mask: int, n_qubits: int) -> np.ndarray:
    """0/1 vector of the bits of `mask`."""
    return np.array([(mask >> j) & 1 for j in range(n_qubits)], dtype=np.uint8)


def parity_vector(mask: int, n_qubits: int) -> np.ndarray:
    """parity(b & mask) for every basis index b, as an int8 0/1 vector."""
    if mask == 0:
        return np.zeros(1 << n_qubits, dtype=np.int8)
    columns = [j for j in range(n_qubits) if (mask >> j) & 1]
    return (basis_bits(n_qubits)[:, columns].sum(axis=1) & 1).astype(np.int8)


@dataclass(frozen=True, slots=True)
class PauliProduct:
    """
    Phase-tracked Pauli product.

    Products are values: multiplication returns a new product. Coefficient
    maps key on phase-free products (`phase == 0`).
    """

    n_qubits: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self):
        limit = 1 << self.n_qubits
        if self.x >= limit or self.z >= limit or self.x < 0 or self.z < 0:
            raise ValueError(f"Masks exceed {self.n_qubits} qubits")
        if not 0 <= self.phase < 4:
            object.__setattr__(self, "phase", self.phase % 4)

    # ==================== Construction ====================

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliProduct":
        return cls(n_qubits)

    @classmethod
    def single(cls, n_qubits: int, qubit: int, letter: str) -> "PauliProduct":
        """One-qubit Pauli `letter` acting on `qubit`."""
        if not 0 <= qubit < n_qubits:
            raise ValueError(f"Qubit {qubit} outside register of {n_qubits}")
        xb, zb = _BITS[letter.upper()]
        return cls(n_qubits, xb << qubit, zb << qubit)

    @classmethod
    def from_label(cls, label: str, n_qubits: int) -> "PauliProduct":
        """
        Parse the sparse text form, e.g. "X0 Z2 Y5"; "I" or "" is the identity.
        """
        x = z = 0
        tokens = label.split()
        if tokens in ([], ["I"]):
            return cls(n_qubits)
        for token in tokens:
            match = _TOKEN.match(token)
            if not match:
                raise ValueError(f"Invalid Pauli token: {token!r}")
            letter, qubit = match.group(1).upper(), int(match.group(2))
            if qubit >= n_qubits:
                raise ValueError(f"Qubit {qubit} outside register of {n_qubits}")
            if ((x | z) >> qubit) & 1:
                raise ValueError(f"Qubit {qubit} repeated in {label!r}")
            xb, zb = _BITS[letter]
            x |= xb << qubit
            z |= zb << qubit
        return cls(n_qubits, x, z)

    # ==================== Views ====================

    @property
    def label(self) -> str:
        """Sparse text form without phase."""
        tokens = [f"{letter}{q}" for q, letter in self.letters()]
        return " ".join(tokens) if tokens else "I"

    @property
    def support(self) -> int:
        return self.x | self.z

    @property
    def weight(self) -> int:
        return self.support.bit_count()

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def is_diagonal(self) -> bool:
        """True for products of Z (and I) only."""
        return self.x == 0

    @property
    def key(self) -> Tuple[int, int]:
        return (self.x, self.z)

    def letters(self) -> Iterator[Tuple[int, str]]:
        """(qubit, letter) for every non-identity factor, in qubit order."""
        support = self.support
        q = 0
        while support:
            if support & 1:
                yield q, _LETTERS[((self.x >> q) & 1, (self.z >> q) & 1)]
            support >>= 1
            q += 1

    def letter(self, qubit: int) -> str:
        return _LETTERS[((self.x >> qubit) & 1, (self.z >> qubit) & 1)]

    def strip_phase(self) -> "PauliProduct":
        if self.phase == 0:
            return self
        return PauliProduct(self.n_qubits, self.x, self.z)

    def with_phase(self, phase: int) -> "PauliProduct":
        return PauliProduct(self.n_qubits, self.x, self.z, phase % 4)

    def adjoint(self) -> "PauliProduct":
        """Phase-free products are Hermitian; only the phase conjugates."""
        return PauliProduct(self.n_qubits, self.x, self.z, (-self.phase) % 4)

    @property
    def sign(self) -> complex:
        return 1j**self.phase

    # ==================== Algebra ====================

    def _check(self, other: "PauliProduct"):
        if self.n_qubits != other.n_qubits:
            raise QubitCountMismatchError(
                f"{self.n_qubits}-qubit and {other.n_qubits}-qubit products"
            )

    def multiply(self, other: "PauliProduct") -> "PauliProduct":
        """Exact product self * other with phase."""
        self._check(other)
        x1, z1, x2, z2 = self.x, self.z, other.x, other.z
        y1, xo1, zo1 = x1 & z1, x1 & ~z1, z1 & ~x1
        y2, xo2, zo2 = x2 & z2, x2 & ~z2, z2 & ~x2
        # X*Y = iZ, Y*Z = iX, Z*X = iY and the reverses give -i
        plus = ((xo1 & y2) | (y1 & zo2) | (zo1 & xo2)).bit_count()
        minus = ((y1 & xo2) | (zo1 & y2) | (xo1 & zo2)).bit_count()
        phase = (self.phase + other.phase + plus - minus) % 4
        return PauliProduct(self.n_qubits, x1 ^ x2, z1 ^ z2, phase)

    def __matmul__(self, other: "PauliProduct") -> "PauliProduct":
        return self.multiply(other)

    def commutes_fully(self, other: "PauliProduct") -> bool:
        """Symplectic inner product is zero."""
        self._check(other)
        return ((self.x & other.z).bit_count() + (self.z & other.x).bit_count()) % 2 == 0

    def commutes_qubitwise(self, other: "PauliProduct") -> bool:
        """On every shared qubit the two factors are equal."""
        self._check(other)
        overlap = self.support & other.support
        return ((self.x ^ other.x) & overlap) == 0 and ((self.z ^ other.z) & overlap) == 0

    # ==================== Dense views ====================

    def to_matrix(self) -> np.ndarray:
        """Dense 2^n matrix; qubit 0 is the least significant tensor factor."""
        matrix = np.array([[1.0 + 0j]])
        for q in reversed(range(self.n_qubits)):
            matrix = np.kron(matrix, _SINGLE[self.letter(q)])
        return self.sign * matrix

    def apply(self, vector: np.ndarray) -> np.ndarray:
        """
        Action on a state vector.

        P|b> = i^(phase + |x&z|) (-1)^|b&z| |b xor x>
        """
        n = self.n_qubits
        index = np.arange(1 << n, dtype=np.int64)
        source = index ^ self.x
        signs = 1 - 2 * parity_vector(self.z, n)[source].astype(np.int64)
        factor = 1j ** ((self.phase + (self.x & self.z).bit_count()) % 4)
        return factor * signs * vector[source]

    def __str__(self) -> str:
        prefix = {0: "", 1: "i*", 2: "-", 3: "-i*"}[self.phase]
        return f"{prefix}{self.label}"
