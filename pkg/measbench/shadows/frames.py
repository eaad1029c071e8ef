"""
Measurement frames of the randomized schemes.

A frame is one measurement setting drawn by a shadow protocol:

    QubitwiseFrame   one basis letter per qubit            (qwc-cs, derand)
    CliffordFrame    symplectic tableau + sign bits        (fc-cs)
    MajoranaFrame    perfect matching of 2N Majorana indices (majorana-cs)

A Pauli product is covered by a frame when its outcome can be read from the
frame's measurement record. Coverage over a whole Pauli table is evaluated
on the vectorised `PauliArrays` form.
"""

from __future__ import annotations

import itertools
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from measbench.core.errors import ShadowError
from measbench.core.models import FrameKind
from measbench.fermion.majorana import double_factorial, pauli_to_majorana_support
from measbench.pauli.product import PauliProduct
from measbench.shadows.clifford import (
    num_symplectics,
    random_symplectic,
    symplectic_from_index,
)

QWC_LETTERS = "XYZ"
LETTER_CODES = {"I": 0, "X": 1, "Y": 2, "Z": 3}


def popcount(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.uint64)
    if hasattr(np, "bitwise_count"):
        return np.bitwise_count(values).astype(np.int64)
    as_bytes = values.astype("<u8").view(np.uint8).reshape(*values.shape, 8)
    return np.unpackbits(as_bytes, axis=-1).sum(axis=-1).astype(np.int64)


class PauliArrays:
    """Column view of a Pauli table: bitmasks, letter codes and Majorana supports."""

    def __init__(self, paulis: Sequence[PauliProduct], n_qubits: int):
        if n_qubits > 62:
            raise ShadowError("Frame coverage supports at most 62 qubits")
        self.paulis = list(paulis)
        self.n_qubits = n_qubits
        self.x = np.array([p.x for p in self.paulis], dtype=np.uint64)
        self.z = np.array([p.z for p in self.paulis], dtype=np.uint64)
        self.support = self.x | self.z
        self.weight = popcount(self.support)

    def __len__(self) -> int:
        return len(self.paulis)

    @cached_property
    def letters(self) -> np.ndarray:
        """(N_P, n) codes 0=I, 1=X, 2=Y, 3=Z."""
        shifts = np.arange(self.n_qubits, dtype=np.uint64)
        xb = ((self.x[:, None] >> shifts) & np.uint64(1)).astype(np.int8)
        zb = ((self.z[:, None] >> shifts) & np.uint64(1)).astype(np.int8)
        # (1,0) X, (1,1) Y, (0,1) Z
        return np.where(xb == 1, 1 + zb, 3 * zb).astype(np.int8)

    @cached_property
    def symplectic(self) -> np.ndarray:
        """(N_P, 2n) interleaved (x_0, z_0, x_1, z_1, ...) bit vectors."""
        out = np.zeros((len(self.paulis), 2 * self.n_qubits), dtype=np.int64)
        shifts = np.arange(self.n_qubits, dtype=np.uint64)
        out[:, 0::2] = (self.x[:, None] >> shifts) & np.uint64(1)
        out[:, 1::2] = (self.z[:, None] >> shifts) & np.uint64(1)
        return out

    @cached_property
    def majorana(self) -> np.ndarray:
        """Majorana index sets of the Jordan-Wigner preimages, as 2N-bit masks."""
        if self.n_qubits > 31:
            raise ShadowError("Majorana coverage supports at most 31 modes")
        masks = [sum(1 << i for i in pauli_to_majorana_support(p)) for p in self.paulis]
        return np.array(masks, dtype=np.uint64)

    @cached_property
    def majorana_degree(self) -> np.ndarray:
        return popcount(self.majorana)


# ============================================================
# Frames
# ============================================================

class MeasurementFrame(ABC):
    """One measurement setting of a randomized scheme."""

    kind: FrameKind
    probability: float

    @property
    @abstractmethod
    def key(self) -> Tuple:
        """Hashable identity; equal keys measure the same observables."""

    @abstractmethod
    def covered(self, arrays: PauliArrays) -> np.ndarray:
        """Boolean mask of the table entries this frame measures."""

    def covers(self, product: PauliProduct) -> bool:
        return bool(self.covered(PauliArrays([product], product.n_qubits))[0])


@dataclass(frozen=True)
class QubitwiseFrame(MeasurementFrame):
    """Local basis letters, qubit 0 first."""

    bases: str
    probability: float = 0.0
    kind: FrameKind = field(default=FrameKind.QWC, init=False)

    def __post_init__(self):
        if any(b not in QWC_LETTERS for b in self.bases):
            raise ShadowError(f"Invalid basis string {self.bases!r}")
        if not self.probability:
            object.__setattr__(self, "probability", 3.0 ** -len(self.bases))

    @property
    def key(self) -> Tuple:
        return (self.kind.value, self.bases)

    @cached_property
    def codes(self) -> np.ndarray:
        return np.array([LETTER_CODES[b] for b in self.bases], dtype=np.int8)

    def covered(self, arrays: PauliArrays) -> np.ndarray:
        letters = arrays.letters
        return np.all((letters == 0) | (letters == self.codes[None, :]), axis=1)


@dataclass(frozen=True, eq=False)
class CliffordFrame(MeasurementFrame):
    """
    Global Clifford given by its action on the generators.

    Row 2j of `tableau` is the image of X_j, row 2j+1 the image of Z_j, with
    sign bits in `signs`. A product is covered when its image is diagonal.
    """

    tableau: np.ndarray
    signs: np.ndarray
    probability: float = 0.0
    kind: FrameKind = field(default=FrameKind.CLIFFORD, init=False)

    def __post_init__(self):
        if not self.probability:
            n = self.n_qubits
            object.__setattr__(self, "probability", 1.0 / (num_symplectics(n) * 4**n))

    @property
    def n_qubits(self) -> int:
        return self.tableau.shape[0] // 2

    @property
    def key(self) -> Tuple:
        return (self.kind.value, self.tableau.tobytes(), self.signs.tobytes())

    @cached_property
    def generator_images(self) -> List[PauliProduct]:
        n = self.n_qubits
        images = []
        for row, sign in zip(self.tableau, self.signs):
            x = sum(int(row[2 * j]) << j for j in range(n))
            z = sum(int(row[2 * j + 1]) << j for j in range(n))
            images.append(PauliProduct(n, x, z, 2 * int(sign)))
        return images

    def pauli_image(self, product: PauliProduct) -> PauliProduct:
        """U P U^dagger with its phase."""
        n = self.n_qubits
        if product.n_qubits != n:
            raise ShadowError(f"{product.n_qubits}-qubit product on a {n}-qubit frame")
        image = PauliProduct(n, 0, 0, product.phase + (product.x & product.z).bit_count())
        for j in range(n):
            if (product.x >> j) & 1:
                image = image.multiply(self.generator_images[2 * j])
            if (product.z >> j) & 1:
                image = image.multiply(self.generator_images[2 * j + 1])
        return image

    def covered(self, arrays: PauliArrays) -> np.ndarray:
        images = (arrays.symplectic @ self.tableau.astype(np.int64)) % 2
        return ~np.any(images[:, 0::2], axis=1)


@dataclass(frozen=True)
class MajoranaFrame(MeasurementFrame):
    """Perfect matching (pairing[0], pairing[1]), (pairing[2], pairing[3]), ..."""

    pairing: Tuple[int, ...]
    probability: float = 0.0
    kind: FrameKind = field(default=FrameKind.MAJORANA, init=False)

    def __post_init__(self):
        size = len(self.pairing)
        if size % 2 or sorted(self.pairing) != list(range(size)):
            raise ShadowError("Pairing must be a permutation of 0..2N-1")
        if not self.probability:
            object.__setattr__(self, "probability", 1.0 / double_factorial(size - 1))

    @property
    def n_modes(self) -> int:
        return len(self.pairing) // 2

    @property
    def pairs(self) -> List[Tuple[int, int]]:
        it = iter(self.pairing)
        return [tuple(sorted(pair)) for pair in zip(it, it)]  # type: ignore[misc]

    @property
    def key(self) -> Tuple:
        return (self.kind.value, tuple(sorted(self.pairs)))

    def covers_monomial(self, indices: Sequence[int]) -> bool:
        chosen = set(indices)
        return all((a in chosen) == (b in chosen) for a, b in self.pairs)

    def covered(self, arrays: PauliArrays) -> np.ndarray:
        masks = arrays.majorana
        hit = np.ones(len(masks), dtype=bool)
        one = np.uint64(1)
        for a, b in self.pairs:
            hit &= ((masks >> np.uint64(a)) & one) == ((masks >> np.uint64(b)) & one)
        return hit


# ============================================================
# Sampling and enumeration
# ============================================================

def sample_qwc_frame(n_qubits: int, rng: np.random.Generator) -> QubitwiseFrame:
    return QubitwiseFrame("".join(QWC_LETTERS[i] for i in rng.integers(3, size=n_qubits)))


def sample_clifford_frame(n_qubits: int, rng: np.random.Generator) -> CliffordFrame:
    tableau = random_symplectic(n_qubits, rng)
    signs = rng.integers(2, size=2 * n_qubits).astype(np.int8)
    return CliffordFrame(tableau, signs)


def sample_majorana_frame(n_modes: int, rng: np.random.Generator) -> MajoranaFrame:
    return MajoranaFrame(tuple(int(i) for i in rng.permutation(2 * n_modes)))


def sample_frame(kind: FrameKind | str, n_qubits: int, rng: np.random.Generator) -> MeasurementFrame:
    kind = FrameKind(kind)
    if kind == FrameKind.QWC:
        return sample_qwc_frame(n_qubits, rng)
    if kind == FrameKind.CLIFFORD:
        return sample_clifford_frame(n_qubits, rng)
    return sample_majorana_frame(n_qubits, rng)


def frame_space_size(kind: FrameKind | str, n_qubits: int) -> int:
    """Number of frames enumerated by `enumerate_frames` (sign bits excluded)."""
    kind = FrameKind(kind)
    if kind == FrameKind.QWC:
        return 3**n_qubits
    if kind == FrameKind.CLIFFORD:
        return num_symplectics(n_qubits)
    return double_factorial(2 * n_qubits - 1)


def enumerate_qwc_frames(n_qubits: int) -> Iterator[QubitwiseFrame]:
    for letters in itertools.product(QWC_LETTERS, repeat=n_qubits):
        yield QubitwiseFrame("".join(letters))


def enumerate_clifford_frames(n_qubits: int) -> Iterator[CliffordFrame]:
    """
    Every symplectic tableau with positive signs.

    Coverage and second moments do not depend on sign bits, so this is the
    full frame distribution up to signs.
    """
    count = num_symplectics(n_qubits)
    signs = np.zeros(2 * n_qubits, dtype=np.int8)
    for index in range(count):
        yield CliffordFrame(symplectic_from_index(index, n_qubits), signs, probability=1.0 / count)


def _matchings(indices: Tuple[int, ...]) -> Iterator[Tuple[int, ...]]:
    if not indices:
        yield ()
        return
    first, rest = indices[0], indices[1:]
    for i, partner in enumerate(rest):
        for tail in _matchings(rest[:i] + rest[i + 1:]):
            yield (first, partner) + tail


def enumerate_majorana_frames(n_modes: int) -> Iterator[MajoranaFrame]:
    for pairing in _matchings(tuple(range(2 * n_modes))):
        yield MajoranaFrame(pairing)


def enumerate_frames(kind: FrameKind | str, n_qubits: int) -> Iterator[MeasurementFrame]:
    kind = FrameKind(kind)
    if kind == FrameKind.QWC:
        return enumerate_qwc_frames(n_qubits)
    if kind == FrameKind.CLIFFORD:
        return enumerate_clifford_frames(n_qubits)
    return enumerate_majorana_frames(n_qubits)


# ============================================================
# Coverage probabilities
# ============================================================

def majorana_pair_probability(n_modes: int, *block_sizes: int) -> float:
    """
    Probability that a uniform perfect matching of 2N indices pairs each of the
    given disjoint blocks internally.
    """
    if any(size % 2 for size in block_sizes):
        return 0.0
    free = 2 * n_modes - sum(block_sizes)
    numerator = math.prod(double_factorial(size - 1) for size in block_sizes)
    return numerator * double_factorial(free - 1) / double_factorial(2 * n_modes - 1)


def coverage_probabilities(kind: FrameKind | str, arrays: PauliArrays) -> np.ndarray:
    """Probability that a random frame covers each product."""
    kind = FrameKind(kind)
    n = arrays.n_qubits
    if kind == FrameKind.QWC:
        return 3.0 ** (-arrays.weight.astype(float))
    if kind == FrameKind.CLIFFORD:
        return np.where(arrays.weight > 0, 1.0 / ((1 << n) + 1), 1.0)
    return np.array([majorana_pair_probability(n, int(k)) for k in arrays.majorana_degree])
