"""
Pauli polynomials: real-weighted sums of phase-free Pauli products.

`PauliPolynomial` is the immutable Hermitian value handed between modules.
`PauliAccumulator` is its mutable complex counterpart used while an operator
is being assembled (mapped ladder operators, operator products); it becomes a
polynomial through `to_polynomial()` or `hermitian_part()`.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from measbench.core.errors import HermiticityError, QubitCountMismatchError
from measbench.pauli.product import PauliProduct, parity_vector

logger = logging.getLogger(__name__)

COEFF_TOL = 1e-12
IMAG_TOL = 1e-10

Key = Tuple[int, int]


class PauliAccumulator:
    """Mutable sum of Pauli products with complex coefficients."""

    __slots__ = ("n_qubits", "_terms")

    def __init__(self, n_qubits: int, terms: Optional[Mapping[Key, complex]] = None):
        self.n_qubits = n_qubits
        self._terms: Dict[Key, complex] = defaultdict(complex)
        if terms:
            for key, value in terms.items():
                self._terms[key] += value

    @classmethod
    def from_product(cls, product: PauliProduct, coeff: complex = 1.0) -> "PauliAccumulator":
        acc = cls(product.n_qubits)
        acc.add(product, coeff)
        return acc

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> "PauliAccumulator":
        return cls(n_qubits, {(0, 0): coeff})

    def add(self, product: PauliProduct, coeff: complex = 1.0):
        """Add coeff * product, folding the product's phase into the coefficient."""
        if product.n_qubits != self.n_qubits:
            raise QubitCountMismatchError(
                f"Adding {product.n_qubits}-qubit term to {self.n_qubits}-qubit sum"
            )
        self._terms[product.key] += coeff * product.sign

    def add_scaled(self, other: "PauliAccumulator", coeff: complex = 1.0):
        if other.n_qubits != self.n_qubits:
            raise QubitCountMismatchError("Accumulators differ in qubit count")
        for key, value in other._terms.items():
            self._terms[key] += coeff * value

    def multiply(self, other: "PauliAccumulator") -> "PauliAccumulator":
        """Operator product self * other."""
        if other.n_qubits != self.n_qubits:
            raise QubitCountMismatchError("Accumulators differ in qubit count")
        n = self.n_qubits
        out = PauliAccumulator(n)
        for (x1, z1), c1 in self._terms.items():
            if c1 == 0:
                continue
            left = PauliProduct(n, x1, z1)
            for (x2, z2), c2 in other._terms.items():
                if c2 == 0:
                    continue
                out.add(left.multiply(PauliProduct(n, x2, z2)), c1 * c2)
        return out

    def adjoint(self) -> "PauliAccumulator":
        return PauliAccumulator(
            self.n_qubits, {k: np.conj(v) for k, v in self._terms.items()}
        )

    def scaled(self, coeff: complex) -> "PauliAccumulator":
        return PauliAccumulator(self.n_qubits, {k: coeff * v for k, v in self._terms.items()})

    def items(self) -> Iterator[Tuple[PauliProduct, complex]]:
        for (x, z), value in self._terms.items():
            if abs(value) > COEFF_TOL:
                yield PauliProduct(self.n_qubits, x, z), value

    def max_imag(self) -> float:
        return max((abs(v.imag) for v in self._terms.values()), default=0.0)

    def to_polynomial(self) -> "PauliPolynomial":
        """Convert to a real polynomial; imaginary residuals above 1e-10 are an error."""
        worst = self.max_imag()
        if worst > IMAG_TOL:
            raise HermiticityError(f"Imaginary coefficient residual {worst:.3e}")
        return self.hermitian_part()

    def hermitian_part(self) -> "PauliPolynomial":
        """(A + A^dagger) / 2, i.e. the real parts of the coefficients."""
        return PauliPolynomial(
            self.n_qubits, {k: float(np.real(v)) for k, v in self._terms.items()}
        )

    def anti_hermitian_part(self) -> "PauliPolynomial":
        """K with (A - A^dagger) / 2 = iK."""
        return PauliPolynomial(
            self.n_qubits, {k: float(np.imag(v)) for k, v in self._terms.items()}
        )

    def to_sparse(self) -> sp.csr_matrix:
        return _sparse_from_terms(self.n_qubits, self._terms.items())

    def __len__(self) -> int:
        return sum(1 for v in self._terms.values() if abs(v) > COEFF_TOL)


class PauliPolynomial:
    """
    Hermitian operator sum_k c_k P_k with real c_k and phase-free P_k.

    Terms whose |c_k| falls below 1e-12 are dropped on construction.
    Instances are treated as immutable values.
    """

    __slots__ = ("n_qubits", "_terms")

    def __init__(self, n_qubits: int, terms: Optional[Mapping[Key, float]] = None):
        self.n_qubits = n_qubits
        cleaned: Dict[Key, float] = {}
        limit = 1 << n_qubits
        for key, value in (terms or {}).items():
            if key[0] >= limit or key[1] >= limit:
                raise QubitCountMismatchError(f"Term {key} exceeds {n_qubits} qubits")
            if abs(value) > COEFF_TOL:
                cleaned[key] = float(value)
        self._terms = cleaned

    # ==================== Construction ====================

    @classmethod
    def zero(cls, n_qubits: int) -> "PauliPolynomial":
        return cls(n_qubits)

    @classmethod
    def from_terms(
        cls, n_qubits: int, terms: Iterable[Tuple[PauliProduct, float]]
    ) -> "PauliPolynomial":
        acc = PauliAccumulator(n_qubits)
        for product, coeff in terms:
            acc.add(product, coeff)
        return acc.to_polynomial()

    @classmethod
    def from_labels(cls, n_qubits: int, terms: Mapping[str, float]) -> "PauliPolynomial":
        return cls.from_terms(
            n_qubits, ((PauliProduct.from_label(l, n_qubits), c) for l, c in terms.items())
        )

    # ==================== Access ====================

    def items(self) -> Iterator[Tuple[PauliProduct, float]]:
        for (x, z), value in self._terms.items():
            yield PauliProduct(self.n_qubits, x, z), value

    def keys(self) -> Iterator[Key]:
        return iter(self._terms)

    def items_by_key(self) -> Iterator[Tuple[Key, float]]:
        return iter(self._terms.items())

    def coefficient(self, product: PauliProduct) -> float:
        return self._terms.get(product.key, 0.0)

    @property
    def terms(self) -> Dict[PauliProduct, float]:
        return dict(self.items())

    @property
    def constant(self) -> float:
        """Coefficient of the identity."""
        return self._terms.get((0, 0), 0.0)

    def without_identity(self) -> "PauliPolynomial":
        return PauliPolynomial(self.n_qubits, {k: v for k, v in self._terms.items() if k != (0, 0)})

    def paulis(self) -> List[PauliProduct]:
        """Non-identity products, in insertion order."""
        return [p for p, _ in self.items() if not p.is_identity]

    def one_norm(self, include_identity: bool = False) -> float:
        return sum(abs(v) for k, v in self._terms.items() if include_identity or k != (0, 0))

    def __len__(self) -> int:
        return len(self._terms)

    def __contains__(self, product: PauliProduct) -> bool:
        return product.key in self._terms

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PauliPolynomial):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self._terms == other._terms

    def isclose(self, other: "PauliPolynomial", atol: float = 1e-10) -> bool:
        if self.n_qubits != other.n_qubits:
            return False
        keys = set(self._terms) | set(other._terms)
        return all(
            abs(self._terms.get(k, 0.0) - other._terms.get(k, 0.0)) <= atol for k in keys
        )

    # ==================== Algebra ====================

    def add_scaled(self, coeff: complex, product: PauliProduct) -> "PauliPolynomial":
        """New polynomial with coeff * product added (product phase folded in)."""
        if product.n_qubits != self.n_qubits:
            raise QubitCountMismatchError(
                f"Adding {product.n_qubits}-qubit term to {self.n_qubits}-qubit polynomial"
            )
        acc = self.to_accumulator()
        acc.add(product, coeff)
        return acc.to_polynomial()

    def __add__(self, other: "PauliPolynomial") -> "PauliPolynomial":
        if not isinstance(other, PauliPolynomial):
            return NotImplemented
        if other.n_qubits != self.n_qubits:
            raise QubitCountMismatchError("Polynomials differ in qubit count")
        merged = dict(self._terms)
        for k, v in other._terms.items():
            merged[k] = merged.get(k, 0.0) + v
        return PauliPolynomial(self.n_qubits, merged)

    def __sub__(self, other: "PauliPolynomial") -> "PauliPolynomial":
        return self + other * -1.0

    def __mul__(self, scalar: float) -> "PauliPolynomial":
        if isinstance(scalar, PauliPolynomial):
            raise TypeError("Use multiply() for operator products")
        return PauliPolynomial(self.n_qubits, {k: scalar * v for k, v in self._terms.items()})

    __rmul__ = __mul__

    def multiply(self, other: "PauliPolynomial") -> PauliAccumulator:
        """Operator product; generally not Hermitian, so returned as an accumulator."""
        return self.to_accumulator().multiply(other.to_accumulator())

    def to_accumulator(self) -> PauliAccumulator:
        return PauliAccumulator(self.n_qubits, {k: complex(v) for k, v in self._terms.items()})

    # ==================== Numerical views ====================

    def apply(self, vector: np.ndarray) -> np.ndarray:
        """Action on a state vector (2^n,) or a stack of them (2^n, k)."""
        return _apply_terms(self.n_qubits, self._terms.items(), vector)

    def to_sparse(self) -> sp.csr_matrix:
        return _sparse_from_terms(self.n_qubits, self._terms.items())

    def to_matrix(self) -> np.ndarray:
        return self.to_sparse().toarray()

    # ==================== Serialization ====================

    def to_json(self) -> List[Dict[str, object]]:
        """List of {"term": label, "coeff": float}; floats survive json round trips."""
        return [{"term": p.label, "coeff": c} for p, c in self.items()]

    @classmethod
    def from_json(cls, data: Iterable[Mapping[str, object]], n_qubits: int) -> "PauliPolynomial":
        terms: Dict[Key, float] = {}
        for entry in data:
            product = PauliProduct.from_label(str(entry["term"]), n_qubits)
            terms[product.key] = terms.get(product.key, 0.0) + float(entry["coeff"])
        return cls(n_qubits, terms)

    def __repr__(self) -> str:
        preview = ", ".join(f"{c:+.4g} {p.label}" for p, c in list(self.items())[:4])
        more = "" if len(self) <= 4 else f", ... ({len(self)} terms)"
        return f"PauliPolynomial({self.n_qubits}q: {preview}{more})"


def group_terms_by_x(items: Iterable[Tuple[Key, complex]]) -> Dict[int, List[Tuple[int, complex]]]:
    grouped: Dict[int, List[Tuple[int, complex]]] = defaultdict(list)
    for (x, z), value in items:
        if abs(value) > COEFF_TOL:
            grouped[x].append((z, value))
    return grouped


def _diagonal_factor(n_qubits: int, x: int, zs: List[Tuple[int, complex]]) -> np.ndarray:
    """sum_k c_k i^|x&z_k| (-1)^|b&z_k| evaluated at every source index b."""
    dim = 1 << n_qubits
    diag = np.zeros(dim, dtype=complex)
    for z, value in zs:
        signs = 1.0 - 2.0 * parity_vector(z, n_qubits)
        diag += value * (1j ** ((x & z).bit_count() % 4)) * signs
    return diag


def _apply_terms(n_qubits: int, items, vector: np.ndarray) -> np.ndarray:
    dim = 1 << n_qubits
    if vector.shape[0] != dim:
        raise QubitCountMismatchError(
            f"Vector of length {vector.shape[0]} for {n_qubits} qubits"
        )
    index = np.arange(dim, dtype=np.int64)
    out = np.zeros(vector.shape, dtype=complex)
    for x, zs in group_terms_by_x(items).items():
        source = index ^ x
        diag = _diagonal_factor(n_qubits, x, zs)[source]
        if vector.ndim == 1:
            out += diag * vector[source]
        else:
            out += diag[:, None] * vector[source]
    return out


def _sparse_from_terms(n_qubits: int, items) -> sp.csr_matrix:
    dim = 1 << n_qubits
    index = np.arange(dim, dtype=np.int64)
    rows, cols, data = [], [], []
    for x, zs in group_terms_by_x(items).items():
        diag = _diagonal_factor(n_qubits, x, zs)
        rows.append(index ^ x)
        cols.append(index)
        data.append(diag)
    if not data:
        return sp.csr_matrix((dim, dim), dtype=complex)
    matrix = sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    )
    return matrix.tocsr()
