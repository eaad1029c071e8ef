"""
Majorana polynomials.

gamma_{2p} = a_p + a_p^dagger and gamma_{2p+1} = -i (a_p - a_p^dagger).
Monomials are stored over strictly increasing index tuples S in Hermitian
normalisation Gamma_S = i^(k(k-1)/2) gamma_{s1}...gamma_{sk}, k = |S|, so a
Hermitian operator has real coefficients (n_p = (1 + i gamma_2p gamma_2p+1)/2
is stored as {(): 0.5, (2p, 2p+1): 0.5}).
"""

from __future__ import annotations

import math
from collections import defaultdict
from typing import Dict, FrozenSet, Iterator, Mapping, Optional, Tuple

from measbench.core.errors import HermiticityError, ModeIndexError
from measbench.fermion.operators import (
    COEFF_TOL,
    IMAG_TOL,
    FermionPolynomial,
    Term,
    normal_order_terms,
)
from measbench.pauli.polynomial import PauliAccumulator, PauliPolynomial
from measbench.pauli.product import PauliProduct

Monomial = Tuple[int, ...]


def hermitian_phase(k: int) -> complex:
    """i^(k(k-1)/2): makes gamma_S Hermitian."""
    return 1j ** ((k * (k - 1) // 2) % 4)


def _times_gamma(monomial: Monomial, index: int) -> Tuple[Monomial, int]:
    """gamma_S * gamma_index = sign * gamma_S' with S' sorted."""
    greater = sum(1 for s in monomial if s > index)
    sign = -1 if greater % 2 else 1
    if index in monomial:
        return tuple(s for s in monomial if s != index), sign
    return tuple(sorted(monomial + (index,))), sign


class MajoranaPolynomial:
    """Real combination of Hermitian-normalised Majorana monomials over 2N indices."""

    __slots__ = ("n_modes", "_terms")

    def __init__(self, n_modes: int, terms: Optional[Mapping[Monomial, float]] = None):
        self.n_modes = n_modes
        cleaned: Dict[Monomial, float] = {}
        for monomial, value in (terms or {}).items():
            if list(monomial) != sorted(set(monomial)):
                raise ValueError(f"Monomial {monomial} is not strictly increasing")
            if monomial and not 0 <= monomial[-1] < 2 * n_modes:
                raise ModeIndexError(f"Majorana index {monomial[-1]} outside 2N={2 * n_modes}")
            if abs(value) > COEFF_TOL:
                cleaned[monomial] = float(value)
        self._terms = cleaned

    @classmethod
    def from_raw(cls, n_modes: int, raw: Mapping[Monomial, complex]) -> "MajoranaPolynomial":
        """From coefficients on bare gamma_S products; must be Hermitian."""
        terms: Dict[Monomial, float] = {}
        for monomial, value in raw.items():
            scaled = complex(value) / hermitian_phase(len(monomial))
            if abs(scaled.imag) > IMAG_TOL:
                raise HermiticityError(f"Non-Hermitian Majorana term {monomial}: {value}")
            terms[monomial] = scaled.real
        return cls(n_modes, terms)

    def items(self) -> Iterator[Tuple[Monomial, float]]:
        return iter(self._terms.items())

    @property
    def terms(self) -> Dict[Monomial, float]:
        return dict(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def isclose(self, other: "MajoranaPolynomial", atol: float = 1e-10) -> bool:
        keys = set(self._terms) | set(other._terms)
        return self.n_modes == other.n_modes and all(
            abs(self._terms.get(k, 0.0) - other._terms.get(k, 0.0)) <= atol for k in keys
        )


def _ladder_in_majoranas(mode: int, dagger: bool) -> Dict[Monomial, complex]:
    # a = (g_2p + i g_2p+1)/2, a^dagger = (g_2p - i g_2p+1)/2
    return {(2 * mode,): 0.5, (2 * mode + 1,): -0.5j if dagger else 0.5j}


def to_majorana(op: FermionPolynomial) -> MajoranaPolynomial:
    """Rewrite a Hermitian fermion polynomial in Majorana monomials."""
    raw: Dict[Monomial, complex] = defaultdict(complex)
    for term, coeff in op.items():
        partial: Dict[Monomial, complex] = {(): complex(coeff)}
        for mode, dagger in term:
            nxt: Dict[Monomial, complex] = defaultdict(complex)
            for monomial, value in partial.items():
                for index, weight in _ladder_in_majoranas(mode, dagger).items():
                    product, sign = _times_gamma(monomial, index[0])
                    nxt[product] += sign * value * weight
            partial = nxt
        for monomial, value in partial.items():
            raw[monomial] += value
    return MajoranaPolynomial.from_raw(op.n_modes, raw)


def from_majorana(poly: MajoranaPolynomial) -> FermionPolynomial:
    """Inverse substitution gamma -> ladder operators, normal ordered."""
    strings = []
    for monomial, coeff in poly.items():
        partial: Dict[Term, complex] = {(): coeff * hermitian_phase(len(monomial))}
        for index in monomial:
            mode = index // 2
            if index % 2 == 0:
                pieces = {((mode, False),): 1.0, ((mode, True),): 1.0}
            else:
                pieces = {((mode, False),): -1j, ((mode, True),): 1j}
            partial = {
                term + piece: value * weight
                for term, value in partial.items()
                for piece, weight in pieces.items()
            }
        strings.extend(partial.items())
    return FermionPolynomial(poly.n_modes, normal_order_terms(strings), ordered=True)


# ==================== Jordan-Wigner images ====================

def majorana_pauli(index: int, n_qubits: int) -> PauliProduct:
    """gamma_2p -> Z_<p X_p, gamma_2p+1 -> Z_<p Y_p."""
    mode = index // 2
    below = (1 << mode) - 1
    bit = 1 << mode
    if index % 2 == 0:
        return PauliProduct(n_qubits, bit, below)
    return PauliProduct(n_qubits, bit, below | bit)


def monomial_pauli(monomial: Monomial, n_qubits: int) -> PauliProduct:
    """Gamma_S under Jordan-Wigner, with its sign as the product phase (0 or 2)."""
    product = PauliProduct.identity(n_qubits)
    for index in monomial:
        product = product.multiply(majorana_pauli(index, n_qubits))
    k = len(monomial)
    return product.with_phase(product.phase + (k * (k - 1) // 2))


def majorana_jordan_wigner(poly: MajoranaPolynomial) -> PauliPolynomial:
    acc = PauliAccumulator(poly.n_modes)
    for monomial, coeff in poly.items():
        acc.add(monomial_pauli(monomial, poly.n_modes), coeff)
    return acc.to_polynomial()


def pauli_to_majorana_support(product: PauliProduct) -> FrozenSet[int]:
    """
    Majorana index set S with JW(gamma_S) proportional to `product`.

    Qubit by qubit: b_p = z_p xor parity(x_{>p}) selects gamma_2p+1 and
    a_p = x_p xor b_p selects gamma_2p.
    """
    support = set()
    higher_parity = 0
    for p in reversed(range(product.n_qubits)):
        xp = (product.x >> p) & 1
        zp = (product.z >> p) & 1
        odd = zp ^ higher_parity
        even = xp ^ odd
        if even:
            support.add(2 * p)
        if odd:
            support.add(2 * p + 1)
        higher_parity ^= xp
    return frozenset(support)


def double_factorial(k: int) -> int:
    """k!! with (-1)!! = 0!! = 1."""
    if k <= 0:
        return 1
    return math.prod(range(k, 0, -2))
