"""
Fermionic polynomials in second quantization.

A term is a tuple of ladder operators (mode, dagger). Canonical (normal) order
puts every creation operator left of every annihilation operator and sorts
ascending by mode inside each block; repeated operators inside a block vanish.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple

import numpy as np

from measbench.core.errors import HermiticityError, ModeIndexError

COEFF_TOL = 1e-12
IMAG_TOL = 1e-10

Ladder = Tuple[int, bool]
Term = Tuple[Ladder, ...]


def _normal_order_into(ops: list, coeff: complex, out: Dict[Term, complex]):
    """Insertion sort with anticommutation; contractions recurse."""
    for i in range(1, len(ops)):
        for j in range(i, 0, -1):
            right, left = ops[j], ops[j - 1]
            if right[1] and not left[1]:
                ops[j - 1], ops[j] = right, left
                coeff = -coeff
                if right[0] == left[0]:
                    # a_p a_p^dagger = 1 - a_p^dagger a_p
                    _normal_order_into(ops[: j - 1] + ops[j + 1 :], -coeff, out)
            elif right[1] == left[1]:
                if right[0] == left[0]:
                    return
                if right[0] < left[0]:
                    ops[j - 1], ops[j] = right, left
                    coeff = -coeff
    out[tuple(ops)] += coeff


def normal_order_terms(terms: Iterable[Tuple[Term, complex]]) -> Dict[Term, complex]:
    """Canonical form of a sum of (possibly unordered) ladder strings."""
    out: Dict[Term, complex] = defaultdict(complex)
    for term, coeff in terms:
        if coeff == 0:
            continue
        _normal_order_into(list(term), coeff, out)
    return out


def _realify(terms: Mapping[Term, complex]) -> Dict[Term, float]:
    real: Dict[Term, float] = {}
    for term, value in terms.items():
        value = complex(value)
        if abs(value.imag) > IMAG_TOL:
            raise HermiticityError(
                f"Complex coefficient {value} on fermion term {term}"
            )
        if abs(value.real) > COEFF_TOL:
            real[term] = value.real
    return real


def _adjoint_term(term: Term) -> Term:
    return tuple((mode, not dagger) for mode, dagger in reversed(term))


class FermionPolynomial:
    """
    Real-coefficient polynomial in ladder operators, kept in normal order.

    Values are immutable; every operation returns a new polynomial.
    """

    __slots__ = ("n_modes", "_terms")

    def __init__(
        self,
        n_modes: int,
        terms: Optional[Mapping[Term, complex]] = None,
        ordered: bool = False,
    ):
        self.n_modes = n_modes
        terms = terms or {}
        for term in terms:
            for mode, _ in term:
                if not 0 <= mode < n_modes:
                    raise ModeIndexError(f"Mode {mode} outside register of {n_modes}")
        if not ordered:
            terms = normal_order_terms(terms.items())
        self._terms: Dict[Term, float] = _realify(terms)

    # ==================== Construction ====================

    @classmethod
    def identity(cls, n_modes: int, coeff: float = 1.0) -> "FermionPolynomial":
        return cls(n_modes, {(): coeff}, ordered=True)

    @classmethod
    def ladder(cls, n_modes: int, mode: int, dagger: bool) -> "FermionPolynomial":
        return cls(n_modes, {((mode, dagger),): 1.0})

    @classmethod
    def excitation(cls, p: int, q: int, n_modes: int) -> "FermionPolynomial":
        """E^p_q = a_p^dagger a_q."""
        return cls(n_modes, {((p, True), (q, False)): 1.0})

    @classmethod
    def number(cls, p: int, n_modes: int) -> "FermionPolynomial":
        return cls.excitation(p, p, n_modes)

    # ==================== Access ====================

    def items(self) -> Iterator[Tuple[Term, float]]:
        return iter(self._terms.items())

    @property
    def terms(self) -> Dict[Term, float]:
        return dict(self._terms)

    @property
    def constant(self) -> float:
        return self._terms.get((), 0.0)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FermionPolynomial):
            return NotImplemented
        return self.n_modes == other.n_modes and self._terms == other._terms

    def isclose(self, other: "FermionPolynomial", atol: float = 1e-10) -> bool:
        keys = set(self._terms) | set(other._terms)
        return self.n_modes == other.n_modes and all(
            abs(self._terms.get(k, 0.0) - other._terms.get(k, 0.0)) <= atol for k in keys
        )

    # ==================== Algebra ====================

    def _check(self, other: "FermionPolynomial"):
        if self.n_modes != other.n_modes:
            raise ModeIndexError(
                f"Operators on {self.n_modes} and {other.n_modes} modes"
            )

    def __add__(self, other: "FermionPolynomial") -> "FermionPolynomial":
        self._check(other)
        merged = dict(self._terms)
        for term, value in other._terms.items():
            merged[term] = merged.get(term, 0.0) + value
        return FermionPolynomial(self.n_modes, merged, ordered=True)

    def __sub__(self, other: "FermionPolynomial") -> "FermionPolynomial":
        return self + other * -1.0

    def __mul__(self, scalar: float) -> "FermionPolynomial":
        if isinstance(scalar, FermionPolynomial):
            return multiply_fermion(self, scalar)
        return FermionPolynomial(
            self.n_modes, {t: scalar * v for t, v in self._terms.items()}, ordered=True
        )

    __rmul__ = __mul__

    def adjoint(self) -> "FermionPolynomial":
        return FermionPolynomial(
            self.n_modes, {_adjoint_term(t): v for t, v in self._terms.items()}
        )

    def hermitian_part(self) -> "FermionPolynomial":
        """(X + X^dagger) / 2."""
        return (self + self.adjoint()) * 0.5

    def is_hermitian(self, atol: float = 1e-10) -> bool:
        return self.isclose(self.adjoint(), atol)

    def particle_conserving(self) -> bool:
        return all(
            sum(1 if d else -1 for _, d in term) == 0 for term in self._terms
        )

    def __repr__(self) -> str:
        def fmt(term: Term) -> str:
            return " ".join(f"a{m}^" if d else f"a{m}" for m, d in term) or "1"

        preview = ", ".join(f"{v:+.4g} {fmt(t)}" for t, v in list(self._terms.items())[:4])
        return f"FermionPolynomial({self.n_modes} modes: {preview})"


def normal_order(terms: Mapping[Term, complex], n_modes: int) -> FermionPolynomial:
    """Canonical polynomial of an arbitrary sum of ladder strings."""
    return FermionPolynomial(n_modes, terms)


def excitation(p: int, q: int, n_modes: int) -> FermionPolynomial:
    if not (0 <= p < n_modes and 0 <= q < n_modes):
        raise ModeIndexError(f"Excitation ({p}, {q}) outside register of {n_modes}")
    return FermionPolynomial.excitation(p, q, n_modes)


def multiply_fermion(a: FermionPolynomial, b: FermionPolynomial) -> FermionPolynomial:
    """Normal-ordered operator product a * b."""
    a._check(b)
    products = (
        (ta + tb, va * vb) for ta, va in a.items() for tb, vb in b.items()
    )
    return FermionPolynomial(a.n_modes, normal_order_terms(products), ordered=True)


def one_body_operator(matrix: np.ndarray) -> FermionPolynomial:
    """sum_pq M_pq a_p^dagger a_q."""
    n = matrix.shape[0]
    terms = {
        ((p, True), (q, False)): float(matrix[p, q])
        for p in range(n)
        for q in range(n)
        if abs(matrix[p, q]) > COEFF_TOL
    }
    return FermionPolynomial(n, terms, ordered=True)
