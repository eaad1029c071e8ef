"""Symplectic Pauli algebra: products, real polynomials and complex accumulators."""

from measbench.pauli.polynomial import (
    COEFF_TOL,
    IMAG_TOL,
    PauliAccumulator,
    PauliPolynomial,
)
from measbench.pauli.product import PauliProduct, basis_bits, parity_vector


def multiply(a: PauliProduct, b: PauliProduct) -> PauliProduct:
    """Exact product a * b with phase."""
    return a.multiply(b)


def commutes_fully(a: PauliProduct, b: PauliProduct) -> bool:
    return a.commutes_fully(b)


def commutes_qubitwise(a: PauliProduct, b: PauliProduct) -> bool:
    return a.commutes_qubitwise(b)


def add_scaled(poly: PauliPolynomial, coeff: complex, term: PauliProduct) -> PauliPolynomial:
    return poly.add_scaled(coeff, term)
