"""
Second-quantized electronic Hamiltonian and CIS excitation operators.

Spin orbitals are interleaved: spatial orbital p gives alpha mode 2p and beta
mode 2p+1. The Hamiltonian is written in excitation operators,

    H_e = sum_pq h'_pq E^p_q + sum_pqrs g'_pqrs E^p_q E^r_s

with g' = (pq|rs)/2 between same-spin pairs (p,q) and (r,s), and
h'_ps = h_ps - 1/2 sum_q (pq|qs) absorbing the contraction that the product
ordering E E introduces. The nuclear repulsion constant is not included.
"""

from __future__ import annotations

import logging
from typing import List, Tuple

import numpy as np

from measbench.chemistry.integrals import MolecularIntegrals
from measbench.core.errors import SectorError
from measbench.fermion.operators import (
    COEFF_TOL,
    FermionPolynomial,
    excitation,
    normal_order_terms,
)

logger = logging.getLogger(__name__)


def effective_one_body(integrals: MolecularIntegrals) -> np.ndarray:
    """Spatial h' = h - 1/2 sum_q (pq|qs)."""
    return integrals.h - 0.5 * np.einsum("pqqs->ps", integrals.g)


def spin_orbital_tensors(integrals: MolecularIntegrals) -> Tuple[np.ndarray, np.ndarray]:
    """Coefficient tensors (h'_so, g'_so) of the E / E E form over 2n modes."""
    n = integrals.n_spatial
    spin_block = np.eye(2)
    one = np.kron(effective_one_body(integrals), spin_block)
    # g_so[P,Q,R,S] nonzero when spin(P)=spin(Q) and spin(R)=spin(S)
    two = 0.5 * np.einsum(
        "pqrs,ab,cd->paqbrcsd", integrals.g, spin_block, spin_block
    ).reshape(2 * n, 2 * n, 2 * n, 2 * n)
    return one, two


def operator_from_tensors(one_body: np.ndarray, two_body: np.ndarray) -> FermionPolynomial:
    """sum h_pq E^p_q + sum g_pqrs E^p_q E^r_s, normal ordered."""
    n_modes = one_body.shape[0]

    def strings():
        for p, q in zip(*np.nonzero(np.abs(one_body) > COEFF_TOL)):
            yield ((int(p), True), (int(q), False)), float(one_body[p, q])
        for p, q, r, s in zip(*np.nonzero(np.abs(two_body) > COEFF_TOL)):
            yield (
                ((int(p), True), (int(q), False), (int(r), True), (int(s), False)),
                float(two_body[p, q, r, s]),
            )

    return FermionPolynomial(n_modes, normal_order_terms(strings()), ordered=True)


def build_electronic_hamiltonian(integrals: MolecularIntegrals) -> FermionPolynomial:
    """Electronic Hamiltonian over 2n spin orbitals (nuclear repulsion excluded)."""
    one, two = spin_orbital_tensors(integrals)
    hamiltonian = operator_from_tensors(one, two)
    logger.debug(f"Hamiltonian: {len(hamiltonian)} normal-ordered terms")
    return hamiltonian


def build_cis_operators(n_electrons: int, n_modes: int) -> List[FermionPolynomial]:
    """
    Identity followed by E^a_i for every occupied i < n_electrons and virtual a.

    The Hartree-Fock reference fills the lowest n_electrons spin orbitals, so
    the list has D = 1 + n_occ * n_virt entries (spin-flip excitations included).
    """
    if not 0 < n_electrons <= n_modes:
        raise SectorError(f"{n_electrons} electrons in {n_modes} modes")
    operators = [FermionPolynomial.identity(n_modes)]
    for i in range(n_electrons):
        for a in range(n_electrons, n_modes):
            operators.append(excitation(a, i, n_modes))
    return operators


def cis_labels(n_electrons: int, n_modes: int) -> List[str]:
    labels = ["1"]
    for i in range(n_electrons):
        for a in range(n_electrons, n_modes):
            labels.append(f"E{a}_{i}")
    return labels
