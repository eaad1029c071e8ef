"""Fermionic operators, Majorana rewriting and fermion-to-qubit encodings."""

from measbench.fermion.encodings import (
    FermionEncoding,
    bravyi_kitaev,
    fenwick_matrix,
    jordan_wigner,
    map_operator,
)
from measbench.fermion.majorana import (
    MajoranaPolynomial,
    from_majorana,
    majorana_jordan_wigner,
    pauli_to_majorana_support,
    to_majorana,
)
from measbench.fermion.operators import (
    FermionPolynomial,
    excitation,
    multiply_fermion,
    normal_order,
    one_body_operator,
)
