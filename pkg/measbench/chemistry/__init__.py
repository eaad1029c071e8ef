"""Molecular integrals, electronic Hamiltonians and task observables."""

from measbench.chemistry.hamiltonian import (
    build_cis_operators,
    build_electronic_hamiltonian,
    cis_labels,
    effective_one_body,
    operator_from_tensors,
    spin_orbital_tensors,
)
from measbench.chemistry.hydrogen import hydrogen_chain
from measbench.chemistry.integrals import (
    MolecularIntegrals,
    load_integrals,
    parse_fcidump,
    parse_json_integrals,
    write_fcidump,
)
from measbench.chemistry.observables import (
    ObservableSet,
    build_ground_observables,
    build_mc_observables,
    build_qse_observables,
)
