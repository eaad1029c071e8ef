"""Shared fixtures."""

import os
from pathlib import Path

import numpy as np
import pytest

from measbench.chemistry.hamiltonian import build_cis_operators, build_electronic_hamiltonian
from measbench.chemistry.hydrogen import hydrogen_chain
from measbench.chemistry.integrals import MolecularIntegrals, load_integrals, write_fcidump
from measbench.chemistry.observables import build_qse_observables
from measbench.fermion.encodings import jordan_wigner
from measbench.states.solver import build_state_bundle
from tests.oracles import random_integrals

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def h2_path() -> Path:
    return DATA_DIR / "h2_sto3g.fcidump"


@pytest.fixture(scope="session")
def h2_1a_path(tmp_path_factory) -> Path:
    """H2 STO-3G integrals at the 1 A bond length, generated and written as FCIDUMP."""
    path = tmp_path_factory.mktemp("integrals") / "h2_1a.fcidump"
    write_fcidump(hydrogen_chain(2, 1.0), path)
    return path


@pytest.fixture(scope="session")
def h2_integrals(h2_path) -> MolecularIntegrals:
    return load_integrals(h2_path)


@pytest.fixture(scope="session")
def h2_hamiltonian(h2_integrals):
    """Jordan-Wigner electronic Hamiltonian of H2 (4 qubits)."""
    return jordan_wigner(build_electronic_hamiltonian(h2_integrals))


@pytest.fixture(scope="session")
def h2_bundle(h2_hamiltonian):
    """All six two-electron states of H2, exact and CISD (identical for H2)."""
    return build_state_bundle(h2_hamiltonian, 2, 6)


@pytest.fixture(scope="session")
def h2_qse(h2_integrals):
    """Raw QSE products of H2 over the CIS operators (30 observables)."""
    return build_qse_observables(
        build_electronic_hamiltonian(h2_integrals), build_cis_operators(2, 4)
    )


@pytest.fixture(scope="session")
def random_system() -> MolecularIntegrals:
    """Three spatial orbitals, four electrons, random symmetric integrals."""
    h, g = random_integrals(3, seed=7)
    return MolecularIntegrals(3, 4, h, g, e_nuc=0.5)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def published_data_dir():
    """Directory of published integral files, when MEASBENCH_PUBLISHED_DATA is set."""
    value = os.environ.get("MEASBENCH_PUBLISHED_DATA")
    if not value:
        pytest.skip("MEASBENCH_PUBLISHED_DATA not set")
    return Path(value)
