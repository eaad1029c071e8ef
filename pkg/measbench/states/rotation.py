"""Orbital rotations exp(sum_pq kappa_pq a_p^dagger a_q) applied to state vectors."""

from __future__ import annotations

import numpy as np
from scipy.sparse.linalg import expm_multiply

from measbench.core.errors import StateError
from measbench.core.models import Mapping
from measbench.fermion.encodings import FermionEncoding
from measbench.fermion.operators import one_body_operator
from measbench.pauli.polynomial import PauliAccumulator
from measbench.states.wavevector import WaveVector

ANTISYMMETRY_TOL = 1e-10


def one_body_generator(kappa: np.ndarray, mapping: Mapping | str = Mapping.JW) -> PauliAccumulator:
    """Qubit image of sum_pq kappa_pq a_p^dagger a_q (anti-Hermitian for real antisymmetric kappa)."""
    kappa = np.asarray(kappa, dtype=float)
    if kappa.ndim != 2 or kappa.shape[0] != kappa.shape[1]:
        raise StateError(f"Generator has shape {kappa.shape}")
    if not np.allclose(kappa, -kappa.T, atol=ANTISYMMETRY_TOL):
        raise StateError("Orbital-rotation generator is not antisymmetric")
    encoding = FermionEncoding.for_mapping(mapping, kappa.shape[0])
    return encoding.map_complex(one_body_operator(kappa))


def apply_one_body_rotation(
    state: WaveVector, kappa: np.ndarray, mapping: Mapping | str = Mapping.JW
) -> WaveVector:
    """
    U|psi> with U = exp(sum_{p>q} theta_pq (E^p_q - E^q_p)) = exp(sum_pq kappa_pq E^p_q).

    U a_k^dagger U^dagger = sum_p a_p^dagger [expm(kappa)]_pk.
    """
    if kappa.shape[0] != state.n_qubits:
        raise StateError(
            f"{kappa.shape[0]}-mode generator for a {state.n_qubits}-qubit state"
        )
    if not np.any(kappa):
        return state
    generator = one_body_generator(kappa, mapping).to_sparse()
    rotated = expm_multiply(generator, state.amplitudes)
    return WaveVector.normalized(rotated, label=state.label, energy=state.energy)
