"""State vectors, sector eigensolvers, CISD proxies and orbital rotations."""

from measbench.states.cache import StateCache
from measbench.states.rotation import apply_one_body_rotation, one_body_generator
from measbench.states.sampling import joint_eigenbasis, sample_joint_outcomes
from measbench.states.solver import (
    build_state_bundle,
    cisd_basis,
    cisd_states,
    hartree_fock_occupation,
    lowest_eigenstates,
    restricted_matrix,
    sector_basis,
)
from measbench.states.wavevector import (
    StateBundle,
    WaveVector,
    ensemble_variance,
    expectation,
    variance,
)
