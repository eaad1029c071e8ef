"""Tests for state vectors, sector eigensolvers, the state cache and sampling."""

import numpy as np
import pytest

from measbench.chemistry.hamiltonian import build_electronic_hamiltonian
from measbench.chemistry.integrals import MolecularIntegrals
from measbench.core.errors import SectorError, StateError
from measbench.fermion.encodings import FermionEncoding, bravyi_kitaev, jordan_wigner
from measbench.pauli.polynomial import PauliPolynomial
from measbench.pauli.product import PauliProduct
from measbench.states.cache import StateCache
from measbench.states.rotation import apply_one_body_rotation
from measbench.states.sampling import joint_eigenbasis, sample_joint_outcomes
from measbench.states.solver import (
    cisd_basis,
    cisd_states,
    lowest_eigenstates,
    sector_basis,
)
from measbench.states.wavevector import (
    StateBundle,
    WaveVector,
    ensemble_variance,
    expectation,
    variance,
)
from tests import oracles


@pytest.fixture(scope="module")
def four_orbital_hamiltonian():
    """Eight-mode JW Hamiltonian with four electrons (CISD is a strict subspace)."""
    h, g = oracles.random_integrals(4, seed=11)
    integrals = MolecularIntegrals(4, 4, h, g)
    return jordan_wigner(build_electronic_hamiltonian(integrals))


def random_state(rng, n_qubits):
    return WaveVector.normalized(rng.normal(size=1 << n_qubits) + 1j * rng.normal(size=1 << n_qubits))


class TestWaveVector:
    """Tests for WaveVector and expectation values."""

    def test_rejects_bad_vectors(self):
        """Lengths must be powers of two and norms must be one."""
        with pytest.raises(StateError):
            WaveVector(np.ones(3) / np.sqrt(3))
        with pytest.raises(StateError):
            WaveVector(np.ones(4))
        with pytest.raises(StateError):
            WaveVector.normalized(np.zeros(4))

    def test_basis_state(self):
        """Basis states are one-hot with unit probability."""
        state = WaveVector.basis_state(3, 5)
        assert state.n_qubits == 3
        assert state.probabilities[5] == pytest.approx(1.0)

    def test_variance_matches_dense(self, rng):
        """Var(A) agrees with the dense oracle."""
        op = PauliPolynomial.from_labels(3, {"X0 X1": 0.4, "Z2": -1.2, "Y0 Y2": 0.3, "I": 2.0})
        state = random_state(rng, 3)
        matrix = op.to_matrix()
        assert variance(state, op) == pytest.approx(oracles.variance(matrix, state.amplitudes))
        mean = np.vdot(state.amplitudes, matrix @ state.amplitudes).real
        assert expectation(state, op) == pytest.approx(mean)

    def test_eigenstate_has_no_variance(self):
        """Z0 on |1> is sharp."""
        op = PauliPolynomial.from_labels(2, {"Z0": 1.0})
        state = WaveVector.basis_state(2, 1)
        assert expectation(state, op) == pytest.approx(-1.0)
        assert variance(state, op) == pytest.approx(0.0)

    def test_ensemble_variance(self, rng):
        """A pure ensemble reduces to the state variance; mixtures add spread."""
        op = PauliPolynomial.from_labels(1, {"Z0": 1.0})
        zero, one = WaveVector.basis_state(1, 0), WaveVector.basis_state(1, 1)
        assert ensemble_variance([1.0], [zero], op) == pytest.approx(0.0)
        assert ensemble_variance([0.5, 0.5], [zero, one], op) == pytest.approx(1.0)
        with pytest.raises(StateError):
            ensemble_variance([0.7, 0.7], [zero, one], op)

    def test_bundle_default_weights(self):
        """Bundles default to a uniform trace-1 ensemble."""
        states = [WaveVector.basis_state(1, 0), WaveVector.basis_state(1, 1)]
        bundle = StateBundle(states, states)
        assert np.allclose(bundle.weights, [0.5, 0.5])
        with pytest.raises(StateError):
            StateBundle(states, states, np.array([1.0]))


class TestSectorSolver:
    """Tests for sector bases and eigenstates."""

    def test_sector_basis_jw(self):
        """Two electrons in four modes."""
        assert sector_basis(4, 2).tolist() == [3, 5, 6, 9, 10, 12]

    def test_sector_basis_bk(self):
        """BK sector indices are the encoded occupations."""
        encoding = FermionEncoding.for_mapping("bk", 4)
        expected = sorted(encoding.encode_occupation(o) for o in [3, 5, 6, 9, 10, 12])
        assert sector_basis(4, 2, "bk").tolist() == expected

    def test_energies_match_dense(self, random_system):
        """Sector eigenvalues equal the dense oracle under both encodings."""
        expected = oracles.fci_energies(random_system.h, random_system.g, 4, count=3)
        fermion = build_electronic_hamiltonian(random_system)
        for mapping, encode in (("jw", jordan_wigner), ("bk", bravyi_kitaev)):
            states = lowest_eigenstates(encode(fermion), 4, 3, mapping)
            assert np.allclose([s.energy for s in states], expected, atol=1e-8)

    def test_eigenstates_are_eigenvectors(self, random_system):
        """H|psi> = E|psi> and the states stay in the sector."""
        hamiltonian = jordan_wigner(build_electronic_hamiltonian(random_system))
        basis = set(sector_basis(6, 4).tolist())
        for state in lowest_eigenstates(hamiltonian, 4, 2):
            image = hamiltonian.apply(state.amplitudes)
            assert np.allclose(image, state.energy * state.amplitudes, atol=1e-8)
            support = set(np.nonzero(np.abs(state.amplitudes) > 1e-12)[0].tolist())
            assert support <= basis

    def test_invalid_counts(self, h2_hamiltonian):
        """Zero states or more states than the sector holds raise SectorError."""
        with pytest.raises(SectorError):
            lowest_eigenstates(h2_hamiltonian, 2, 0)
        with pytest.raises(SectorError):
            lowest_eigenstates(h2_hamiltonian, 2, 7)

    def test_h2_bundle(self, h2_bundle, h2_integrals):
        """CISD is complete for two electrons, so proxies equal the exact states."""
        assert h2_bundle.n_states == 6
        energies = h2_bundle.exact_energies
        assert np.all(np.diff(energies) >= -1e-12)
        assert energies[0] + h2_integrals.e_nuc == pytest.approx(-1.137270, abs=5e-4)
        proxy_energies = [s.energy for s in h2_bundle.proxy]
        assert np.allclose(proxy_energies, energies, atol=1e-10)
        assert np.allclose(h2_bundle.weights, 1 / 6)


class TestCisd:
    """Tests for CISD subspaces."""

    def test_basis_sizes(self):
        """1 + 4*4 singles + 6*6 doubles for four electrons in eight modes."""
        assert len(cisd_basis(8, 4)) == 53
        assert len(cisd_basis(8, 4, max_level=1)) == 17
        assert len(cisd_basis(8, 4, "bk")) == 53

    def test_interlacing(self, four_orbital_hamiltonian):
        """Each CISD eigenvalue lies above the matching sector eigenvalue."""
        exact = lowest_eigenstates(four_orbital_hamiltonian, 4, 4)
        proxy = cisd_states(four_orbital_hamiltonian, 4, 4)
        for e, p in zip(exact, proxy):
            assert p.energy >= e.energy - 1e-9

    def test_default_reference_is_aufbau(self):
        """Omitting the reference matches passing the lowest-four mask or its bit vector."""
        default = cisd_basis(8, 4)
        assert np.array_equal(default, cisd_basis(8, 4, reference=0b00001111))
        assert np.array_equal(default, cisd_basis(8, 4, reference=[1, 1, 1, 1, 0, 0, 0, 0]))

    @pytest.mark.parametrize("mapping", ["jw", "bk"])
    def test_non_aufbau_reference(self, mapping):
        """An excited reference spans its own CISD space of the same size."""
        reference = 0b00110011
        basis = cisd_basis(8, 4, mapping, reference=reference)
        encoding = FermionEncoding.for_mapping(mapping, 8)
        assert len(basis) == 53
        assert encoding.encode_occupation(reference) in set(basis.tolist())
        assert not np.array_equal(basis, cisd_basis(8, 4, mapping))
        # Single excitations only: 1 + 4*4 determinants
        assert len(cisd_basis(8, 4, mapping, max_level=1, reference=reference)) == 17

    def test_non_aufbau_reference_states(self, four_orbital_hamiltonian):
        """CISD states about a different reference still bound the sector ground state."""
        exact = lowest_eigenstates(four_orbital_hamiltonian, 4, 1)
        proxy = cisd_states(four_orbital_hamiltonian, 4, 1, reference=[1, 1, 0, 0, 1, 1, 0, 0])
        assert proxy[0].energy >= exact[0].energy - 1e-9
        assert proxy[0].label.startswith("cisd")

    @pytest.mark.parametrize("reference", [0b111, 0b100001111, [1, 1, 1, 1], [1, 1, 2, 0, 0, 0, 0, 0]])
    def test_invalid_reference(self, reference):
        """References with the wrong electron count, width or bit values are rejected."""
        with pytest.raises(SectorError):
            cisd_basis(8, 4, reference=reference)


class TestStateCache:
    """Tests for the on-disk bundle cache."""

    def test_round_trip(self, tmp_path, h2_bundle):
        """Saved bundles load back with energies, labels and weights."""
        cache = StateCache(tmp_path / "states")
        key = StateCache.key("ab" * 32, "jw", 2, 6)
        assert key == f"{'ab' * 8}-jw-n2-s6"
        assert cache.load(key) is None
        cache.save(key, h2_bundle, label="H2")
        loaded = cache.load(key)
        assert loaded is not None
        assert np.allclose(loaded.exact_energies, h2_bundle.exact_energies)
        assert loaded.exact[0].label == h2_bundle.exact[0].label
        assert np.allclose(loaded.proxy[3].amplitudes, h2_bundle.proxy[3].amplitudes)
        assert np.allclose(loaded.weights, h2_bundle.weights)


class TestSampling:
    """Tests for joint projective sampling."""

    def test_basis_state_outcomes(self, rng):
        """Z-type products on |q0=1, q1=0> give deterministic signs."""
        products = [PauliProduct.from_label(label, 2) for label in ("Z0", "Z1", "Z0 Z1")]
        outcomes = sample_joint_outcomes(products, WaveVector.basis_state(2, 1), 50, rng)
        assert outcomes.shape == (50, 3)
        assert np.all(outcomes[:, 0] == -1)
        assert np.all(outcomes[:, 1] == 1)
        assert np.all(outcomes[:, 2] == -1)

    def test_plus_state(self, rng):
        """|+> is the +1 eigenstate of X."""
        state = WaveVector.normalized(np.array([1.0, 1.0]))
        outcomes = sample_joint_outcomes([PauliProduct.from_label("X0", 1)], state, 20, rng)
        assert np.all(outcomes == 1)

    def test_qubit_limit(self, rng):
        """Dense joint bases are capped in size."""
        with pytest.raises(StateError):
            joint_eigenbasis([], 13, rng)


class TestRotation:
    """Tests for orbital rotations."""

    def test_single_electron_rotation(self):
        """A 0-1 rotation by theta sends a_0^dagger to cos a_0^dagger + sin a_1^dagger."""
        theta = 0.3
        kappa = np.zeros((3, 3))
        kappa[1, 0], kappa[0, 1] = theta, -theta
        rotated = apply_one_body_rotation(WaveVector.basis_state(3, 0b001), kappa)
        assert rotated.amplitudes[0b001] == pytest.approx(np.cos(theta))
        assert rotated.amplitudes[0b010] == pytest.approx(np.sin(theta))

    def test_rejects_symmetric_generator(self):
        """Only antisymmetric generators give unitary rotations."""
        with pytest.raises(StateError):
            apply_one_body_rotation(WaveVector.basis_state(2, 1), np.ones((2, 2)))
