"""Tests for measurement frames, shadow variances and derandomization."""

import itertools
from collections import Counter

import numpy as np
import pytest

from measbench.chemistry.observables import ObservableSet, build_mc_observables
from measbench.core.errors import ShadowError
from measbench.core.models import FrameKind, Task
from measbench.fermion.encodings import jordan_wigner
from measbench.fermion.operators import FermionPolynomial
from measbench.pauli.polynomial import PauliPolynomial
from measbench.pauli.product import PauliProduct
from measbench.shadows import (
    MajoranaFrame,
    PauliArrays,
    QubitwiseFrame,
    ShadowScheme,
    coverage_probabilities,
    derandomize,
    derandomized_plan,
    enumerate_majorana_frames,
    enumerate_qwc_frames,
    frames_to_plan,
    is_symplectic,
    num_symplectics,
    one_shot_variance,
    sample_clifford_frame,
    simulate_shadow_estimate,
    symplectic_from_index,
)
from measbench.states.wavevector import WaveVector, expectation


@pytest.fixture
def two_qubit_observable():
    return PauliPolynomial.from_labels(2, {"Z0": 0.8, "X0 X1": -0.5, "Y0 Z1": 0.3, "Z0 Z1": 0.4, "X1": 0.2})


@pytest.fixture
def fermionic_observable():
    """JW image of a particle-conserving 3-mode operator (even Majorana degrees only)."""
    terms = {
        ((0, True), (1, False)): 0.4,
        ((1, True), (0, False)): 0.4,
        ((2, True), (2, False)): -1.3,
        ((0, True), (2, True), (2, False), (0, False)): 0.7,
        ((0, True), (1, True), (2, False), (1, False)): 0.2,
        ((1, True), (2, True), (1, False), (0, False)): 0.2,
    }
    return jordan_wigner(FermionPolynomial(3, terms))


def random_state(rng, n_qubits):
    dim = 1 << n_qubits
    return WaveVector.normalized(rng.normal(size=dim) + 1j * rng.normal(size=dim))


class TestSymplecticGroup:
    """Tests for canonical symplectic indexing."""

    def test_group_orders(self):
        """|Sp(2)| = 6 and |Sp(4)| = 720."""
        assert num_symplectics(1) == 6
        assert num_symplectics(2) == 720

    def test_two_qubit_enumeration(self):
        """All 720 indices give distinct symplectics; each X_0 image appears 48 times."""
        seen = set()
        images = Counter()
        for index in range(720):
            g = symplectic_from_index(index, 2)
            assert is_symplectic(g)
            seen.add(g.tobytes())
            images[tuple(g[0])] += 1
        assert len(seen) == 720
        assert len(images) == 15
        assert set(images.values()) == {48}

    def test_index_out_of_range(self):
        """Indices beyond the group order are rejected."""
        with pytest.raises(ValueError):
            symplectic_from_index(6, 1)

    def test_pauli_image_matches_coverage(self, rng):
        """A product is covered exactly when its conjugated image is diagonal."""
        frame = sample_clifford_frame(2, rng)
        products = [
            PauliProduct.from_label(" ".join(f"{l}{q}" for q, l in enumerate(letters) if l != "I") or "I", 2)
            for letters in itertools.product("IXYZ", repeat=2)
        ]
        covered = frame.covered(PauliArrays(products, 2))
        for product, hit in zip(products, covered):
            assert frame.pauli_image(product).is_diagonal == bool(hit)


class TestFrames:
    """Tests for frame coverage."""

    def test_qubitwise_coverage(self):
        """XZ covers X0, Z1 and X0 Z1 but not Y0."""
        frame = QubitwiseFrame("XZ")
        assert frame.covers(PauliProduct.from_label("X0 Z1", 2))
        assert frame.covers(PauliProduct.from_label("Z1", 2))
        assert not frame.covers(PauliProduct.from_label("Y0", 2))
        assert frame.probability == pytest.approx(1 / 9)

    def test_invalid_frames(self):
        """Unknown letters and non-permutation pairings are rejected."""
        with pytest.raises(ShadowError):
            QubitwiseFrame("XW")
        with pytest.raises(ShadowError):
            MajoranaFrame((0, 0, 1, 2))

    def test_majorana_probabilities(self):
        """Degree-2 monomials: 1/(2N-1); degree-4: 3/((2N-1)(2N-3))."""
        n = 4
        quadratic = jordan_wigner(FermionPolynomial.number(1, n)).without_identity().paulis()
        arrays = PauliArrays(quadratic, n)
        assert np.allclose(coverage_probabilities(FrameKind.MAJORANA, arrays), 1 / (2 * n - 1))
        quartic = jordan_wigner(
            FermionPolynomial(n, {((0, True), (2, True), (2, False), (0, False)): 1.0})
        )
        products = [p for p in quartic.paulis() if not p.is_identity and p.weight == 2]
        probabilities = coverage_probabilities(FrameKind.MAJORANA, PauliArrays(products, n))
        assert np.allclose(probabilities, 3 / ((2 * n - 1) * (2 * n - 3)))

    def test_majorana_enumeration_matches_probability(self, fermionic_observable):
        """Enumerated matchings reproduce the closed-form coverage probabilities."""
        paulis = fermionic_observable.without_identity().paulis()
        arrays = PauliArrays(paulis, 3)
        frames = list(enumerate_majorana_frames(3))
        assert len(frames) == 15
        counted = sum(frame.covered(arrays).astype(float) for frame in frames) / 15
        assert np.allclose(counted, coverage_probabilities(FrameKind.MAJORANA, arrays))

    def test_clifford_probability(self):
        """Non-identity products are covered with probability 1/(2^n + 1)."""
        arrays = PauliArrays([PauliProduct.from_label("X0 Y1", 2)], 2)
        assert coverage_probabilities(FrameKind.CLIFFORD, arrays)[0] == pytest.approx(0.2)


class TestOneShotVariance:
    """Tests for shadow-estimator variances."""

    def test_single_qubit_z(self):
        """Z on |0>: a second moment of 3 and a mean of 1 for both frame families."""
        op = PauliPolynomial.from_labels(1, {"Z0": 1.0})
        state = WaveVector.basis_state(1, 0)
        for budget in ("exact", "enumerate"):
            assert one_shot_variance("qwc", op, state, budget)[0].value == pytest.approx(2.0)
            assert one_shot_variance("clifford", op, state, budget)[0].value == pytest.approx(2.0)

    def test_stratified_eigenstate(self):
        """Fixed frame fractions leave no variance on an eigenstate of every covering frame."""
        op = PauliPolynomial.from_labels(1, {"Z0": 1.0})
        state = WaveVector.basis_state(1, 0)
        for kind in ("qwc", "clifford"):
            for budget in ("exact", "enumerate"):
                value = one_shot_variance(kind, op, state, budget, stratified=True)[0].value
                assert value == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("kind", ["qwc", "clifford"])
    def test_stratified_below_randomized(self, kind, two_qubit_observable, rng):
        """Dropping the frame-choice noise never raises the variance."""
        state = random_state(rng, 2)
        randomized = one_shot_variance(kind, two_qubit_observable, state)[0].value
        stratified = one_shot_variance(kind, two_qubit_observable, state, stratified=True)[0].value
        assert 0 < stratified <= randomized + 1e-12

    @pytest.mark.parametrize("kind", ["qwc", "clifford"])
    def test_stratified_exact_matches_enumeration(self, kind, two_qubit_observable, rng):
        """Pair-coverage covariance sums equal the weighted sum of per-frame variances."""
        state = random_state(rng, 2)
        exact = one_shot_variance(kind, two_qubit_observable, state, "exact", stratified=True)[0]
        enumerated = one_shot_variance(kind, two_qubit_observable, state, "enumerate", stratified=True)[0]
        assert exact.value == pytest.approx(enumerated.value, rel=1e-9)

    def test_stratified_majorana_matches_enumeration(self, fermionic_observable, rng):
        """The stratified Majorana closed form agrees with all 15 matchings."""
        state = random_state(rng, 3)
        exact = one_shot_variance("majorana", fermionic_observable, state, "exact", stratified=True)[0]
        enumerated = one_shot_variance("majorana", fermionic_observable, state, "enumerate", stratified=True)[0]
        assert exact.value == pytest.approx(enumerated.value, rel=1e-9)

    @pytest.mark.parametrize("kind", ["qwc", "clifford", "majorana"])
    def test_complex_products_add_both_parts(self, kind, h2_qse, h2_bundle):
        """A raw product's variance is Var(R) + Var(K) with R and K estimated separately."""
        state = h2_bundle.ground
        combined = one_shot_variance(kind, h2_qse, state, stratified=True)
        with_imaginary = [
            n
            for n, (r, k) in enumerate(zip(h2_qse.observables, h2_qse.imaginary_parts))
            if len(r.without_identity()) and len(k.without_identity())
        ]
        assert with_imaginary
        for n in with_imaginary[:4]:
            real = one_shot_variance(kind, h2_qse.observables[n], state, stratified=True)[0].value
            imaginary = one_shot_variance(kind, h2_qse.imaginary_parts[n], state, stratified=True)[0].value
            assert combined[n].value == pytest.approx(real + imaginary, rel=1e-9, abs=1e-12)

    def test_scheme_defaults_to_stratified(self, h2_qse, h2_bundle):
        """ShadowScheme reports the stratified form unless told otherwise."""
        state = h2_bundle.ground
        stratified = ShadowScheme(h2_qse, FrameKind.QWC).estimator_variances(state, [5])[0].value
        randomized = ShadowScheme(h2_qse, FrameKind.QWC, stratified=False).estimator_variances(state, [5])[0].value
        assert ShadowScheme(h2_qse, "qwc").provenance["stratified"] is True
        assert stratified == pytest.approx(one_shot_variance("qwc", h2_qse, state, indices=[5], stratified=True)[0].value)
        assert stratified <= randomized + 1e-12

    @pytest.mark.parametrize("kind", ["qwc", "clifford"])
    def test_exact_matches_enumeration(self, kind, two_qubit_observable, rng):
        """Closed forms equal the explicit average over every frame."""
        state = random_state(rng, 2)
        exact = one_shot_variance(kind, two_qubit_observable, state, "exact")[0]
        enumerated = one_shot_variance(kind, two_qubit_observable, state, "enumerate")[0]
        assert exact.value == pytest.approx(enumerated.value, rel=1e-9)
        assert enumerated.frames_used > 0
        assert exact.frames_used == 0

    def test_majorana_exact_matches_enumeration(self, fermionic_observable, rng):
        """Pair-coverage formula equals the average over all 15 matchings."""
        state = random_state(rng, 3)
        exact = one_shot_variance("majorana", fermionic_observable, state, "exact")[0]
        enumerated = one_shot_variance("majorana", fermionic_observable, state, "enumerate")[0]
        assert exact.value == pytest.approx(enumerated.value, rel=1e-9)

    def test_monte_carlo_budget(self, two_qubit_observable, rng):
        """Sampled frames agree with the closed form within their standard error."""
        state = random_state(rng, 2)
        exact = one_shot_variance("qwc", two_qubit_observable, state, "exact")[0].value
        sampled = one_shot_variance("qwc", two_qubit_observable, state, 3000, np.random.default_rng(5))[0]
        assert sampled.frames_used == 3000
        assert abs(sampled.value - exact) <= max(6 * sampled.stderr, 0.05 * exact)

    def test_bad_budgets(self, two_qubit_observable):
        """Zero, negative and unknown budgets raise ShadowError."""
        state = WaveVector.basis_state(2, 0)
        for budget in (0, -3, "lots"):
            with pytest.raises(ShadowError):
                one_shot_variance("qwc", two_qubit_observable, state, budget)

    def test_majorana_rejects_odd_monomials(self):
        """Odd Majorana degree is never covered by a pairing."""
        op = PauliPolynomial.from_labels(2, {"X0": 1.0})
        with pytest.raises(ShadowError):
            one_shot_variance("majorana", op, WaveVector.basis_state(2, 0), "exact")

    def test_clifford_not_worse_than_bound(self, h2_hamiltonian, h2_bundle):
        """Clifford one-shot variance stays below 3 tr(O^2) for traceless O."""
        observables = build_mc_observables(h2_hamiltonian)
        value = one_shot_variance("clifford", observables, h2_bundle.ground, "exact")[0].value
        traceless = h2_hamiltonian.without_identity()
        bound = 3 * 2**4 * sum(c**2 for _, c in traceless.items())
        assert 0 < value <= bound

    def test_scheme_interface(self, h2_hamiltonian, h2_bundle):
        """ShadowScheme reports one estimate per requested observable."""
        observables = ObservableSet.from_polynomial(h2_hamiltonian, Task.GROUND)
        scheme = ShadowScheme(observables, FrameKind.QWC)
        assert scheme.method == "qwc-cs"
        assert scheme.n_groups is None
        estimates = scheme.estimator_variances(h2_bundle.ground)
        assert len(estimates) == 1 and estimates[0].value > 0


class TestSimulation:
    """Tests for simulated shadow estimation."""

    def test_estimate_is_unbiased(self, two_qubit_observable, rng):
        """The simulated estimate lands near the exact expectation."""
        state = random_state(rng, 2)
        estimate, stderr = simulate_shadow_estimate("qwc", two_qubit_observable, state, 4000, np.random.default_rng(3))
        assert abs(estimate - expectation(state, two_qubit_observable)) <= 6 * stderr

    def test_shots_must_be_positive(self, two_qubit_observable, rng):
        """Zero shots raise ShadowError."""
        with pytest.raises(ShadowError):
            simulate_shadow_estimate("qwc", two_qubit_observable, WaveVector.basis_state(2, 0), 0, rng)


class TestDerandomization:
    """Tests for derandomized local measurements."""

    def test_history_nonincreasing(self, h2_hamiltonian):
        """Every greedy choice keeps or lowers the bound."""
        observables = build_mc_observables(h2_hamiltonian)
        result = derandomize(observables.paulis, observables.importance_weights(), 40)
        history = result.objective_history
        assert len(history) == 1 + 40 * 4
        assert all(b <= a + 1e-12 * max(abs(a), 1.0) for a, b in zip(history, history[1:]))
        assert np.all(result.hits > 0)
        assert result.topped_up == 0

    def test_plan_covers_every_product(self, h2_hamiltonian):
        """The merged frames form a valid QWC plan."""
        observables = build_mc_observables(h2_hamiltonian)
        plan = derandomized_plan(observables, budget=60)
        plan.validate()
        assert plan.method == "derand"
        assert plan.provenance["frames"] >= 60
        assert plan.n_groups == plan.provenance["distinct_frames"]

    def test_small_budget_is_topped_up(self, h2_hamiltonian):
        """Products missed by a short sequence get a dedicated frame."""
        observables = build_mc_observables(h2_hamiltonian)
        result = derandomize(observables.paulis, observables.importance_weights(), 1)
        assert np.all(result.hits > 0)
        assert result.topped_up >= 1
        assert len(result.frames) == 1 + result.topped_up

    def test_zero_budget(self, h2_hamiltonian):
        """A zero frame budget raises ShadowError."""
        observables = build_mc_observables(h2_hamiltonian)
        with pytest.raises(ShadowError):
            derandomize(observables.paulis, observables.importance_weights(), 0)

    def test_every_frame_once_matches_stratified_shadows(self, h2_hamiltonian, h2_bundle):
        """Measuring all 3^n local bases equally is the stratified QWC shadow, rescaled by occupied frames."""
        observables = build_mc_observables(h2_hamiltonian)
        frames = list(enumerate_qwc_frames(4))
        assert len(frames) == 81
        plan = frames_to_plan(observables, frames)
        plan.validate()
        state = h2_bundle.ground
        planned = plan.estimator_variances(state)[0].value
        shadow = one_shot_variance("qwc", observables, state, stratified=True)[0].value
        assert planned == pytest.approx(shadow * plan.n_groups / 81, rel=1e-9)
