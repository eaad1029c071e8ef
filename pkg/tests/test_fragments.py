"""Tests for low-rank fragments and the fluid (F3) optimization."""

import numpy as np
import pytest
import scipy.linalg as la

from measbench.chemistry.hamiltonian import build_electronic_hamiltonian, effective_one_body
from measbench.core.errors import FragmentError
from measbench.core.models import Task
from measbench.fermion.encodings import jordan_wigner
from measbench.fragments import (
    FermionicFragment,
    FluidVarianceModel,
    FragmentPlan,
    build_fragment_plan,
    f3_collect,
    fragment_expectation,
    fragment_variance,
    lr_decompose,
    one_body_fragment,
    orbital_generator,
    reconstruct_two_body,
)
from measbench.grouping.allocation import allocation_cost
from tests import oracles


def dense(fragment_list):
    return sum(jordan_wigner(f.to_fermion()).to_matrix() for f in fragment_list)


@pytest.fixture(scope="module")
def h2_fragments(h2_integrals):
    return lr_decompose(h2_integrals.g)


class TestOrbitalGenerator:
    """Tests for the logarithm of orbital rotations."""

    def test_recovers_rotation(self, rng):
        """expm(kappa) reproduces a random proper rotation."""
        q, _ = np.linalg.qr(rng.normal(size=(5, 5)))
        if np.linalg.det(q) < 0:
            q[:, 0] *= -1
        kappa = orbital_generator(q)
        assert np.allclose(kappa, -kappa.T)
        assert np.allclose(la.expm(kappa), q, atol=1e-8)

    def test_rotation_by_pi(self):
        """Pairs of -1 eigenvalues become rotations by pi."""
        rotation = np.diag([-1.0, -1.0, 1.0])
        assert np.allclose(la.expm(orbital_generator(rotation)), rotation, atol=1e-8)

    def test_improper_rotation(self):
        """Reflections have no real logarithm."""
        with pytest.raises(FragmentError):
            orbital_generator(np.diag([-1.0, 1.0]))


class TestLowRank:
    """Tests for the low-rank factorization."""

    def test_reconstruction(self, random_system):
        """Fragments reproduce (pq|rs)."""
        fragments = lr_decompose(random_system.g)
        assert np.allclose(reconstruct_two_body(fragments), random_system.g, atol=1e-8)
        weights = [abs(f.metadata["eigenvalue"]) for f in fragments]
        assert weights == sorted(weights, reverse=True)

    def test_fragments_sum_to_hamiltonian(self, h2_integrals, h2_fragments):
        """One-body fragment plus low-rank fragments equal H_e."""
        one = one_body_fragment(effective_one_body(h2_integrals))
        expected = jordan_wigner(build_electronic_hamiltonian(h2_integrals)).to_matrix()
        assert np.allclose(dense([one] + h2_fragments), expected, atol=1e-8)

    def test_fragment_variance_matches_dense(self, h2_fragments, h2_bundle):
        """Variance in the fragment frame equals the dense operator variance."""
        state = h2_bundle.exact[2]
        for fragment in h2_fragments:
            matrix = jordan_wigner(fragment.to_fermion()).to_matrix()
            assert fragment_variance(fragment, state) == pytest.approx(
                oracles.variance(matrix, state.amplitudes), abs=1e-9
            )
            mean = np.vdot(state.amplitudes, matrix @ state.amplitudes).real
            assert fragment_expectation(fragment, state) == pytest.approx(mean, abs=1e-9)

    def test_json_round_trip(self, h2_fragments):
        """Fragments survive their JSON form."""
        fragment = h2_fragments[0]
        loaded = FermionicFragment.from_json(fragment.to_json())
        assert np.allclose(loaded.generator, fragment.generator)
        assert np.allclose(loaded.quadratic, fragment.quadratic)

    def test_shape_checks(self):
        """Polynomials must live on 2n spin orbitals."""
        with pytest.raises(FragmentError):
            FermionicFragment(np.zeros((2, 2)), linear=np.zeros(3))
        with pytest.raises(FragmentError):
            FermionicFragment(np.ones((2, 2)))


class TestFluidCollection:
    """Tests for moving diagonal weight into the one-body fragment."""

    def test_collection_preserves_operator(self, h2_integrals, h2_fragments):
        """Any fluid coefficients keep the total operator fixed."""
        coefficients = np.linspace(-0.7, 0.9, len(h2_fragments))
        one, modified = f3_collect(h2_fragments, effective_one_body(h2_integrals), coefficients)
        expected = jordan_wigner(build_electronic_hamiltonian(h2_integrals)).to_matrix()
        assert np.allclose(dense([one] + modified), expected, atol=1e-8)
        assert [f.fluid_coefficient for f in modified] == pytest.approx(list(coefficients))

    def test_model_matches_collected_fragments(self, h2_integrals, h2_fragments, h2_bundle):
        """The quadratic variance model agrees with the collected fragments."""
        one_body = effective_one_body(h2_integrals)
        state = h2_bundle.proxy[0]
        model = FluidVarianceModel(h2_fragments, one_body, [state])
        coefficients = np.full(len(h2_fragments), 0.4)
        one, modified = f3_collect(h2_fragments, one_body, coefficients)
        direct = [fragment_variance(f, state) for f in [one] + modified]
        assert np.allclose(model.variances(coefficients), direct, atol=1e-9)

    def test_wrong_coefficient_count(self, h2_integrals, h2_fragments):
        """One coefficient per fragment."""
        with pytest.raises(FragmentError):
            f3_collect(h2_fragments, effective_one_body(h2_integrals), [0.1] * (len(h2_fragments) + 1))


class TestFragmentPlans:
    """Tests for the LR and F3 plans."""

    def test_f3_not_worse_than_lr(self, h2_integrals, h2_bundle):
        """The optimized proxy cost never exceeds the c = 0 cost."""
        plan = build_fragment_plan(h2_integrals, h2_bundle.proxy, cost_mode=Task.GROUND)
        assert plan.provenance["f3_cost"] <= plan.provenance["lr_cost"] + 1e-12
        history = plan.provenance["f3_history"]
        assert all(b <= a + 1e-12 for a, b in zip(history, history[1:]))
        assert plan.n_groups == 1 + len(lr_decompose(h2_integrals.g))
        assert plan.allocations.sum() == pytest.approx(1.0)

    def test_mc_plan_uses_ensemble(self, h2_integrals, h2_bundle):
        """MC plans are built on every proxy state."""
        lr = build_fragment_plan(h2_integrals, h2_bundle.proxy, optimize=False, cost_mode="mc")
        f3 = build_fragment_plan(h2_integrals, h2_bundle.proxy, h2_bundle.weights, cost_mode="mc")
        assert lr.method == "lr" and f3.method == "f3"
        assert f3.provenance["f3_cost"] <= lr.provenance["lr_cost"] + 1e-12

    def test_estimator_variance(self, h2_integrals, h2_bundle):
        """sum_alpha Var_alpha / m_alpha on the evaluated state."""
        plan = build_fragment_plan(h2_integrals, h2_bundle.proxy, cost_mode="ground")
        state = h2_bundle.ground
        expected = allocation_cost(plan.fragment_variances(state), plan.allocations)
        assert plan.estimator_variances(state)[0].value == pytest.approx(expected)
        with pytest.raises(FragmentError):
            plan.estimator_variances(state, [1])

    def test_plan_json(self, h2_integrals, h2_bundle, tmp_path):
        """Saved plans reload with identical estimator variances."""
        plan = build_fragment_plan(h2_integrals, h2_bundle.proxy, cost_mode="ground")
        loaded = FragmentPlan.from_json(plan.to_json())
        state = h2_bundle.exact[0]
        assert loaded.estimator_variances(state)[0].value == pytest.approx(
            plan.estimator_variances(state)[0].value, rel=1e-8
        )

    def test_qse_rejected(self, h2_integrals, h2_bundle):
        """Fragments cover the Hamiltonian only."""
        with pytest.raises(FragmentError):
            build_fragment_plan(h2_integrals, h2_bundle.proxy, cost_mode=Task.QSE)
