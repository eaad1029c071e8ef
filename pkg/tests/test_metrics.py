"""Tests for figures of merit, n_crit, QSE matrices and plan simulation."""

import numpy as np
import pytest

from measbench.chemistry.observables import build_mc_observables
from measbench.core.errors import MetricError
from measbench.grouping import CovarianceTable, sorted_insertion
from measbench.metrics import (
    PlanSimulator,
    ground_metric,
    mc_metric,
    n_crit,
    noisy_qse_matrices,
    qse_matrices,
    qse_metric,
    simulate_plan_estimates,
    solve_qse,
    to_millions,
)


@pytest.fixture(scope="module")
def h2_mc_plan(h2_hamiltonian, h2_bundle):
    observables = build_mc_observables(h2_hamiltonian)
    table = CovarianceTable(observables.paulis, h2_bundle.proxy, h2_bundle.weights)
    return sorted_insertion(observables, "fc", table=table)


class TestCrossover:
    """Tests for n_crit."""

    def test_examples(self):
        """floor(qse / (mc - ground)) + 1."""
        assert n_crit(1.2, 0.2, 10.0) == 11
        assert n_crit(3.0, 1.0, 0.0) == 1
        assert n_crit(2.0, 1.0, 2.5) == 3

    def test_never_crosses(self):
        """MC no dearer than ground per iteration has no crossover."""
        with pytest.raises(MetricError):
            n_crit(1.0, 1.0, 5.0)
        with pytest.raises(MetricError):
            n_crit(0.5, 1.0, 5.0)

    def test_millions(self):
        """epsilon^2 M = 1 at epsilon = 1e-3 is one million shots."""
        assert to_millions(1.0, 1e-3) == pytest.approx(1.0)
        with pytest.raises(MetricError):
            to_millions(1.0, 0.0)


class TestMetrics:
    """Tests for the ground, QSE and MC metrics."""

    def test_mc_is_sum_over_states(self, h2_mc_plan, h2_bundle):
        """The MC metric adds the per-state ground metrics."""
        states = h2_bundle.exact
        total = mc_metric(h2_mc_plan, states, n_states=6)
        parts = [ground_metric(h2_mc_plan, s).value for s in states]
        assert total.value == pytest.approx(sum(parts))
        with pytest.raises(MetricError):
            mc_metric(h2_mc_plan, states[:3], n_states=6)

    def test_qse_is_worst_observable(self, h2_qse, h2_bundle):
        """The QSE metric is the largest estimator variance."""
        table = CovarianceTable.for_state(h2_qse.paulis, h2_bundle.ground_proxy)
        plan = sorted_insertion(h2_qse, "qwc", table=table)
        state = h2_bundle.ground
        every = [e.value for e in plan.estimator_variances(state)]
        metric = qse_metric(plan, state)
        assert metric.value == pytest.approx(max(every))
        assert not metric.lower_bound

    def test_partial_qse_is_lower_bound(self, h2_qse, h2_bundle):
        """A seeded subset gives a flagged lower bound."""
        table = CovarianceTable.for_state(h2_qse.paulis, h2_bundle.ground_proxy)
        plan = sorted_insertion(h2_qse, "qwc", table=table)
        state = h2_bundle.ground
        full = qse_metric(plan, state).value
        partial = qse_metric(plan, state, partial_fraction=0.3, seed=4)
        assert partial.lower_bound
        assert partial.value <= full + 1e-12
        again = qse_metric(plan, state, partial_fraction=0.3, seed=4)
        assert again.value == partial.value
        with pytest.raises(MetricError):
            qse_metric(plan, state, partial_fraction=0.0)

    def test_double_entry_against_simulation(self, h2_mc_plan, h2_bundle):
        """Shot-level simulation reproduces the analytic estimator variance."""
        state = h2_bundle.ground
        shots = 2000
        analytic = ground_metric(h2_mc_plan, state).value
        estimates = simulate_plan_estimates(
            h2_mc_plan, state, shots, np.random.default_rng(17), repetitions=600
        )[:, 0]
        assert np.var(estimates, ddof=1) * shots == pytest.approx(analytic, rel=0.25)
        mean_energy = h2_bundle.exact_energies[0]
        assert abs(estimates.mean() - mean_energy) < 5 * np.sqrt(analytic / shots / 600) + 1e-9


class TestQseEigenproblem:
    """Tests for QSE matrices and the thresholded solver."""

    def test_identity_overlap(self):
        """S = I reduces to an ordinary eigenproblem."""
        h = np.array([[1.0, 0.5], [0.5, -1.0]])
        assert np.allclose(solve_qse(h, np.eye(2)), np.linalg.eigvalsh(h))

    def test_threshold_drops_null_directions(self):
        """Overlap directions below the threshold are discarded."""
        s = np.diag([1.0, 1e-12])
        h = np.diag([0.3, 50.0])
        assert np.allclose(solve_qse(h, s), [0.3])

    def test_indefinite_overlap(self):
        """A clearly negative overlap eigenvalue raises."""
        with pytest.raises(MetricError):
            solve_qse(np.eye(2), np.diag([1.0, -0.1]))
        with pytest.raises(MetricError):
            solve_qse(np.eye(2), np.eye(3))

    def test_h2_exact_qse(self, h2_qse, h2_bundle):
        """On the exact ground state the lowest QSE root is the ground energy."""
        h, s = qse_matrices(h2_qse, h2_bundle.ground)
        assert h.shape == (5, 5)
        assert s[0, 0] == pytest.approx(1.0)
        energies = solve_qse(h, s)
        assert energies[0] == pytest.approx(h2_bundle.exact_energies[0], abs=1e-7)
        assert np.all(energies >= h2_bundle.exact_energies[0] - 1e-7)

    def test_noise_is_symmetric(self, rng):
        """Perturbed matrices stay symmetric."""
        h, s = noisy_qse_matrices(np.eye(3), np.eye(3), 1e-3, rng)
        assert np.allclose(h, h.T) and np.allclose(s, s.T)
        assert not np.allclose(h, np.eye(3))

    def test_error_scales_linearly_with_noise(self, h2_qse, h2_bundle):
        """RMS ground-energy error falls tenfold per decade of element noise."""
        h, s = qse_matrices(h2_qse, h2_bundle.ground)
        exact = solve_qse(h, s)[0]
        rng = np.random.default_rng(2024)
        epsilons = np.array([1e-2, 1e-3, 1e-4])
        rms = []
        for epsilon in epsilons:
            errors = [solve_qse(*noisy_qse_matrices(h, s, epsilon, rng))[0] - exact for _ in range(200)]
            rms.append(np.sqrt(np.mean(np.square(errors))))
        slope = np.polyfit(np.log10(epsilons), np.log10(rms), 1)[0]
        assert slope == pytest.approx(1.0, abs=0.2)
        assert rms[0] > rms[1] > rms[2]


class TestShotBudgetClosure:
    """Simulating at the reported shot count meets the accuracy target."""

    def test_qse_fc_sorted_insertion(self, h2_qse, h2_bundle):
        """At M = value / epsilon^2 the worst observable's RMS error is about epsilon."""
        epsilon = 1e-2
        state = h2_bundle.ground
        table = CovarianceTable.for_state(h2_qse.paulis, h2_bundle.ground_proxy)
        plan = sorted_insertion(h2_qse, "fc", table=table)
        variances = np.array([e.value for e in plan.estimator_variances(state)])
        total = int(np.ceil(qse_metric(plan, state).value / epsilon**2))

        rng = np.random.default_rng(31)
        simulator = PlanSimulator(plan, state, rng)
        estimates = simulate_plan_estimates(plan, state, total, rng, repetitions=100, simulator=simulator)
        assert np.iscomplexobj(estimates)
        rms = np.sqrt(np.mean(np.abs(estimates - simulator.exact_values[None, :]) ** 2, axis=0))

        worst = int(np.argmax(variances))
        assert 0.7 * epsilon <= rms[worst] <= 1.3 * epsilon
        assert np.all(rms <= 1.3 * epsilon)
