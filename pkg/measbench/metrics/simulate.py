"""Shot-level simulation of a deterministic measurement plan."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from measbench.grouping.plan import MeasurementPlan
from measbench.states.sampling import joint_eigenbasis
from measbench.states.wavevector import WaveVector, expectation


class PlanSimulator:
    """
    Repeated estimation of every observable of a plan on one state.

    Group alpha gets round(m_alpha * total) shots; each shot projects onto the
    common eigenbasis of the group's members, and the estimate of A_n adds
    the group means of A_n^(alpha) plus the identity constant. Sets with
    imaginary parts give complex estimates R_n + i K_n from the same shots.
    """

    def __init__(self, plan: MeasurementPlan, state: WaveVector, rng: np.random.Generator):
        self.plan = plan
        self.state = state
        self._groups = []
        observables = plan.observables
        self._complex = observables.has_imaginary_parts
        paulis = observables.paulis
        for group in plan.groups:
            basis, values = joint_eigenbasis([paulis[k] for k in group.members], state.n_qubits, rng)
            probabilities = np.abs(basis.conj().T @ state.amplitudes) ** 2
            probabilities /= probabilities.sum()
            fragment_values = values @ plan.coefficient_block(group)
            if self._complex:
                fragment_values = fragment_values + 1j * (values @ plan.imaginary_block(group))
            self._groups.append((probabilities, fragment_values, group.allocation))

    @property
    def exact_values(self) -> np.ndarray:
        """<A_n> on the simulated state, the target of every estimate."""
        observables = self.plan.observables
        values = np.array([expectation(self.state, o) for o in observables.observables])
        if self._complex:
            values = values + 1j * np.array(
                [expectation(self.state, o) for o in observables.imaginary_parts]
            )
        return values

    def estimate(self, total_shots: int, rng: np.random.Generator) -> np.ndarray:
        observables = self.plan.observables
        estimates = np.array(observables.constants, dtype=complex if self._complex else float)
        if self._complex:
            estimates += 1j * observables.imaginary_constants
        for probabilities, fragment_values, allocation in self._groups:
            shots = max(1, int(round(allocation * total_shots)))
            counts = rng.multinomial(shots, probabilities)
            estimates += counts @ fragment_values / shots
        return estimates


def simulate_plan_estimates(
    plan: MeasurementPlan,
    state: WaveVector,
    total_shots: int,
    rng: np.random.Generator,
    repetitions: int = 1,
    simulator: Optional[PlanSimulator] = None,
) -> np.ndarray:
    """(repetitions, n_op) simulated estimates of every observable, complex for QSE products."""
    if total_shots <= 0 or not math.isfinite(total_shots):
        raise ValueError("Total shot count must be a positive finite number")
    simulator = simulator or PlanSimulator(plan, state, rng)
    return np.stack([simulator.estimate(int(total_shots), rng) for _ in range(repetitions)])
