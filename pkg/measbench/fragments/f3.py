"""
Fluid fermionic fragments (F3).

Because n_i^2 = n_i, the diagonal lambda_ii n_i n_i of a two-electron
fragment is a one-body term in that fragment's frame. A fraction c_alpha of
it can be moved out of fragment alpha and added to the one-electron part;
all collected one-body pieces are measured together after diagonalising

    T = h'_so + sum_alpha c_alpha U_alpha diag(lambda^alpha_ii) U_alpha^T.

The operator sum is unchanged for every c. Fragment variances are quadratic
in c, so the proxy cost (sum_beta sqrt(Var_beta))^2 is minimised with
analytic gradients.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from measbench.chemistry.hamiltonian import effective_one_body
from measbench.chemistry.integrals import MolecularIntegrals
from measbench.core.errors import FragmentError
from measbench.core.models import Task
from measbench.core.strategy import MeasurementStrategy, VarianceEstimate
from measbench.fragments.low_rank import (
    LR_THRESHOLD,
    FermionicFragment,
    lr_decompose,
    one_body_fragment,
)
from measbench.grouping.allocation import allocation_cost, optimal_allocation, optimal_cost
from measbench.states.wavevector import WaveVector

logger = logging.getLogger(__name__)

F3_TOLERANCE = 1e-6
VARIANCE_FLOOR = 1e-14
SPIN_TOL = 1e-10


# ============================================================
# Collection
# ============================================================

def f3_collect(
    fragments: Sequence[FermionicFragment],
    one_body: np.ndarray,
    coefficients: Sequence[float],
) -> Tuple[FermionicFragment, List[FermionicFragment]]:
    """
    Move c_alpha * diag(lambda^alpha) from every fragment into the one-body term.

    Args:
        fragments: Two-electron fragments (quadratic polynomials)
        one_body: Spatial one-electron matrix h'
        coefficients: One c_alpha per fragment

    Returns:
        (collected one-body fragment, modified two-electron fragments)
    """
    coefficients = np.asarray(coefficients, dtype=float)
    if len(coefficients) != len(fragments):
        raise FragmentError(f"{len(coefficients)} coefficients for {len(fragments)} fragments")

    collected = np.kron(np.asarray(one_body, dtype=float), np.eye(2))
    modified = []
    for fragment, c in zip(fragments, coefficients):
        diagonal = fragment.diagonal_weights
        quadratic = fragment.quadratic
        if quadratic is not None and c != 0.0:
            quadratic = quadratic - c * np.diag(diagonal)
            rotation = np.kron(fragment.rotation, np.eye(2))
            collected += c * (rotation * diagonal[None, :]) @ rotation.T
        modified.append(
            FermionicFragment(
                fragment.generator,
                linear=fragment.linear,
                quadratic=quadratic,
                fluid_coefficient=float(c),
                label=fragment.label,
                metadata=dict(fragment.metadata),
            )
        )

    alpha, beta = collected[0::2, 0::2], collected[1::2, 1::2]
    if not np.allclose(alpha, beta, atol=SPIN_TOL) or np.any(np.abs(collected[0::2, 1::2]) > SPIN_TOL):
        raise FragmentError("Collected one-body operator is not spin-adapted")
    return one_body_fragment(0.5 * (alpha + beta)), modified


# ============================================================
# Variance model
# ============================================================

class FluidVarianceModel:
    """
    Fragment variances as functions of the fluid coefficients.

    With A_alpha the two-electron fragments, B_alpha their diagonal one-body
    parts and O the one-electron operator,

        Var_alpha(c) = Var(A_alpha - c_alpha B_alpha)
        Var_0(c)     = Var(O + sum_alpha c_alpha B_alpha)

    on a trace-1 ensemble of states. All covariances are computed once.
    """

    def __init__(
        self,
        fragments: Sequence[FermionicFragment],
        one_body: np.ndarray,
        states: Sequence[WaveVector],
        weights: Optional[Sequence[float]] = None,
    ):
        if not states:
            raise FragmentError("Variance model needs at least one state")
        self.fragments = list(fragments)
        self.one_body = np.asarray(one_body, dtype=float)
        weights = np.full(len(states), 1.0 / len(states)) if weights is None else np.asarray(weights, float)
        one = one_body_fragment(self.one_body)
        k = len(self.fragments)

        second = np.zeros((2 * k + 1, 2 * k + 1))
        mean = np.zeros(2 * k + 1)
        for state, w in zip(states, weights):
            psi = state.amplitudes
            images = [one.apply(psi)]
            for fragment in self.fragments:
                rotated = fragment.rotate(psi, inverse=True)
                images.append(fragment.rotate(fragment.occupation_values() * rotated))
            for fragment in self.fragments:
                rotated = fragment.rotate(psi, inverse=True)
                diagonal = fragment.occupation_values(
                    linear=fragment.diagonal_weights, quadratic=np.zeros((fragment.n_modes,) * 2)
                )
                images.append(fragment.rotate(diagonal * rotated))
            stack = np.stack(images, axis=1)
            second += w * (stack.conj().T @ stack).real
            mean += w * (psi.conj() @ stack).real
        self.covariance = second - np.outer(mean, mean)
        self.mean = mean

        cov = self.covariance
        self._oo = cov[0, 0]
        self._aa = np.diag(cov)[1 : k + 1]
        self._ab = np.array([cov[1 + a, 1 + k + a] for a in range(k)])
        self._bb_diag = np.diag(cov)[k + 1 :]
        self._ob = cov[0, k + 1 :]
        self._bb = cov[k + 1 :, k + 1 :]

    @property
    def n_fragments(self) -> int:
        return len(self.fragments)

    def variances(self, c: np.ndarray) -> np.ndarray:
        """[Var_0, Var_1, ..., Var_K] at coefficients c."""
        c = np.asarray(c, dtype=float)
        two_body = self._aa - 2.0 * c * self._ab + c**2 * self._bb_diag
        one = self._oo + 2.0 * self._ob @ c + c @ self._bb @ c
        return np.maximum(np.concatenate([[one], two_body]), 0.0)

    def cost(self, c: np.ndarray) -> float:
        return optimal_cost(self.variances(c))

    def gradient(self, c: np.ndarray) -> np.ndarray:
        c = np.asarray(c, dtype=float)
        v = np.maximum(self.variances(c), VARIANCE_FLOOR)
        roots = np.sqrt(v)
        d_one = 2.0 * self._ob + 2.0 * self._bb @ c
        d_two = -2.0 * self._ab + 2.0 * c * self._bb_diag
        return roots.sum() * (d_one / roots[0] + d_two / roots[1:])


@dataclass
class F3Result:
    coefficients: np.ndarray
    cost: float
    initial_cost: float
    history: List[float] = field(default_factory=list)
    converged: bool = True
    method: str = "L-BFGS-B"


def f3_optimize(
    fragments: Sequence[FermionicFragment],
    one_body: np.ndarray,
    states: Sequence[WaveVector],
    weights: Optional[Sequence[float]] = None,
    tolerance: float = F3_TOLERANCE,
    max_iterations: int = 500,
) -> F3Result:
    """
    Fluid coefficients minimising (sum_beta sqrt(Var_beta))^2 on the proxy ensemble.

    Starts from c = 0 and runs L-BFGS-B with analytic gradients; if that
    fails, Nelder-Mead continues from the best point. The result is never
    worse than c = 0.
    """
    model = FluidVarianceModel(fragments, one_body, states, weights)
    start = np.zeros(model.n_fragments)
    initial = model.cost(start)
    if model.n_fragments == 0:
        return F3Result(start, initial, initial, [initial])

    history = [initial]
    visited = {"x": start, "cost": initial}

    def record(xk, *_):
        value = model.cost(np.asarray(xk))
        history.append(value)
        if value < visited["cost"]:
            visited["x"], visited["cost"] = np.array(xk, dtype=float), value

    result = minimize(
        model.cost,
        start,
        jac=model.gradient,
        method="L-BFGS-B",
        callback=record,
        options={"ftol": tolerance, "gtol": 1e-10, "maxiter": max_iterations},
    )
    best, method, converged = result.x, "L-BFGS-B", bool(result.success)
    if not converged:
        logger.warning(f"F3: L-BFGS-B stopped ({result.message}); continuing with Nelder-Mead")
        fallback = minimize(
            model.cost,
            best,
            method="Nelder-Mead",
            callback=record,
            options={"fatol": tolerance * max(model.cost(best), 1e-12), "maxiter": 200 * len(start)},
        )
        if model.cost(fallback.x) <= model.cost(best):
            best, method = fallback.x, "Nelder-Mead"
        converged = bool(fallback.success)

    cost = model.cost(best)
    if cost > visited["cost"]:
        best, cost = visited["x"], visited["cost"]
    history = [float(v) for v in np.minimum.accumulate(history)] + [float(cost)]
    logger.info(f"F3: cost {initial:.6g} -> {cost:.6g} ({method}, {len(history) - 1} steps)")
    return F3Result(np.asarray(best), cost, initial, history, converged, method)


# ============================================================
# Variances on states
# ============================================================

def fragment_expectation(fragment: FermionicFragment, state: WaveVector) -> float:
    rotated = fragment.rotate(state.amplitudes, inverse=True)
    return float(np.sum(np.abs(rotated) ** 2 * fragment.occupation_values()))


def fragment_variance(fragment: FermionicFragment, state: WaveVector) -> float:
    """
    Variance of U p(n) U^dagger on a Jordan-Wigner state.

    The state is rotated into the fragment frame, where p(n) is diagonal.
    """
    if state.n_qubits != fragment.n_modes:
        raise FragmentError(f"{state.n_qubits}-qubit state for a {fragment.n_modes}-mode fragment")
    rotated = fragment.rotate(state.amplitudes, inverse=True)
    probabilities = np.abs(rotated) ** 2
    probabilities /= probabilities.sum()
    values = fragment.occupation_values()
    mean = probabilities @ values
    return float(max(probabilities @ (values - mean) ** 2, 0.0))


# ============================================================
# Plans
# ============================================================

class FragmentPlan(MeasurementStrategy):
    """
    One measurement frame per fragment, the one-body fragment first.

    Allocations follow the proxy variances; the estimator variance of the
    single observable is sum_alpha Var_alpha / m_alpha.
    """

    def __init__(
        self,
        fragments: List[FermionicFragment],
        allocations: Sequence[float],
        method: str = "f3",
        provenance: Optional[Dict[str, Any]] = None,
    ):
        if len(allocations) != len(fragments):
            raise FragmentError("One allocation per fragment is required")
        self.fragments = fragments
        self.allocations = np.asarray(allocations, dtype=float)
        self.method = method
        self.provenance = provenance or {}

    @property
    def n_observables(self) -> int:
        return 1

    @property
    def n_groups(self) -> Optional[int]:
        return len(self.fragments)

    def fragment_variances(self, state: WaveVector) -> np.ndarray:
        return np.array([fragment_variance(f, state) for f in self.fragments])

    def estimator_variances(
        self, state: WaveVector, indices: Optional[Sequence[int]] = None
    ) -> List[VarianceEstimate]:
        if indices is not None and list(indices) != [0]:
            raise FragmentError("Fragment plans estimate a single observable")
        value = allocation_cost(self.fragment_variances(state), self.allocations)
        return [VarianceEstimate(value=float(value))]

    def to_json(self) -> Dict[str, Any]:
        return {
            "method": self.method,
            "fragments": [f.to_json() for f in self.fragments],
            "allocations": self.allocations.tolist(),
            "provenance": self.provenance,
        }

    def save(self, path: Path):
        Path(path).write_text(json.dumps(self.to_json(), indent=2, default=float), encoding="utf-8")

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "FragmentPlan":
        return cls(
            [FermionicFragment.from_json(f) for f in data["fragments"]],
            data["allocations"],
            data.get("method", "f3"),
            data.get("provenance", {}),
        )


def build_fragment_plan(
    integrals: MolecularIntegrals,
    states: Sequence[WaveVector],
    weights: Optional[Sequence[float]] = None,
    optimize: bool = True,
    cost_mode: Task | str = Task.MC,
    threshold: float = LR_THRESHOLD,
) -> FragmentPlan:
    """
    Low-rank fragments of the electronic Hamiltonian, optionally with F3.

    Args:
        integrals: Spatial-orbital integrals
        states: Proxy states (Jordan-Wigner); one state for ground, the ensemble for mc
        weights: Ensemble weights (uniform when None)
        optimize: Run the F3 optimization; otherwise plain low-rank fragments
        cost_mode: ground or mc
        threshold: Low-rank truncation
    """
    cost_mode = Task(cost_mode)
    if cost_mode == Task.QSE:
        raise FragmentError("Fermionic fragments are defined for the Hamiltonian alone, not QSE")
    one_body = effective_one_body(integrals)
    fragments = lr_decompose(integrals.g, threshold)
    model_states = list(states[:1]) if cost_mode == Task.GROUND else list(states)
    model_weights = None if cost_mode == Task.GROUND else weights

    provenance: Dict[str, Any] = {"cost_mode": cost_mode.value, "lr_threshold": threshold}
    if optimize and fragments:
        result = f3_optimize(fragments, one_body, model_states, model_weights)
        coefficients = result.coefficients
        provenance.update(
            {
                "f3_cost": result.cost,
                "lr_cost": result.initial_cost,
                "f3_method": result.method,
                "f3_converged": result.converged,
                "f3_history": result.history,
                "f3_tolerance": F3_TOLERANCE,
                "f3_start": "zeros",
            }
        )
        model = FluidVarianceModel(fragments, one_body, model_states, model_weights)
        proxy = model.variances(coefficients)
    else:
        coefficients = np.zeros(len(fragments))
        model = FluidVarianceModel(fragments, one_body, model_states, model_weights)
        proxy = model.variances(coefficients)
        provenance["lr_cost"] = optimal_cost(proxy)

    one, modified = f3_collect(fragments, one_body, coefficients)
    plan_fragments = [one] + modified
    return FragmentPlan(
        plan_fragments,
        optimal_allocation(proxy),
        method="f3" if optimize else "lr",
        provenance=provenance,
    )
