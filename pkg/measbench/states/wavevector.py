"""
State vectors and expectation values.

States live in the full 2^n qubit space (basis index bit j = qubit j), so a
single vector serves every Pauli-level computation without re-embedding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from measbench.core.errors import HermiticityError, StateError
from measbench.pauli.polynomial import PauliPolynomial

NORM_TOL = 1e-8
IMAG_TOL = 1e-9


@dataclass(frozen=True)
class WaveVector:
    """Normalised state over n qubits."""

    amplitudes: np.ndarray
    label: str = ""
    energy: Optional[float] = None

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=complex)
        dim = amplitudes.shape[0]
        if amplitudes.ndim != 1 or dim == 0 or dim & (dim - 1):
            raise StateError(f"State length {dim} is not a power of two")
        norm = np.linalg.norm(amplitudes)
        if abs(norm - 1.0) > NORM_TOL:
            raise StateError(f"State norm {norm:.12f} differs from 1")
        amplitudes = amplitudes.copy()
        amplitudes.flags.writeable = False
        object.__setattr__(self, "amplitudes", amplitudes)

    @classmethod
    def normalized(cls, amplitudes: np.ndarray, **kwargs) -> "WaveVector":
        amplitudes = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(amplitudes)
        if norm == 0:
            raise StateError("Cannot normalise a zero vector")
        return cls(amplitudes / norm, **kwargs)

    @classmethod
    def basis_state(cls, n_qubits: int, index: int, label: str = "") -> "WaveVector":
        amplitudes = np.zeros(1 << n_qubits, dtype=complex)
        amplitudes[index] = 1.0
        return cls(amplitudes, label=label)

    @property
    def n_qubits(self) -> int:
        return self.amplitudes.shape[0].bit_length() - 1

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def overlap(self, other: "WaveVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass
class StateBundle:
    """
    Exact states (used for evaluation) and their cheap proxies (used for planning).

    `weights` define the trace-1 ensemble rho = sum_n w_n |phi_n><phi_n| over
    the proxies; they sum to one.
    """

    exact: List[WaveVector]
    proxy: List[WaveVector]
    weights: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.weights is None:
            self.weights = np.full(len(self.proxy), 1.0 / len(self.proxy))
        self.weights = np.asarray(self.weights, dtype=float)
        if len(self.weights) != len(self.proxy):
            raise StateError("One ensemble weight per proxy state is required")
        _check_weights(self.weights)

    @property
    def n_states(self) -> int:
        return len(self.exact)

    @property
    def ground(self) -> WaveVector:
        return self.exact[0]

    @property
    def ground_proxy(self) -> WaveVector:
        return self.proxy[0]

    @property
    def exact_energies(self) -> np.ndarray:
        return np.array([s.energy for s in self.exact], dtype=float)


def _check_weights(weights: np.ndarray):
    if np.any(weights < 0):
        raise StateError("Ensemble weights must be non-negative")
    if abs(weights.sum() - 1.0) > 1e-10:
        raise StateError(f"Ensemble weights sum to {weights.sum()}, not 1")


def expectation(state: WaveVector, op: PauliPolynomial) -> float:
    """<psi|A|psi> for Hermitian A."""
    value = np.vdot(state.amplitudes, op.apply(state.amplitudes))
    if abs(value.imag) > IMAG_TOL:
        raise HermiticityError(f"Expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


def variance(state: WaveVector, op: PauliPolynomial) -> float:
    """<A^2> - <A>^2, evaluated as ||A psi||^2 - <psi|A psi>^2."""
    image = op.apply(state.amplitudes)
    mean = np.vdot(state.amplitudes, image)
    if abs(mean.imag) > IMAG_TOL:
        raise HermiticityError(f"Expectation has imaginary part {mean.imag:.3e}")
    return max(float(np.vdot(image, image).real - mean.real**2), 0.0)


def ensemble_variance(
    weights: Sequence[float], states: Sequence[WaveVector], op: PauliPolynomial
) -> float:
    """Var_rho(A) = sum_n w_n <A^2>_n - (sum_n w_n <A>_n)^2 for a trace-1 mixture."""
    weights = np.asarray(weights, dtype=float)
    if len(weights) != len(states):
        raise StateError("One weight per state is required")
    _check_weights(weights)
    second = first = 0.0
    for w, state in zip(weights, states):
        image = op.apply(state.amplitudes)
        second += w * np.vdot(image, image).real
        first += w * np.vdot(state.amplitudes, image).real
    return max(float(second - first**2), 0.0)
