"""
Measurement strategies - the common interface of plans and shadow schemes.

Every method ends in an object that can report, for a given state, the
single-shot-normalised estimator variance sum_alpha Var(A^(alpha)) / m_alpha of
each observable. The metrics layer only talks to this interface.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Optional, Sequence

if TYPE_CHECKING:
    from measbench.states.wavevector import WaveVector


@dataclass(frozen=True)
class VarianceEstimate:
    """Estimator variance of one observable on one state (times total shots)."""
    value: float
    stderr: float = 0.0
    warning: Optional[str] = None


class MeasurementStrategy(ABC):
    """Base class for deterministic plans, fragment plans and shadow schemes."""

    method: str = ""

    @property
    @abstractmethod
    def n_observables(self) -> int:
        """Number of observables the strategy estimates."""

    @property
    def n_groups(self) -> Optional[int]:
        """Number of measurement settings, None for randomized schemes."""
        return None

    @abstractmethod
    def estimator_variances(
        self,
        state: "WaveVector",
        indices: Optional[Sequence[int]] = None,
    ) -> List[VarianceEstimate]:
        """
        Estimator variance of each requested observable on `state`.

        Args:
            state: State the observables are measured on
            indices: Observable indices to evaluate (all when None)

        Returns:
            One VarianceEstimate per requested observable, in order
        """
