"""
Derandomized local-basis measurements.

Frames are fixed one qubit at a time by greedily minimising the conditional
expectation of a weighted confidence bound

    sum_k exp(-eta_k h_k / 2) (1 - nu_k Pr[frame hits k | partial frame])
          (1 - nu_k 3^-|supp k|)^(frames left),

eta_k = eta * w_k / max(w), nu_k = 1 - exp(-eta_k / 2), where h_k counts the
completed frames that hit product k. Every greedy choice can only lower the
bound. The emitted frames are then used as a deterministic plan: identical
frames are merged, a product's coefficient is split over the frames that hit
it in proportion to their counts, and each merged frame is measured with
allocation count / total.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from measbench.chemistry.observables import ObservableSet
from measbench.core.errors import ShadowError
from measbench.core.models import Compatibility
from measbench.grouping.plan import MeasurableGroup, MeasurementPlan
from measbench.pauli.product import PauliProduct
from measbench.shadows.frames import QWC_LETTERS, PauliArrays, QubitwiseFrame

logger = logging.getLogger(__name__)

DEFAULT_CONFIDENCE = 1.0
DEFAULT_BUDGET_FACTOR = 10


@dataclass
class DerandomizationResult:
    """Frame sequence and the bound after every greedy choice."""
    frames: List[QubitwiseFrame]
    objective_history: List[float] = field(default_factory=list)
    hits: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    topped_up: int = 0

    def to_json(self) -> List[Dict[str, str]]:
        return [{"bases": frame.bases} for frame in self.frames]

    def save(self, path: Path):
        Path(path).write_text(json.dumps(self.to_json(), indent=2), encoding="utf-8")


def _bound(
    scale: np.ndarray, nu: np.ndarray, hit_probability: np.ndarray, tail: np.ndarray, remaining: int
) -> float:
    return float(np.sum(scale * (1.0 - nu * hit_probability) * tail**remaining))


def derandomize(
    paulis: Sequence[PauliProduct],
    weights: np.ndarray,
    budget: int,
    confidence: float = DEFAULT_CONFIDENCE,
) -> DerandomizationResult:
    """
    Greedy derandomized frame sequence for a weighted Pauli table.

    Args:
        paulis: Non-identity products to measure
        weights: Importance weights w_k (|c_k| or sum_n |c_{n,k}|)
        budget: Number of frames to emit
        confidence: Bound sharpness eta

    Returns:
        DerandomizationResult with `budget` frames and a non-increasing
        objective history
    """
    if budget <= 0:
        raise ShadowError("Derandomization budget must be positive")
    if not paulis:
        raise ShadowError("Nothing to measure")
    n = paulis[0].n_qubits
    arrays = PauliArrays(paulis, n)
    letters = arrays.letters
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (len(paulis),) or np.any(weights < 0) or weights.max() <= 0:
        raise ShadowError("One non-negative weight per product is required")

    eta = confidence * weights / weights.max()
    nu = 1.0 - np.exp(-eta / 2.0)
    tail = 1.0 - nu * 3.0 ** (-arrays.weight.astype(float))
    on_support = letters != 0
    # support qubits at index >= j, per product
    pending_from = np.cumsum(on_support[:, ::-1], axis=1)[:, ::-1]
    pending_from = np.concatenate([pending_from, np.zeros((len(paulis), 1), dtype=int)], axis=1)

    hits = np.zeros(len(paulis), dtype=int)
    scale = np.ones(len(paulis))
    frames: List[QubitwiseFrame] = []
    history: List[float] = [_bound(scale, nu, 3.0 ** (-arrays.weight.astype(float)), tail, budget - 1)]

    for m in range(budget):
        remaining = budget - m - 1
        alive = np.ones(len(paulis), dtype=bool)
        chosen = []
        for j in range(n):
            after = 3.0 ** (-pending_from[:, j + 1].astype(float))
            best = None
            for code, letter in enumerate(QWC_LETTERS, start=1):
                consistent = alive & ((letters[:, j] == 0) | (letters[:, j] == code))
                value = _bound(scale, nu, consistent * after, tail, remaining)
                if best is None or value < best[0] - 1e-15 * abs(best[0]):
                    best = (value, code, letter, consistent)
            value, code, letter, alive = best  # type: ignore[misc]
            chosen.append(letter)
            history.append(value)
        frames.append(QubitwiseFrame("".join(chosen)))
        hits += alive
        scale = np.exp(-eta * hits / 2.0)

    never = np.nonzero(hits == 0)[0]
    topped_up = 0
    if len(never):
        logger.warning(f"Derandomization left {len(never)} products unmeasured; adding frames")
        for k in never:
            if hits[k]:
                continue
            bases = "".join(
                QWC_LETTERS[c - 1] if c else "X" for c in letters[k]
            )
            frame = QubitwiseFrame(bases)
            frames.append(frame)
            hits += frame.covered(arrays)
            topped_up += 1

    logger.info(
        f"Derandomized {len(frames)} frames for {len(paulis)} products; "
        f"bound {history[0]:.4g} -> {history[-1]:.4g}"
    )
    return DerandomizationResult(frames, history, hits, topped_up)


def frames_to_plan(
    observables: ObservableSet,
    frames: Sequence[QubitwiseFrame],
    method: str = "derand",
    provenance: Optional[dict] = None,
) -> MeasurementPlan:
    """Deterministic QWC plan measuring each distinct frame with allocation count / total."""
    arrays = PauliArrays(observables.paulis, observables.n_qubits)
    counts = Counter(frame.bases for frame in frames)
    ordered = sorted(counts, key=lambda b: (-counts[b], b))
    total = sum(counts.values())

    masks = {bases: QubitwiseFrame(bases).covered(arrays) for bases in ordered}
    hit_weight = np.zeros(len(arrays))
    for bases in ordered:
        hit_weight += counts[bases] * masks[bases]
    if np.any(hit_weight == 0):
        missing = observables.paulis[int(np.argmin(hit_weight))]
        raise ShadowError(f"{missing.label} is not measured by any frame")

    groups = []
    for bases in ordered:
        members = np.nonzero(masks[bases])[0]
        if len(members) == 0:
            continue
        fractions = counts[bases] / hit_weight[members]
        groups.append(
            MeasurableGroup([int(k) for k in members], fractions, counts[bases] / total)
        )
    if groups:
        share = sum(g.allocation for g in groups)
        for group in groups:
            group.allocation /= share

    return MeasurementPlan(
        observables,
        groups,
        Compatibility.QWC,
        method=method,
        provenance={**(provenance or {}), "frames": total, "distinct_frames": len(groups)},
    )


def derandomized_plan(
    observables: ObservableSet,
    budget: Optional[int] = None,
    confidence: float = DEFAULT_CONFIDENCE,
    weights: Optional[np.ndarray] = None,
) -> MeasurementPlan:
    """
    Derandomized scheme for an ObservableSet, as a deterministic plan.

    The default budget is 10 frames per Pauli product. Each frame costs
    O(n N_P) bound updates, so benchmark runs cap QSE budgets through
    `derand_qse_frame_cap`.
    """
    if budget is None:
        budget = DEFAULT_BUDGET_FACTOR * observables.n_paulis
    if weights is None:
        weights = observables.importance_weights()
    result = derandomize(observables.paulis, weights, budget, confidence)
    return frames_to_plan(
        observables,
        result.frames,
        provenance={
            "budget": budget,
            "confidence": confidence,
            "topped_up": result.topped_up,
            "bound": result.objective_history[-1],
        },
    )
