"""
One-shot variances of classical-shadow estimators.

For a frame f the shadow estimate of O = sum_k c_k P_k is

    o_f = sum_{k covered by f} (c_k / p_k) * outcome(P_k),

with p_k the probability that a random frame covers P_k. All products
covered by one frame commute, so the outcome statistics within a frame give
E[o_f^2] = <psi| H_f^2 |psi>, H_f = sum_{covered} (c_k / p_k) P_k.

Two conventions are reported:

    randomized   frames drawn afresh every shot; the variance is
                 E_f <psi|H_f^2|psi> - <O>^2
    stratified   frame f receives the fixed shot fraction Pr(f), the way a
                 deterministic plan allocates m_alpha; the variance is
                 sum_f Pr(f) Var_psi(H_f), the form shared with grouped plans
                 and the derandomized scheme

Budgets:
    "exact"      closed-form pair-coverage sums for every frame family
    "enumerate"  explicit sum over the frame space (at most 10^6 frames)
    int          Monte Carlo over that many sampled frames, with standard error
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from measbench.chemistry.observables import ObservableSet
from measbench.core.errors import ShadowError
from measbench.core.models import FrameKind, Task
from measbench.core.strategy import MeasurementStrategy, VarianceEstimate
from measbench.fermion.majorana import double_factorial
from measbench.grouping.covariance import CovarianceTable
from measbench.pauli.polynomial import PauliPolynomial
from measbench.shadows.frames import (
    MeasurementFrame,
    PauliArrays,
    coverage_probabilities,
    enumerate_frames,
    frame_space_size,
    popcount,
    sample_frame,
)
from measbench.states.sampling import sample_joint_outcomes
from measbench.states.wavevector import WaveVector

logger = logging.getLogger(__name__)

ENUMERATION_LIMIT = 10**6
STDERR_TARGET = 0.02
ROW_CHUNK = 256

Budget = Union[int, str]

SCHEME_NAMES = {
    FrameKind.QWC: "qwc-cs",
    FrameKind.CLIFFORD: "fc-cs",
    FrameKind.MAJORANA: "majorana-cs",
}


@dataclass(frozen=True)
class ShadowEstimate(VarianceEstimate):
    """One-shot variance of a shadow estimator; frames_used is 0 for closed forms."""
    frames_used: int = 0


def _as_observable_set(observables: ObservableSet | PauliPolynomial) -> ObservableSet:
    if isinstance(observables, PauliPolynomial):
        return ObservableSet.from_polynomial(observables, Task.MC)
    return observables


# ============================================================
# Pair coverage
# ============================================================

def _pair_weights(kind: FrameKind, arrays: PauliArrays, rows: np.ndarray) -> np.ndarray:
    """Pr[frame covers both k and l] for k in `rows` and every l, (len(rows), N_P)."""
    n = arrays.n_qubits
    if kind == FrameKind.QWC:
        letters = arrays.letters
        a = letters[rows][:, None, :]
        b = letters[None, :, :]
        agree = np.all((a == 0) | (b == 0) | (a == b), axis=2)
        union = popcount(arrays.support[rows][:, None] | arrays.support[None, :])
        return np.where(agree, 3.0 ** (-union.astype(float)), 0.0)

    if kind == FrameKind.CLIFFORD:
        # a random stabilizer group holds P with probability 1/(d+1) and a
        # second commuting P' with conditional probability 1/(d/2+1)
        d = float(1 << n)
        twisted = popcount(arrays.x[rows][:, None] & arrays.z[None, :]) + popcount(
            arrays.z[rows][:, None] & arrays.x[None, :]
        )
        same = rows[:, None] == np.arange(len(arrays))[None, :]
        pair = np.where(twisted % 2 == 0, 2.0 / ((d + 1) * (d + 2)), 0.0)
        return np.where(same, 1.0 / (d + 1), pair)

    if kind == FrameKind.MAJORANA:
        s = arrays.majorana[rows][:, None]
        t = arrays.majorana[None, :]
        both = popcount(s & t)
        only_s = popcount(s & ~t)
        only_t = popcount(t & ~s)
        free = 2 * n - both - only_s - only_t
        table = np.array([double_factorial(k - 1) for k in range(2 * n + 1)], dtype=float)
        even = (both % 2 == 0) & (only_s % 2 == 0) & (only_t % 2 == 0)
        weight = table[both] * table[only_s] * table[only_t] * table[free]
        return np.where(even, weight / double_factorial(2 * n - 1), 0.0)

    raise ShadowError(f"No pair-coverage formula for {kind.value} frames")


def _closed_form_moments(
    kind: FrameKind,
    arrays: PauliArrays,
    table: CovarianceTable,
    scaled: sp.csc_matrix,
    stratified: bool,
) -> np.ndarray:
    """
    sum_{k,l} s_k s_l Pr[k, l] M_kl for every row of `scaled` (s = c / p).

    M is the covariance for the stratified form, the second moment
    Re<P_k P_l> otherwise.
    """
    all_columns = np.arange(len(arrays))
    out = np.zeros(scaled.shape[0])
    for start in range(0, len(arrays), ROW_CHUNK):
        rows = all_columns[start : start + ROW_CHUNK]
        moments = table.block(rows, all_columns)
        if not stratified:
            moments = moments + np.outer(table.mean[rows], table.mean)
        block = _pair_weights(kind, arrays, rows) * moments
        right = scaled @ block.T
        out += np.asarray(scaled[:, rows].multiply(right).sum(axis=1)).ravel()
    return out


def _frame_moments(
    frame: MeasurementFrame,
    arrays: PauliArrays,
    table: CovarianceTable,
    scaled: sp.csc_matrix,
) -> Tuple[np.ndarray, np.ndarray]:
    """(<psi|H_f^2|psi>, <psi|H_f|psi>) for every row of `scaled`."""
    covered = np.nonzero(frame.covered(arrays))[0]
    if len(covered) == 0:
        zeros = np.zeros(scaled.shape[0])
        return zeros, zeros
    vectors = np.stack([table.vectors(int(k))[0] for k in covered], axis=1)
    weights = scaled[:, covered].toarray().T
    images = vectors @ weights
    return np.sum(np.abs(images) ** 2, axis=0), table.mean[covered] @ weights


def _frame_average(
    frames: Iterable[MeasurementFrame],
    arrays: PauliArrays,
    table: CovarianceTable,
    scaled: sp.csc_matrix,
    uniform: bool,
    stratified: bool,
) -> Tuple[np.ndarray, np.ndarray, int]:
    """Weighted mean over frames, its standard error and the frame count."""
    total = np.zeros(scaled.shape[0])
    squares = np.zeros(scaled.shape[0])
    weight_sum = 0.0
    count = 0
    for frame in frames:
        second, first = _frame_moments(frame, arrays, table, scaled)
        values = second - first**2 if stratified else second
        w = 1.0 if uniform else frame.probability
        total += w * values
        squares += w * values**2
        weight_sum += w
        count += 1
    mean = total / weight_sum
    if not uniform or count < 2:
        return mean, np.zeros_like(mean), count
    spread = np.maximum(squares / count - mean**2, 0.0) * count / (count - 1)
    return mean, np.sqrt(spread / count), count


# ============================================================
# Public API
# ============================================================

def one_shot_variance(
    kind: FrameKind | str,
    observables: ObservableSet | PauliPolynomial,
    state: WaveVector,
    budget: Budget = "exact",
    rng: Optional[np.random.Generator] = None,
    indices: Optional[Sequence[int]] = None,
    stratified: bool = False,
) -> List[ShadowEstimate]:
    """
    Single-shot shadow-estimator variance of each observable on `state`.

    Args:
        kind: Frame family (qwc, clifford, majorana). Majorana frames read the
            Pauli table as Jordan-Wigner images.
        observables: ObservableSet or a single polynomial
        state: State the observables are measured on
        budget: "exact", "enumerate" or a Monte Carlo frame count
        rng: Generator for Monte Carlo frames
        indices: Observables to evaluate (all when None)
        stratified: Report sum_f Pr(f) Var(H_f) instead of the randomized variance

    Returns:
        One ShadowEstimate per requested observable; products with an
        imaginary part add Var(K) to Var(R)
    """
    kind = FrameKind(kind)
    observables = _as_observable_set(observables)
    if state.n_qubits != observables.n_qubits:
        raise ShadowError(f"{state.n_qubits}-qubit state for {observables.n_qubits}-qubit observables")
    indices = list(range(observables.n_op)) if indices is None else list(indices)
    if isinstance(budget, (int, np.integer)) and not isinstance(budget, bool):
        if budget <= 0:
            raise ShadowError("Shadow budget must be a positive frame count")
    elif budget not in ("exact", "enumerate"):
        raise ShadowError(f"Unknown shadow budget {budget!r}")

    arrays = PauliArrays(observables.paulis, observables.n_qubits)
    p = coverage_probabilities(kind, arrays)
    if np.any(p <= 0):
        bad = observables.paulis[int(np.argmin(p))]
        raise ShadowError(f"{bad.label} is never covered by {kind.value} frames")

    table = CovarianceTable.for_state(observables.paulis, state)
    rows, owners = observables.component_rows(indices)
    means = rows @ table.mean
    scaled = rows.multiply(1.0 / p[None, :]).tocsc()

    stderr = np.zeros(rows.shape[0])
    frames_used = 0
    if budget == "exact":
        moments = _closed_form_moments(kind, arrays, table, scaled, stratified)
    elif budget == "enumerate":
        size = frame_space_size(kind, observables.n_qubits)
        if size > ENUMERATION_LIMIT:
            raise ShadowError(f"{size} {kind.value} frames exceed the enumeration limit")
        moments, _, frames_used = _frame_average(
            enumerate_frames(kind, observables.n_qubits), arrays, table, scaled, False, stratified
        )
    else:
        rng = rng if rng is not None else np.random.default_rng()
        frames = (sample_frame(kind, observables.n_qubits, rng) for _ in range(int(budget)))
        moments, stderr, frames_used = _frame_average(frames, arrays, table, scaled, True, stratified)

    component_variances = np.maximum(moments if stratified else moments - means**2, 0.0)
    variances = observables.fold(component_variances, owners, len(indices))
    errors = np.sqrt(observables.fold(stderr**2, owners, len(indices)))

    estimates = []
    for n, value, error in zip(indices, variances, errors):
        warning = None
        if frames_used and error > STDERR_TARGET * max(value, 1e-300):
            warning = (
                f"relative standard error {error / max(value, 1e-300):.3g} above "
                f"{STDERR_TARGET} after {frames_used} frames"
            )
            logger.warning(f"{observables.labels[n]}: {warning}")
        estimates.append(
            ShadowEstimate(value=float(value), stderr=float(error), warning=warning, frames_used=frames_used)
        )
    return estimates


def simulate_shadow_estimate(
    kind: FrameKind | str,
    observable: PauliPolynomial,
    state: WaveVector,
    shots: int,
    rng: np.random.Generator,
) -> Tuple[float, float]:
    """
    Simulated shadow estimation of <observable> from `shots` single-shot frames.

    Identical frames are pooled and measured jointly; outcomes come from the
    common eigenbasis of the products each frame covers.

    Returns:
        (estimate, standard error)
    """
    kind = FrameKind(kind)
    if shots <= 0:
        raise ShadowError("Shot count must be positive")
    terms = observable.without_identity()
    paulis = terms.paulis()
    arrays = PauliArrays(paulis, observable.n_qubits)
    coeffs = np.array([terms.coefficient(p) for p in paulis])
    p = coverage_probabilities(kind, arrays)

    pooled: dict = {}
    for _ in range(shots):
        frame = sample_frame(kind, observable.n_qubits, rng)
        entry = pooled.setdefault(frame.key, [frame, 0])
        entry[1] += 1

    samples = []
    for frame, count in pooled.values():
        covered = np.nonzero(frame.covered(arrays))[0]
        outcomes = sample_joint_outcomes([paulis[k] for k in covered], state, count, rng)
        samples.append(outcomes @ (coeffs[covered] / p[covered]))
    values = np.concatenate(samples) + observable.constant
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(shots))


class ShadowScheme(MeasurementStrategy):
    """
    Randomized measurement strategy over an ObservableSet.

    Metrics use the stratified variance by default, so frame probabilities play
    the role of the allocations m_alpha of a grouped plan.

    Usage:
        scheme = ShadowScheme(observables, FrameKind.QWC, budget="exact")
        estimates = scheme.estimator_variances(state)
    """

    def __init__(
        self,
        observables: ObservableSet,
        kind: FrameKind | str,
        budget: Budget = "exact",
        seed: int = 0,
        stratified: bool = True,
    ):
        self.observables = observables
        self.kind = FrameKind(kind)
        self.budget = budget
        self.seed = seed
        self.stratified = stratified
        self.method = SCHEME_NAMES[self.kind]
        self.provenance = {
            "frame_kind": self.kind.value,
            "budget": budget,
            "seed": seed,
            "stratified": stratified,
        }
        self._evaluations = 0

    @property
    def n_observables(self) -> int:
        return self.observables.n_op

    def estimator_variances(
        self, state: WaveVector, indices: Optional[Sequence[int]] = None
    ) -> List[VarianceEstimate]:
        rng = np.random.default_rng([self.seed, self._evaluations])
        self._evaluations += 1
        return list(
            one_shot_variance(
                self.kind, self.observables, state, self.budget, rng, indices, self.stratified
            )
        )
