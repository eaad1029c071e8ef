"""QSE matrices and the thresholded generalized eigenproblem."""

from __future__ import annotations

import logging
from typing import Tuple

import numpy as np
import scipy.linalg as la

from measbench.chemistry.observables import ObservableSet
from measbench.core.errors import MetricError
from measbench.states.wavevector import WaveVector, expectation

logger = logging.getLogger(__name__)

S_THRESHOLD = 1e-8
INDEFINITE_TOL = 1e-8


def qse_matrices(observables: ObservableSet, state: WaveVector) -> Tuple[np.ndarray, np.ndarray]:
    """Exact D x D subspace matrices H_IJ and S_IJ from the dressed observables."""
    if not observables.entries:
        raise MetricError("Observable set carries no QSE entries")
    dimension = 1 + max(j for _, _, j in observables.entries)
    h = np.zeros((dimension, dimension))
    s = np.zeros((dimension, dimension))
    for (kind, i, j), observable in zip(observables.entries, observables.observables):
        value = expectation(state, observable)
        target = h if kind == "H" else s
        target[i, j] = target[j, i] = value
    return h, s


def noisy_qse_matrices(
    h: np.ndarray, s: np.ndarray, epsilon: float, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """Symmetric Gaussian noise of standard deviation epsilon on every element."""

    def perturb(matrix: np.ndarray) -> np.ndarray:
        noise = np.triu(rng.normal(scale=epsilon, size=matrix.shape))
        return matrix + noise + np.triu(noise, 1).T

    return perturb(h), perturb(s)


def solve_qse(
    h: np.ndarray,
    s: np.ndarray,
    threshold: float = S_THRESHOLD,
    tolerance: float = INDEFINITE_TOL,
) -> np.ndarray:
    """
    Eigenvalues of H c = E S c on the span of S eigenvectors above `threshold`.

    Raises:
        MetricError: S has an eigenvalue below -tolerance
    """
    h = np.asarray(h, dtype=float)
    s = np.asarray(s, dtype=float)
    if h.shape != s.shape or h.shape[0] != h.shape[1]:
        raise MetricError(f"H {h.shape} and S {s.shape} must be equal square matrices")
    sigma, vectors = la.eigh(0.5 * (s + s.T))
    if sigma.min() < -tolerance:
        raise MetricError(f"Overlap matrix is indefinite (eigenvalue {sigma.min():.3e})")
    keep = sigma > threshold
    if not np.any(keep):
        raise MetricError("No overlap eigenvalue above the threshold")
    logger.debug(f"QSE: kept {int(keep.sum())} of {len(sigma)} directions")
    basis = vectors[:, keep] / np.sqrt(sigma[keep])[None, :]
    reduced = basis.T @ (0.5 * (h + h.T)) @ basis
    return la.eigvalsh(reduced)
