"""
Hartree-Fock-solvable fragments from a low-rank factorization of (pq|rs).

Each fragment is U p(n) U^dagger: an orbital rotation U = exp(sum kappa_pq
E^p_q) around a polynomial p of spin-orbital number operators,

    p(n) = sum_i eps_i n_i + sum_ij lambda_ij n_i n_j.

The two-electron operator 1/2 sum (pq|rs) E^p_q E^r_s is split by
diagonalising the (pq),(rs) supermatrix: every retained eigenpair (w, M)
gives 1/2 w (sum_pq M_pq E^p_q)^2 = U [1/2 w (sum_p mu_p n_p)^2] U^dagger with
M = U diag(mu) U^T.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Optional

import numpy as np
import scipy.linalg as la
from scipy.sparse.linalg import expm_multiply

from measbench.core.errors import FragmentError
from measbench.core.models import Mapping
from measbench.fermion.operators import FermionPolynomial, multiply_fermion, one_body_operator
from measbench.pauli.product import basis_bits
from measbench.states.rotation import one_body_generator

logger = logging.getLogger(__name__)

LR_THRESHOLD = 1e-8
SYMMETRY_TOL = 1e-8
GENERATOR_TOL = 1e-8


def spin_orbital_generator(kappa: np.ndarray) -> np.ndarray:
    """kappa over spatial orbitals -> kappa (x) I_2 over interleaved spin orbitals."""
    return np.kron(kappa, np.eye(2))


def orbital_generator(rotation: np.ndarray) -> np.ndarray:
    """
    Real antisymmetric kappa with expm(kappa) = rotation.

    Works from the real Schur form Z T Z^T of the orthogonal matrix: 2x2
    rotation blocks map to their angles, and -1 eigenvalues are paired into
    rotations by pi.
    """
    rotation = np.asarray(rotation, dtype=float)
    n = rotation.shape[0]
    if not np.allclose(rotation @ rotation.T, np.eye(n), atol=GENERATOR_TOL):
        raise FragmentError("Orbital rotation is not orthogonal")
    if np.linalg.det(rotation) < 0:
        raise FragmentError("Orbital rotation has determinant -1")

    t, z = la.schur(rotation, output="real")
    log_t = np.zeros((n, n))
    flipped = []
    i = 0
    while i < n:
        if i + 1 < n and abs(t[i + 1, i]) > 1e-12:
            angle = np.arctan2(0.5 * (t[i + 1, i] - t[i, i + 1]), 0.5 * (t[i, i] + t[i + 1, i + 1]))
            log_t[i + 1, i] = angle
            log_t[i, i + 1] = -angle
            i += 2
            continue
        if t[i, i] < 0:
            flipped.append(i)
        i += 1
    for a, b in zip(flipped[0::2], flipped[1::2]):
        log_t[b, a] = np.pi
        log_t[a, b] = -np.pi

    kappa = z @ log_t @ z.T
    kappa = 0.5 * (kappa - kappa.T)
    error = np.max(np.abs(la.expm(kappa) - rotation))
    if error > 1e-6:
        raise FragmentError(f"Generator reproduces the rotation only to {error:.2e}")
    return kappa


def _proper(rotation: np.ndarray) -> np.ndarray:
    """Flip one column so the eigenvector basis is a proper rotation."""
    if np.linalg.det(rotation) < 0:
        rotation = rotation.copy()
        rotation[:, 0] *= -1
    return rotation


@dataclass
class FermionicFragment:
    """
    U p(n) U^dagger with U = exp(kappa (x) I_2).

    Attributes:
        generator: Antisymmetric spatial kappa (n x n)
        linear: Spin-orbital eps (2n,) or None
        quadratic: Spin-orbital lambda (2n x 2n) or None
        fluid_coefficient: Fraction of the diagonal of lambda moved to the one-body fragment
        label: Free-form tag ("one-body", "lr-3", ...)
    """

    generator: np.ndarray
    linear: Optional[np.ndarray] = None
    quadratic: Optional[np.ndarray] = None
    fluid_coefficient: float = 0.0
    label: str = ""
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.generator = np.asarray(self.generator, dtype=float)
        n = self.generator.shape[0]
        if not np.allclose(self.generator, -self.generator.T, atol=GENERATOR_TOL):
            raise FragmentError("Fragment generator is not antisymmetric")
        if self.linear is not None:
            self.linear = np.asarray(self.linear, dtype=float)
            if self.linear.shape != (2 * n,):
                raise FragmentError(f"Linear part has shape {self.linear.shape}, expected ({2 * n},)")
        if self.quadratic is not None:
            self.quadratic = np.asarray(self.quadratic, dtype=float)
            if self.quadratic.shape != (2 * n, 2 * n):
                raise FragmentError(f"Quadratic part has shape {self.quadratic.shape}")

    @property
    def n_spatial(self) -> int:
        return self.generator.shape[0]

    @property
    def n_modes(self) -> int:
        return 2 * self.n_spatial

    @property
    def rotation(self) -> np.ndarray:
        return la.expm(self.generator)

    @cached_property
    def _rotation_generator(self):
        if not np.any(self.generator):
            return None
        return one_body_generator(spin_orbital_generator(self.generator), Mapping.JW).to_sparse()

    # ==================== Diagonal polynomial ====================

    def occupation_values(self, linear: Optional[np.ndarray] = None, quadratic: Optional[np.ndarray] = None) -> np.ndarray:
        """p(n) on every Jordan-Wigner basis state (bit i = occupation of mode i)."""
        linear = self.linear if linear is None else linear
        quadratic = self.quadratic if quadratic is None else quadratic
        occ = basis_bits(self.n_modes).astype(float)
        values = np.zeros(occ.shape[0])
        if linear is not None:
            values += occ @ linear
        if quadratic is not None:
            values += np.einsum("bi,ij,bj->b", occ, quadratic, occ)
        return values

    @property
    def diagonal_weights(self) -> np.ndarray:
        """lambda_ii, the part collapsible to one-body terms since n_i^2 = n_i."""
        if self.quadratic is None:
            return np.zeros(self.n_modes)
        return np.diag(self.quadratic).copy()

    # ==================== State-vector action ====================

    def rotate(self, amplitudes: np.ndarray, inverse: bool = False) -> np.ndarray:
        """U|v> (or U^dagger|v>) on the Jordan-Wigner state vector."""
        generator = self._rotation_generator
        if generator is None:
            return np.asarray(amplitudes, dtype=complex)
        return expm_multiply(-generator if inverse else generator, amplitudes)

    def apply(self, amplitudes: np.ndarray, values: Optional[np.ndarray] = None) -> np.ndarray:
        """U diag(values) U^dagger |v>, values defaulting to p(n)."""
        values = self.occupation_values() if values is None else values
        return self.rotate(values * self.rotate(amplitudes, inverse=True))

    # ==================== Operators and documents ====================

    def to_fermion(self) -> FermionPolynomial:
        """Normal-ordered operator; intended for dense checks on a few modes."""
        rotation = np.kron(self.rotation, np.eye(2))
        numbers = [
            one_body_operator(np.outer(rotation[:, i], rotation[:, i])) for i in range(self.n_modes)
        ]
        total = FermionPolynomial(self.n_modes, {})
        if self.linear is not None:
            for i, eps in enumerate(self.linear):
                if abs(eps) > 1e-14:
                    total = total + numbers[i] * float(eps)
        if self.quadratic is not None:
            for i, j in zip(*np.nonzero(np.abs(self.quadratic) > 1e-14)):
                total = total + multiply_fermion(numbers[i], numbers[j]) * float(self.quadratic[i, j])
        return total

    def to_json(self) -> Dict[str, Any]:
        rows, cols = np.tril_indices(self.n_spatial, -1)
        polynomial: Dict[str, Any] = {}
        if self.linear is not None:
            polynomial["linear"] = self.linear.tolist()
        if self.quadratic is not None:
            polynomial["quadratic"] = self.quadratic.tolist()
        return {
            "label": self.label,
            "n_spatial": self.n_spatial,
            "generator": self.generator[rows, cols].tolist(),
            "polynomial": polynomial,
            "c": self.fluid_coefficient,
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "FermionicFragment":
        n = int(data["n_spatial"])
        generator = np.zeros((n, n))
        rows, cols = np.tril_indices(n, -1)
        generator[rows, cols] = data["generator"]
        generator -= generator.T
        polynomial = data.get("polynomial", {})
        return cls(
            generator,
            linear=polynomial.get("linear"),
            quadratic=polynomial.get("quadratic"),
            fluid_coefficient=float(data.get("c", 0.0)),
            label=data.get("label", ""),
        )


# ============================================================
# Decompositions
# ============================================================

def one_body_fragment(matrix: np.ndarray, label: str = "one-body") -> FermionicFragment:
    """sum_pq h_pq E^p_q as U (sum_p eps_p n_p) U^dagger."""
    matrix = np.asarray(matrix, dtype=float)
    if not np.allclose(matrix, matrix.T, atol=SYMMETRY_TOL):
        raise FragmentError("One-body matrix is not symmetric")
    eps, vectors = la.eigh(0.5 * (matrix + matrix.T))
    return FermionicFragment(
        orbital_generator(_proper(vectors)), linear=np.repeat(eps, 2), label=label
    )


def lr_decompose(g: np.ndarray, threshold: float = LR_THRESHOLD) -> List[FermionicFragment]:
    """
    Low-rank fragments of 1/2 sum (pq|rs) E^p_q E^r_s.

    Args:
        g: Chemist-notation (pq|rs) tensor over spatial orbitals
        threshold: Supermatrix eigenvalues with |w| below this are dropped

    Returns:
        Fragments ordered by descending |w|
    """
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    supermatrix = g.reshape(n * n, n * n)
    if not np.allclose(supermatrix, supermatrix.T, atol=SYMMETRY_TOL):
        raise FragmentError("Two-electron supermatrix is not symmetric")

    weights, vectors = la.eigh(0.5 * (supermatrix + supermatrix.T))
    order = np.argsort(-np.abs(weights))
    fragments = []
    for index in order:
        w = weights[index]
        if abs(w) < threshold:
            continue
        m = vectors[:, index].reshape(n, n)
        mu, rotation = la.eigh(0.5 * (m + m.T))
        quadratic = np.kron(0.5 * w * np.outer(mu, mu), np.ones((2, 2)))
        fragments.append(
            FermionicFragment(
                orbital_generator(_proper(rotation)),
                quadratic=quadratic,
                label=f"lr-{len(fragments)}",
                metadata={"eigenvalue": float(w)},
            )
        )

    if fragments:
        error = np.max(np.abs(reconstruct_two_body(fragments) - g))
        logger.info(f"Low-rank: {len(fragments)} fragments, reconstruction error {error:.2e}")
    return fragments


def reconstruct_two_body(fragments: List[FermionicFragment]) -> np.ndarray:
    """(pq|rs) represented by unmodified quadratic fragments."""
    n = fragments[0].n_spatial
    g = np.zeros((n, n, n, n))
    for fragment in fragments:
        if fragment.quadratic is None:
            continue
        spatial = 2.0 * fragment.quadratic[0::2, 0::2]
        u = fragment.rotation
        g += np.einsum("ap,bp,pq,cq,dq->abcd", u, u, spatial, u, u)
    return g
