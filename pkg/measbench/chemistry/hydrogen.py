"""
STO-3G integrals for linear hydrogen chains.

Each atom carries one contracted 1s Gaussian, so every integral reduces to
s-type primitive formulas and the zeroth Boys function. Closed-shell
restricted Hartree-Fock orbitals define the molecular-orbital basis the
integrals are returned in, ready for `write_fcidump`.

    integrals = hydrogen_chain(4, spacing=1.0)
    write_fcidump(integrals, Path("h4.fcidump"))
"""

from __future__ import annotations

import hashlib
import logging
from typing import Tuple

import numpy as np
import scipy.linalg as la
from scipy.special import erf

from measbench.chemistry.integrals import MolecularIntegrals
from measbench.core.errors import IntegralGenerationError

logger = logging.getLogger(__name__)

BOHR_PER_ANGSTROM = 1.0 / 0.52917721092

# Hydrogen 1s, zeta = 1.24
STO3G_EXPONENTS = np.array([3.42525091, 0.62391373, 0.16885540])
STO3G_COEFFICIENTS = np.array([0.15432897, 0.53532814, 0.44463454])

SCF_MAX_ITERATIONS = 200
SCF_ENERGY_TOL = 1e-12
SCF_DENSITY_TOL = 1e-10


def boys_zero(t: np.ndarray) -> np.ndarray:
    """F_0(t) = integral_0^1 exp(-t u^2) du."""
    t = np.asarray(t, dtype=float)
    out = 1.0 - t / 3.0
    large = t > 1e-10
    root = np.sqrt(t[large])
    out[large] = 0.5 * np.sqrt(np.pi) * erf(root) / root
    return out


def chain_positions(n_atoms: int, spacing: float) -> np.ndarray:
    """(n_atoms, 3) Cartesian positions in bohr along z."""
    positions = np.zeros((n_atoms, 3))
    positions[:, 2] = np.arange(n_atoms) * spacing * BOHR_PER_ANGSTROM
    return positions


def nuclear_repulsion(positions: np.ndarray) -> float:
    distances = la.norm(positions[:, None, :] - positions[None, :, :], axis=2)
    upper = np.triu_indices(len(positions), 1)
    return float(np.sum(1.0 / distances[upper]))


def atomic_integrals(positions: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Overlap, kinetic, nuclear-attraction and (pq|rs) integrals over the 1s functions.

    Primitive quantities are built over every primitive pair (and pair of
    pairs) at once, then summed into contracted functions.
    """
    n = len(positions)
    k = len(STO3G_EXPONENTS)
    centres = np.repeat(positions, k, axis=0)
    alpha = np.tile(STO3G_EXPONENTS, n)
    coeff = np.tile(STO3G_COEFFICIENTS * (2.0 * STO3G_EXPONENTS / np.pi) ** 0.75, n)

    p = alpha[:, None] + alpha[None, :]
    mu = alpha[:, None] * alpha[None, :] / p
    r2 = np.sum((centres[:, None, :] - centres[None, :, :]) ** 2, axis=2)
    prefactor = coeff[:, None] * coeff[None, :] * np.exp(-mu * r2)
    centre_p = (alpha[:, None, None] * centres[:, None, :] + alpha[None, :, None] * centres[None, :, :]) / p[..., None]

    overlap = prefactor * (np.pi / p) ** 1.5
    kinetic = overlap * mu * (3.0 - 2.0 * mu * r2)
    attraction = np.zeros_like(overlap)
    for nucleus in positions:
        distance2 = np.sum((centre_p - nucleus) ** 2, axis=2)
        attraction -= prefactor * (2.0 * np.pi / p) * boys_zero(p * distance2)

    pp = p[:, :, None, None]
    qq = p[None, None, :, :]
    separation = np.sum(
        (centre_p[:, :, None, None, :] - centre_p[None, None, :, :, :]) ** 2, axis=4
    )
    eri = (
        prefactor[:, :, None, None]
        * prefactor[None, None, :, :]
        * 2.0 * np.pi**2.5 / (pp * qq * np.sqrt(pp + qq))
        * boys_zero(pp * qq / (pp + qq) * separation)
    )

    def contract(matrix: np.ndarray) -> np.ndarray:
        shape = (n, k) * (matrix.ndim)
        axes = tuple(range(1, 2 * matrix.ndim, 2))
        return matrix.reshape(shape).sum(axis=axes)

    return contract(overlap), contract(kinetic), contract(attraction), contract(eri)


def restricted_hartree_fock(
    overlap: np.ndarray, core: np.ndarray, eri: np.ndarray, n_occupied: int
) -> Tuple[np.ndarray, float]:
    """
    Closed-shell SCF from the core-Hamiltonian guess.

    Returns:
        (orbital coefficients, electronic energy)

    Raises:
        IntegralGenerationError: no convergence within SCF_MAX_ITERATIONS
    """
    _, orbitals = la.eigh(core, overlap)
    density = 2.0 * orbitals[:, :n_occupied] @ orbitals[:, :n_occupied].T
    energy = 0.0
    for iteration in range(1, SCF_MAX_ITERATIONS + 1):
        coulomb = np.einsum("pqrs,rs->pq", eri, density)
        exchange = np.einsum("prqs,rs->pq", eri, density)
        fock = core + coulomb - 0.5 * exchange
        new_energy = 0.5 * float(np.sum(density * (core + fock)))
        _, orbitals = la.eigh(fock, overlap)
        new_density = 2.0 * orbitals[:, :n_occupied] @ orbitals[:, :n_occupied].T
        converged = (
            abs(new_energy - energy) < SCF_ENERGY_TOL
            and np.max(np.abs(new_density - density)) < SCF_DENSITY_TOL
        )
        energy, density = new_energy, new_density
        if converged:
            logger.debug(f"SCF converged after {iteration} iterations: E_elec={energy:.12f}")
            break
    else:
        raise IntegralGenerationError(f"SCF did not converge in {SCF_MAX_ITERATIONS} iterations")

    # largest coefficient of each orbital positive
    pivots = orbitals[np.argmax(np.abs(orbitals), axis=0), np.arange(orbitals.shape[1])]
    return orbitals * np.sign(pivots)[None, :], energy


def hydrogen_chain(n_atoms: int, spacing: float = 1.0, charge: int = 0) -> MolecularIntegrals:
    """
    Molecular-orbital integrals of a linear H_n chain with equal spacing (angstrom).

    Raises:
        IntegralGenerationError: bad geometry or an open-shell electron count
    """
    if n_atoms < 1 or spacing <= 0:
        raise IntegralGenerationError(f"Invalid chain: {n_atoms} atoms at {spacing} angstrom")
    n_electrons = n_atoms - charge
    if n_electrons <= 0 or n_electrons % 2:
        raise IntegralGenerationError(
            f"H{n_atoms} with charge {charge} has {n_electrons} electrons; a closed shell is required"
        )
    positions = chain_positions(n_atoms, spacing)
    overlap, kinetic, attraction, eri = atomic_integrals(positions)
    core = kinetic + attraction
    orbitals, e_elec = restricted_hartree_fock(overlap, core, eri, n_electrons // 2)

    h = orbitals.T @ core @ orbitals
    g = np.einsum("pi,qj,pqrs,rk,sl->ijkl", orbitals, orbitals, eri, orbitals, orbitals, optimize=True)
    h = 0.5 * (h + h.T)
    e_nuc = nuclear_repulsion(positions)
    source = f"sto-3g/H{n_atoms}/charge={charge}/spacing={spacing!r}"
    logger.info(f"{source}: E_HF={e_elec + e_nuc:.10f}, E_nuc={e_nuc:.10f}")
    return MolecularIntegrals(
        n_atoms,
        n_electrons,
        h,
        g,
        e_nuc,
        checksum=hashlib.sha256(source.encode("utf-8")).hexdigest(),
        metadata={"source": source, "hf_energy": e_elec + e_nuc},
    )
