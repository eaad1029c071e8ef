"""
Molecular integrals: FCIDUMP and JSON readers, FCIDUMP writer.

Two-electron integrals are stored in chemist notation g[p,q,r,s] = (pq|rs)
over spatial orbitals with full 8-fold permutational symmetry.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np

from measbench.core.errors import IntegralFormatError

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-8

_HEADER_KEY = re.compile(r"([A-Za-z0-9_]+)\s*=\s*([^=]*?)(?=,?\s*[A-Za-z0-9_]+\s*=|\s*$)")


@dataclass(frozen=True)
class MolecularIntegrals:
    """
    Electronic-structure input for one molecule.

    Attributes:
        n_spatial: Number of spatial orbitals
        n_electrons: Number of electrons
        h: One-electron integrals h[p, q]
        g: Two-electron integrals (pq|rs), chemist order
        e_nuc: Nuclear repulsion (and frozen-core) constant
        ms2: 2*S_z from the file header
        checksum: sha256 of the source file, when read from disk
    """

    n_spatial: int
    n_electrons: int
    h: np.ndarray
    g: np.ndarray
    e_nuc: float = 0.0
    ms2: int = 0
    checksum: Optional[str] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        n = self.n_spatial
        if self.h.shape != (n, n):
            raise IntegralFormatError(f"h has shape {self.h.shape}, expected {(n, n)}")
        if self.g.shape != (n, n, n, n):
            raise IntegralFormatError(f"g has shape {self.g.shape}, expected {(n,) * 4}")
        if not 0 <= self.n_electrons <= 2 * n:
            raise IntegralFormatError(
                f"{self.n_electrons} electrons do not fit in {2 * n} spin orbitals"
            )
        if not np.allclose(self.h, self.h.T, atol=SYMMETRY_TOL):
            raise IntegralFormatError("One-electron integrals are not symmetric")
        if not (
            np.allclose(self.g, self.g.transpose(1, 0, 2, 3), atol=SYMMETRY_TOL)
            and np.allclose(self.g, self.g.transpose(2, 3, 0, 1), atol=SYMMETRY_TOL)
        ):
            raise IntegralFormatError("Two-electron integrals lack 8-fold symmetry")

    @property
    def n_modes(self) -> int:
        """Spin orbitals, interleaved alpha (even) / beta (odd)."""
        return 2 * self.n_spatial

    def with_electrons(self, n_electrons: int) -> "MolecularIntegrals":
        return MolecularIntegrals(
            self.n_spatial, n_electrons, self.h, self.g, self.e_nuc, self.ms2,
            self.checksum, dict(self.metadata),
        )


def _symmetrize_eri(g: np.ndarray, p: int, q: int, r: int, s: int, value: float):
    for a, b, c, d in (
        (p, q, r, s), (q, p, r, s), (p, q, s, r), (q, p, s, r),
        (r, s, p, q), (s, r, p, q), (r, s, q, p), (s, r, q, p),
    ):
        g[a, b, c, d] = value


def _parse_header(text: str) -> Dict[str, str]:
    body = re.sub(r"^\s*&FCI", "", text, flags=re.IGNORECASE)
    values: Dict[str, str] = {}
    for key, raw in _HEADER_KEY.findall(body.replace("\n", " ")):
        values[key.upper()] = raw.strip().rstrip(",")
    return values


def parse_fcidump(text: str, checksum: Optional[str] = None) -> MolecularIntegrals:
    """
    Parse FCIDUMP text.

    Integral lines are "value i j k l" with 1-based orbital indices. Lines with
    k = l = 0 are one-electron integrals and i = j = k = l = 0 is the core
    energy. Each stored two-electron value is expanded to all 8 symmetric
    positions.
    """
    match = re.search(r"(&FCI.*?)(&END|/)", text, flags=re.IGNORECASE | re.DOTALL)
    if not match:
        raise IntegralFormatError("Missing &FCI ... &END header")
    header = _parse_header(match.group(1))
    try:
        norb = int(header["NORB"])
        nelec = int(header["NELEC"])
    except (KeyError, ValueError) as e:
        raise IntegralFormatError(f"Header lacks NORB/NELEC: {header}") from e
    ms2 = int(header.get("MS2", "0") or 0)

    h = np.zeros((norb, norb))
    g = np.zeros((norb, norb, norb, norb))
    e_nuc = 0.0
    seen_two_body = False

    for lineno, line in enumerate(text[match.end():].splitlines(), start=1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != 5:
            raise IntegralFormatError(f"Integral line {lineno} has {len(fields)} fields: {line!r}")
        try:
            value = float(fields[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(f) for f in fields[1:])
        except ValueError as e:
            raise IntegralFormatError(f"Unreadable integral line {lineno}: {line!r}") from e
        if max(i, j, k, l) > norb or min(i, j, k, l) < 0:
            raise IntegralFormatError(f"Index out of range on line {lineno}: {line!r}")

        if i == j == k == l == 0:
            e_nuc = value
        elif k == 0 and l == 0:
            if i == 0 or j == 0:
                # orbital energies; not part of the Hamiltonian
                continue
            h[i - 1, j - 1] = h[j - 1, i - 1] = value
        else:
            if 0 in (i, j, k, l):
                raise IntegralFormatError(f"Partial zero index on line {lineno}: {line!r}")
            _symmetrize_eri(g, i - 1, j - 1, k - 1, l - 1, value)
            seen_two_body = True

    if not seen_two_body:
        logger.warning("FCIDUMP contains no two-electron integrals")
    return MolecularIntegrals(norb, nelec, h, g, e_nuc, ms2, checksum)


def parse_json_integrals(data: Dict[str, Any], checksum: Optional[str] = None) -> MolecularIntegrals:
    """
    Read {n_spatial, n_electrons, e_nuc, h, g, convention}.

    `convention` is "chemist" (default, g = (pq|rs)) or "physicist"
    (g = <pq|rs> = (pr|qs)).
    """
    try:
        n = int(data["n_spatial"])
        h = np.asarray(data["h"], dtype=float).reshape(n, n)
        g = np.asarray(data["g"], dtype=float).reshape(n, n, n, n)
        n_electrons = int(data["n_electrons"])
    except (KeyError, ValueError, TypeError) as e:
        raise IntegralFormatError(f"Invalid JSON integral document: {e}") from e
    convention = str(data.get("convention", "chemist")).lower()
    if convention == "physicist":
        g = g.transpose(0, 2, 1, 3).copy()
    elif convention != "chemist":
        raise IntegralFormatError(f"Unknown integral convention: {convention}")
    return MolecularIntegrals(
        n, n_electrons, h, g, float(data.get("e_nuc", 0.0)), int(data.get("ms2", 0)), checksum
    )


def load_integrals(path: Path) -> MolecularIntegrals:
    """Read an FCIDUMP or .json integral file."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Integral file not found: {path}")
    raw = path.read_bytes()
    checksum = hashlib.sha256(raw).hexdigest()
    text = raw.decode("utf-8")
    if path.suffix.lower() == ".json":
        try:
            document = json.loads(text)
        except json.JSONDecodeError as e:
            raise IntegralFormatError(f"{path}: {e}") from e
        integrals = parse_json_integrals(document, checksum)
    else:
        integrals = parse_fcidump(text, checksum)
    logger.info(
        f"Loaded {path.name}: {integrals.n_spatial} orbitals, {integrals.n_electrons} electrons"
    )
    return integrals


def write_fcidump(integrals: MolecularIntegrals, path: Path, tol: float = 1e-15):
    """Write the unique integrals in FCIDUMP layout."""
    n = integrals.n_spatial
    lines = [
        f" &FCI NORB={n:4d},NELEC={integrals.n_electrons:2d},MS2={integrals.ms2},",
        "  ORBSYM=" + "1," * n,
        "  ISYM=1,",
        " &END",
    ]
    fmt = "{:23.16e} {:4d} {:4d} {:4d} {:4d}"
    for i in range(n):
        for j in range(i + 1):
            for k in range(n):
                for l in range(k + 1):
                    if i * (i + 1) // 2 + j < k * (k + 1) // 2 + l:
                        continue
                    value = integrals.g[i, j, k, l]
                    if abs(value) > tol:
                        lines.append(fmt.format(value, i + 1, j + 1, k + 1, l + 1))
    for i in range(n):
        for j in range(i + 1):
            if abs(integrals.h[i, j]) > tol:
                lines.append(fmt.format(integrals.h[i, j], i + 1, j + 1, 0, 0))
    lines.append(fmt.format(integrals.e_nuc, 0, 0, 0, 0))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
