"""
On-disk state cache.

Each entry is an .npz archive of amplitudes plus a JSON sidecar describing
where the states came from; keys combine the integral checksum, mapping,
electron count and number of states.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Optional

import numpy as np

from measbench.states.wavevector import StateBundle, WaveVector

logger = logging.getLogger(__name__)


class StateCache:
    """Directory-backed cache of StateBundle objects."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def key(checksum: str, mapping: str, n_electrons: int, n_states: int) -> str:
        return f"{checksum[:16]}-{mapping}-n{n_electrons}-s{n_states}"

    def _paths(self, key: str):
        return self.directory / f"{key}.npz", self.directory / f"{key}.json"

    def load(self, key: str) -> Optional[StateBundle]:
        archive, sidecar = self._paths(key)
        if not (archive.exists() and sidecar.exists()):
            return None
        meta = json.loads(sidecar.read_text(encoding="utf-8"))
        with np.load(archive) as data:
            exact = [
                WaveVector(data["exact"][i], label=lbl, energy=e)
                for i, (lbl, e) in enumerate(zip(meta["exact_labels"], meta["exact_energies"]))
            ]
            proxy = [
                WaveVector(data["proxy"][i], label=lbl, energy=e)
                for i, (lbl, e) in enumerate(zip(meta["proxy_labels"], meta["proxy_energies"]))
            ]
            weights = data["weights"]
        logger.debug(f"State cache hit: {key}")
        return StateBundle(exact, proxy, weights)

    def save(self, key: str, bundle: StateBundle, **metadata):
        archive, sidecar = self._paths(key)
        np.savez(
            archive,
            exact=np.stack([s.amplitudes for s in bundle.exact]),
            proxy=np.stack([s.amplitudes for s in bundle.proxy]),
            weights=bundle.weights,
        )
        meta = {
            "exact_labels": [s.label for s in bundle.exact],
            "exact_energies": [s.energy for s in bundle.exact],
            "proxy_labels": [s.label for s in bundle.proxy],
            "proxy_energies": [s.energy for s in bundle.proxy],
            **metadata,
        }
        sidecar.write_text(json.dumps(meta, indent=2), encoding="utf-8")
        logger.debug(f"State cache store: {key}")
