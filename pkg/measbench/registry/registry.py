"""
Method registry - the catalogue of measurement methods a benchmark can run.
"""

from __future__ import annotations

import logging
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from measbench.core.errors import ConfigError
from measbench.core.models import MethodFamily, MethodSpec, Task

logger = logging.getLogger(__name__)


class MethodRegistry:
    """
    Central registry of MethodSpec records.

    The packaged methods.yaml is loaded by default; extra catalogues can be
    loaded from files and methods registered programmatically.

    Usage:
        registry = MethodRegistry()
        spec = registry.get("fc-ima")
        for spec in registry.filter_by_task(Task.QSE):
            print(spec.name)
    """

    def __init__(self, catalogue: Optional[Path] = None, auto_load: bool = True):
        self._methods: Dict[str, MethodSpec] = {}
        if auto_load:
            if catalogue is None:
                text = resources.files("measbench.registry").joinpath("methods.yaml").read_text(
                    encoding="utf-8"
                )
                self._load_text(text, "methods.yaml")
            else:
                self.load_file(Path(catalogue))

    def _load_text(self, text: str, source: str):
        data = yaml.safe_load(text) or {}
        entries = data.get("methods", [])
        if not isinstance(entries, list):
            raise ConfigError(f"{source}: 'methods' must be a list")
        for entry in entries:
            try:
                self.register(MethodSpec.model_validate(entry))
            except ValueError as e:
                raise ConfigError(f"{source}: invalid method {entry.get('name', '?')}: {e}") from e
        logger.debug(f"Loaded {len(entries)} methods from {source}")

    def load_file(self, path: Path):
        """Load a YAML catalogue with a top-level `methods` list."""
        if not path.exists():
            raise ConfigError(f"Method catalogue not found: {path}")
        self._load_text(path.read_text(encoding="utf-8"), str(path))

    # ==================== Core Operations ====================

    def register(self, spec: MethodSpec):
        self._methods[spec.name] = spec
        logger.debug(f"Registered method: {spec.name}")

    def unregister(self, name: str) -> Optional[MethodSpec]:
        return self._methods.pop(name, None)

    def get(self, name: str) -> Optional[MethodSpec]:
        return self._methods.get(name)

    def require(self, name: str) -> MethodSpec:
        """Like get, but unknown names raise ConfigError."""
        spec = self.get(name)
        if spec is None:
            raise ConfigError(f"Unknown method {name!r}; known: {', '.join(self.list_names())}")
        return spec

    def all(self) -> List[MethodSpec]:
        return list(self._methods.values())

    def list_names(self) -> List[str]:
        return list(self._methods.keys())

    # ==================== Filtering ====================

    def filter_by_family(self, family: MethodFamily | str) -> List[MethodSpec]:
        family = MethodFamily(family)
        return [m for m in self._methods.values() if m.family == family]

    def filter_by_task(self, task: Task | str) -> List[MethodSpec]:
        task = Task(task)
        return [m for m in self._methods.values() if m.supports(task)]

    # ==================== Utility ====================

    def summary(self) -> Dict[str, Any]:
        by_family: Dict[str, int] = {}
        for spec in self._methods.values():
            by_family[spec.family.value] = by_family.get(spec.family.value, 0) + 1
        return {
            "total": len(self._methods),
            "by_family": by_family,
            "methods": self.list_names(),
        }

    def __contains__(self, name: str) -> bool:
        return name in self._methods

    def __len__(self) -> int:
        return len(self._methods)

    def __iter__(self):
        return iter(self._methods.values())
