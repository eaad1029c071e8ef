"""Tests for the method registry."""

import pytest

from measbench.core.errors import ConfigError
from measbench.core.models import Compatibility, FrameKind, MethodFamily, MethodSpec, Task
from measbench.registry.registry import MethodRegistry


@pytest.fixture
def registry():
    return MethodRegistry()


class TestMethodRegistry:
    """Tests for MethodRegistry."""

    def test_builtin_catalogue(self, registry):
        """The packaged catalogue lists the ten benchmark methods."""
        assert len(registry) == 10
        assert registry.list_names() == [
            "qwc-si", "qwc-ima", "fc-si", "fc-ima", "fc-ics",
            "qwc-cs", "fc-cs", "derand", "majorana-cs", "f3",
        ]

    def test_pipelines(self, registry):
        """Deterministic methods carry their planner stages."""
        assert registry.get("fc-ics").pipeline == ["si", "ima", "ics"]
        assert registry.get("qwc-ima").compat == Compatibility.QWC
        assert registry.get("fc-cs").frame_kind == FrameKind.CLIFFORD

    def test_filter_by_family(self, registry):
        """Family filters split the catalogue."""
        shadows = {m.name for m in registry.filter_by_family("shadow")}
        assert shadows == {"qwc-cs", "fc-cs", "majorana-cs"}
        assert len(registry.filter_by_family(MethodFamily.DETERMINISTIC)) == 5

    def test_filter_by_task(self, registry):
        """ICS and F3 are single-observable methods."""
        qse = {m.name for m in registry.filter_by_task(Task.QSE)}
        assert "fc-ics" not in qse and "f3" not in qse
        assert len(qse) == 8
        assert len(registry.filter_by_task("mc")) == 10

    def test_mapping_independent(self, registry):
        """Majorana shadows and F3 do not depend on the qubit encoding."""
        assert {m.name for m in registry if m.mapping_independent} == {"majorana-cs", "f3"}

    def test_require_unknown(self, registry):
        """Unknown names raise ConfigError."""
        assert registry.get("magic") is None
        with pytest.raises(ConfigError):
            registry.require("magic")

    def test_register_and_unregister(self, registry):
        """Programmatic registration."""
        spec = MethodSpec(name="qwc-only", family=MethodFamily.DETERMINISTIC, compat="qwc", pipeline=["si"])
        registry.register(spec)
        assert "qwc-only" in registry
        assert registry.unregister("qwc-only") is spec
        assert "qwc-only" not in registry

    def test_summary(self, registry):
        """Counts per family."""
        summary = registry.summary()
        assert summary["total"] == 10
        assert summary["by_family"] == {
            "deterministic": 5,
            "shadow": 3,
            "derandomized": 1,
            "fermionic": 1,
        }


class TestCatalogueFiles:
    """Tests for loading catalogues from YAML files."""

    def test_load_file(self, tmp_path):
        """Extra catalogues load on top of an empty registry."""
        path = tmp_path / "methods.yaml"
        path.write_text(
            "methods:\n"
            "  - name: fc-two-stage\n"
            "    family: deterministic\n"
            "    compat: fc\n"
            "    pipeline: [si, ima]\n"
            "    tasks: [ground]\n"
        )
        registry = MethodRegistry(catalogue=path)
        spec = registry.require("fc-two-stage")
        assert spec.tasks == [Task.GROUND]
        assert not spec.supports(Task.QSE)

    def test_invalid_stage(self, tmp_path):
        """Unknown planner stages are a configuration error."""
        path = tmp_path / "methods.yaml"
        path.write_text("methods:\n  - name: bad\n    family: deterministic\n    pipeline: [si, anneal]\n")
        with pytest.raises(ConfigError):
            MethodRegistry(catalogue=path)

    def test_missing_file(self, tmp_path):
        """A missing catalogue raises ConfigError."""
        with pytest.raises(ConfigError):
            MethodRegistry(catalogue=tmp_path / "absent.yaml")

    def test_methods_must_be_list(self, tmp_path):
        """The top-level `methods` key holds a list."""
        path = tmp_path / "methods.yaml"
        path.write_text("methods:\n  fc-si: {}\n")
        with pytest.raises(ConfigError):
            MethodRegistry(catalogue=path)
