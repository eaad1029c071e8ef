"""Measurement-method catalogue."""

from measbench.registry.registry import MethodRegistry

__all__ = ["MethodRegistry"]
