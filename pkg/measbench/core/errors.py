"""
Measbench Errors - Exception hierarchy shared by every module.
"""


class MeasbenchError(Exception):
    """Base class for all measbench errors."""
    pass


class QubitCountMismatchError(MeasbenchError):
    """Operands act on different numbers of qubits."""
    pass


class HermiticityError(MeasbenchError):
    """An operator that must be Hermitian carries an imaginary residual."""
    pass


class ModeIndexError(MeasbenchError):
    """Fermionic mode index outside the register."""
    pass


class IntegralFormatError(MeasbenchError):
    """Malformed FCIDUMP or JSON integral file."""
    pass


class SectorError(MeasbenchError):
    """Requested states exceed the dimension of the electron sector or subspace."""
    pass


class StateError(MeasbenchError):
    """State vector has the wrong dimension or norm."""
    pass


class PlanError(MeasbenchError):
    """Measurement plan is inconsistent (uncovered term, incompatible group)."""
    pass


class ShadowError(MeasbenchError):
    """Shadow scheme misconfigured (zero budget, unknown frame family)."""
    pass


class FragmentError(MeasbenchError):
    """Fermionic fragment construction failed."""
    pass


class MetricError(MeasbenchError):
    """Metric cannot be evaluated for the given inputs."""
    pass


class ConfigError(MeasbenchError):
    """Benchmark configuration is invalid."""
    pass


class IntegralGenerationError(MeasbenchError):
    """Integrals could not be generated (open shell, SCF not converged)."""
    pass
