"""Exception hierarchy shared by all tensorgpc modules."""


class TensorGPCError(Exception):
    """Base class for every error raised by this package."""


class DomainError(TensorGPCError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ShapeError(TensorGPCError, ValueError):
    """Array or tensor dimensions are inconsistent."""


class CapacityError(TensorGPCError, MemoryError):
    """A dense materialization would exceed the allowed size."""


class NumericalError(TensorGPCError, ArithmeticError):
    """A linear system or quadrature computation failed numerically."""


class ConfigError(TensorGPCError, ValueError):
    """Invalid run or solver configuration."""


class SimulatorError(TensorGPCError, RuntimeError):
    """The black-box simulator could not be run or timed out."""


class ProtocolError(SimulatorError):
    """The simulator's output violated the line protocol.

    ``line`` is the 1-based output line at which the violation was detected.
    """

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class ModelLoadError(TensorGPCError, ValueError):
    """A persisted model file is malformed or has an unsupported schema."""
