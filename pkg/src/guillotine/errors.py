"""Exception hierarchy shared by all modules."""


class GuillotineError(Exception):
    """Base class for errors raised by this package."""


class ShapeMismatchError(GuillotineError, ValueError):
    """Operands have incompatible shapes, state spaces or dimensions."""


class MemoryCapError(GuillotineError, MemoryError):
    """A dense tensor would exceed the configured entry cap."""


class EnumerationBoundError(GuillotineError, ValueError):
    """A brute-force enumeration would exceed the configured edge bound."""


class ReducibleMatrixError(GuillotineError, ValueError):
    """Perron-Frobenius machinery was given a reducible matrix."""


class ConvergenceError(GuillotineError, RuntimeError):
    """An iterative method failed to converge."""


class ZeroPartitionError(GuillotineError, ValueError):
    """A boundary weight gives a vanishing partition function."""


class ModelFormatError(GuillotineError, ValueError):
    """A model document is malformed or misses a required section."""
