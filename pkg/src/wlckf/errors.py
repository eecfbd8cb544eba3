"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Inputs have inconsistent or invalid dimensions."""


class ConsistencyError(ValueError):
    """A structural invariant (conjugate symmetry, block pattern, symmetry) is violated."""


class NotPSDError(ValueError):
    """A matrix required to be positive semidefinite is not."""


class DegenerateError(ValueError):
    """A quantity is degenerate (zero variance, zero denominator)."""


class UnsupportedModelError(ValueError):
    """The model is outside what the requested filter supports."""
