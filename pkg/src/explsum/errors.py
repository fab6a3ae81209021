"""Exception hierarchy shared across the package."""

from __future__ import annotations


class ExplsumError(Exception):
    """Base class for all package errors."""


class EmptyMatrixError(ExplsumError):
    """Raised when an input matrix carries no nonzero mass."""


class ShapeError(ExplsumError):
    """Inputs whose shapes or index ranges do not line up."""


class ConfigError(ExplsumError):
    """Invalid configuration value (negative penalty, bad cluster count, ...)."""


class NotFoundError(ExplsumError):
    """Unknown cluster id, entry index, class name or feature name."""

    def __init__(self, message: str, offenders: list[str] | None = None):
        super().__init__(message)
        self.offenders = offenders or []


class ZeroMassError(ExplsumError):
    """A cluster with zero probability mass was used where mass is required."""


class InfiniteDivergenceError(ExplsumError):
    """KL divergence is infinite: p has mass where q has none."""


class UnmappedFeatureError(ExplsumError):
    """Word/feature columns without a topic assignment."""

    def __init__(self, offenders: list[str]):
        super().__init__(f"unmapped feature columns: {', '.join(offenders)}")
        self.offenders = offenders


class ZeroDegreeError(ExplsumError):
    """A zero-degree row/column reached degree normalization (bug guard)."""


class ConvergenceError(ExplsumError):
    """Iterative numerical routine failed to converge within its budget."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class EmptyPoolError(ExplsumError):
    """random_pop was asked to draw from an empty active list."""


class IterationCapError(ExplsumError):
    """Engine exceeded max_iterations; carries the partial result."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class TooLargeError(ExplsumError):
    """Input exceeds a hard size bound (e.g. brute-force enumeration)."""
