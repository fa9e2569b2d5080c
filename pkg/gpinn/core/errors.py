"""Exception hierarchy for gpinn.

Every module raises a subclass of :class:`GpinnError` for domain failures
so the CLI can map them to exit codes. Plain argument mistakes still raise
``ValueError``/``IndexError``/``KeyError``.
"""

from __future__ import annotations

from typing import Any


class GpinnError(Exception):
    """Base class for all gpinn domain errors."""


class ConfigError(GpinnError):
    """A configuration is internally inconsistent."""


class MeshParseError(GpinnError):
    """A mesh file could not be parsed in its declared format."""


class MeshValidationError(GpinnError):
    """A mesh violates one of its structural invariants."""

    def __init__(self, message: str, element: int | None = None) -> None:
        super().__init__(message)
        self.element = element


class GeometryError(GpinnError):
    """A geometry configuration cannot be meshed."""


class DisconnectedGraphError(GpinnError):
    """The graph has more than one connected component (lambda2 = 0)."""

    def __init__(self, components: int) -> None:
        super().__init__(
            f"Graph is disconnected ({components} components); Fiedler vector undefined"
        )
        self.components = components


class NoConvergenceError(GpinnError):
    """An iterative solver hit its iteration cap."""

    def __init__(self, message: str, iterations: int, residual: float) -> None:
        super().__init__(f"{message} (iterations={iterations}, residual={residual:.3e})")
        self.iterations = iterations
        self.residual = residual


class NonFiniteLossError(GpinnError):
    """Training produced a NaN or infinite loss."""

    def __init__(self, iteration: int, terms: dict[str, Any]) -> None:
        detail = ", ".join(f"{k}={v:.3e}" for k, v in terms.items())
        super().__init__(f"Non-finite loss at iteration {iteration}: {detail}")
        self.iteration = iteration
        self.terms = terms


class SingularSystemError(GpinnError):
    """A reference FEM system has no unique solution."""


class ProblemMismatchError(GpinnError):
    """Two runs or fields belong to different problem kinds."""


class DegenerateSpectrumWarning(UserWarning):
    """The second Laplacian eigenvalue is numerically repeated."""


# Failures the CLI reports as numerical (exit code 2) rather than user errors.
NUMERICAL_ERRORS: tuple[type[Exception], ...] = (
    NoConvergenceError,
    NonFiniteLossError,
    SingularSystemError,
)
