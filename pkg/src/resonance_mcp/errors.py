"""Exception hierarchy for the resonance solver.

Every failure mode named by the numerical modules is a subclass of
``ResonanceError``. Errors carry a ``details`` dict so the CLI and the MCP
server can emit a structured report instead of a bare message.
"""

from typing import Any

from .types import ErrorReport

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2


class ResonanceError(Exception):
    """Base class for all solver errors."""

    exit_code: int = EXIT_NUMERICAL

    def __init__(self, message: str, **details: Any) -> None:
        super().__init__(message)
        self.message = message
        self.details = details

    def to_report(self) -> ErrorReport:
        """Build the structured error report written by the CLI.

        Returns:
            ErrorReport with the error class name, message, exit code and details.
        """
        return {
            "error": type(self).__name__,
            "message": self.message,
            "exit_code": self.exit_code,
            "details": {key: _jsonable(value) for key, value in self.details.items()},
        }


class ConfigError(ResonanceError):
    """Malformed run configuration or environment setting."""

    exit_code = EXIT_CONFIG

    def __init__(self, message: str, field: str | None = None, **details: Any) -> None:
        super().__init__(message, field=field, **details)
        self.field = field


# ============================================================================
# Geometry
# ============================================================================


class NonRegularCurve(ResonanceError):
    """Parametrization speed vanishes at a grid node."""


class SceneError(ResonanceError):
    """Scene violates the separation assumptions."""


class OverlapError(SceneError):
    """Two scaled inclusions intersect or touch."""


class BoundaryTooClose(SceneError):
    """An inclusion center is closer to the outer boundary than allowed."""


# ============================================================================
# Kernels and operators
# ============================================================================


class DomainError(ResonanceError):
    """Special function evaluated outside its domain."""


class CoincidentPoints(ResonanceError):
    """Kernel evaluated at x = y."""


class NearSingularSystem(ResonanceError):
    """Boundary system is numerically singular at the requested frequency."""


class IllConditioned(ResonanceError):
    """Second-kind system condition number exceeds its guard."""


class DegenerateContrast(ResonanceError):
    """Background and inclusion contrast coincide."""


class TooCloseToBoundary(ResonanceError):
    """Interior evaluation point is too close to the boundary for the trapezoid rule."""


# ============================================================================
# Eigensolver and asymptotics
# ============================================================================


class ContourThroughPole(ResonanceError):
    """A contour node sits on (or next to) a pole of the inverse."""


class NoConvergence(ResonanceError):
    """Newton refinement did not converge for a candidate."""


class CountMismatch(ResonanceError):
    """Number of perturbed resonances differs from the unperturbed multiplicity."""


class SingularGram(ResonanceError):
    """Dual-basis Gram matrix is numerically singular."""


class AscentMismatch(ResonanceError):
    """Simple-resonance formula requested for a resonance of ascent > 1."""


def _jsonable(value: Any) -> Any:
    """Convert numpy scalars and complex numbers into JSON-friendly values."""
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if hasattr(value, "tolist") and callable(value.tolist):
        return _jsonable(value.tolist())
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    return value
