"""Type definitions for the resonance MCP server and CLI outputs.

Complex numbers are always split into ``*_re`` / ``*_im`` fields so every
record maps one-to-one onto a CSV row.
"""

import sys
from typing import Any

# pydantic (via fastmcp) requires typing_extensions.TypedDict before 3.12.
if sys.version_info >= (3, 12):
    from typing import NotRequired, TypedDict
else:
    from typing_extensions import NotRequired, TypedDict

# ============================================================================
# Resonance Types
# ============================================================================


class ResonanceRecord(TypedDict):
    """One converged resonance, as written to resonances.csv."""

    lambda_re: float
    lambda_im: float
    multiplicity: int  # geometric
    algebraic_count: int
    ascent: int
    residual: float  # sigma_min(T(lambda)) / ||T(lambda)||
    newton_iterations: int
    n_outer: int
    tolerance: float


class DispersionRoot(TypedDict):
    """Root of the disk dispersion relation for one Fourier mode."""

    mode: int
    omega_re: float
    omega_im: float
    residual: float


class SingularValueSample(TypedDict):
    """Smallest singular value of T(omega) at one frequency."""

    omega_re: float
    omega_im: float
    sigma_min: float
    sigma_max: float


# ============================================================================
# Polarization Types
# ============================================================================


class PolarizationRecord(TypedDict):
    """Polarization tensor entries with provenance, as written to polarization.csv."""

    shape: str
    gamma_bg: float
    trace_gamma_d: float
    contrast: str  # "trace" or "mean"
    m11: float
    m12: float
    m21: float
    m22: float
    n_grid: int
    quadrature_error: float


# ============================================================================
# Sweep Types
# ============================================================================


class SweepRow(TypedDict):
    """Tracked resonance against its asymptotic prediction at one epsilon."""

    epsilon: float
    branch: int
    lambda_re: float
    lambda_im: float
    shift_re: float
    shift_im: float
    predicted_re: float
    predicted_im: float
    residual: float  # |measured - predicted|
    scaled_residual: float  # residual / epsilon**2
    operator_difference: float  # ||(T_eps - T) f|| in the discrete H^1/2 norm
    n_outer: int
    tolerance: float


class SweepSummary(TypedDict):
    """Fitted slopes over an epsilon sweep."""

    shift_slope: float
    residual_slope: float
    operator_slope: float
    dual_operator_slope: float
    expansion_residual_slope: NotRequired[float]


# ============================================================================
# Validation Types
# ============================================================================


class ValidationCheck(TypedDict):
    """Outcome of one invariant check in the validation suite."""

    name: str
    passed: bool
    value: float
    threshold: float
    detail: NotRequired[str]


# ============================================================================
# Run Artifacts
# ============================================================================


class Manifest(TypedDict):
    """Provenance written next to every CSV artifact."""

    schema_version: int
    task: str
    package_version: str
    numpy_version: str
    scipy_version: str
    seed: int
    thresholds: dict[str, float]
    config: dict[str, Any]
    artifacts: list[str]
    elapsed_seconds: float


class HealthStatus(TypedDict):
    """Health check response of the MCP server."""

    status: str
    server: str
    version: str
    settings: NotRequired[dict[str, Any]]
    error: NotRequired[str]
    message: NotRequired[str]


# ============================================================================
# Error Types
# ============================================================================


class ErrorReport(TypedDict):
    """Structured error report emitted on failure."""

    error: str
    message: str
    exit_code: int
    details: dict[str, Any]
