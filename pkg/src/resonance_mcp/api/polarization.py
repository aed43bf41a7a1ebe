"""Polarization Tensor API Tools."""

import asyncio
from typing import Any

from ..config import RunConfig, curve_from_dict
from ..core.geometry import ParametricCurve, build_grid
from ..core.polarization import compute_polarization
from ..errors import ConfigError
from ..schema import CONTRAST_MODES
from ..types import PolarizationRecord


def polarization_from_config(config: RunConfig) -> list[PolarizationRecord]:
    """Tensors for every configured polarization job."""
    records = []
    for i, job in enumerate(config.polarization):
        grid = build_grid(job.shape, job.n_grid, label=f"polarization{i}")
        tensor = compute_polarization(grid, job.gamma_bg, job.trace_gamma_d, config.contrast)
        records.append(tensor.to_record())
    return records


async def compute_polarization_tensor(
    shape: dict[str, Any] | None = None,
    gamma_bg: float = 1.0,
    trace_gamma_d: float = 3.0,
    contrast: str = "trace",
    n_grid: int = 128,
) -> PolarizationRecord:
    """Compute the polarization tensor of an inclusion shape.

    Args:
        shape: Curve description, e.g. {"kind": "ellipse", "semi_axes": [1.0, 0.5]}
            (unit circle when omitted). Kinds: circle, ellipse, kite, star.
        gamma_bg: Background conductivity.
        trace_gamma_d: Trace of the inclusion material matrix.
        contrast: "trace" uses tr(gamma_D) as the scalar contrast, "mean" uses tr(gamma_D)/2.
        n_grid: Boundary nodes (even, >= 16).

    Returns:
        PolarizationRecord with entries m11, m12, m21, m22 and a quadrature error estimate.

    Example:
        >>> record = await compute_polarization_tensor(gamma_bg=1.0, trace_gamma_d=3.0)
        >>> print(record["m11"])  # 3*pi/2 for the unit disk
    """
    if contrast not in CONTRAST_MODES:
        raise ConfigError(f"contrast must be one of {CONTRAST_MODES}", field="contrast")
    if n_grid < 16 or n_grid % 2:
        raise ConfigError("n_grid must be an even integer >= 16", field="n_grid")
    if not gamma_bg > 0 or not trace_gamma_d > 0:
        raise ConfigError("Conductivities must be positive", field="gamma_bg")
    curve = ParametricCurve.circle() if shape is None else curve_from_dict(shape)

    def solve() -> PolarizationRecord:
        grid = build_grid(curve, n_grid, label="polarization", check_simple=True)
        return compute_polarization(grid, gamma_bg, trace_gamma_d, contrast).to_record()

    return await asyncio.to_thread(solve)
