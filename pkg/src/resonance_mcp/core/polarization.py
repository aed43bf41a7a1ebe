"""Polarization tensors of a single inclusion shape.

The transmission problem for phi_l (harmonic inside and outside B,
continuous, decaying, with ``gamma d/dnu phi^+ - tau d/dnu phi^- = -tau nu_l``)
is solved with the single layer ansatz phi_l = S[psi_l]. With K' the Laplace
adjoint double layer of ``potentials`` (kernel d/d(nu_x) G, G = -log r / (2 pi)):

    (lambda_c I - K') psi_l = tau / (gamma - tau) nu_l,
    lambda_c = (gamma + tau) / (2 (gamma - tau)),
    d/dnu phi_l^+ = (-1/2 I + K') psi_l,

and the tensor is M_jl = |B| delta_jl + (gamma / tau - 1) int y_j d/dnu phi_l^+.
For the unit disk this gives M = 2 pi tau / (gamma + tau) I.
"""

import logging
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np
import scipy.linalg as la

from ..errors import DegenerateContrast, IllConditioned
from ..types import PolarizationRecord
from .geometry import BoundaryGrid, build_grid
from .potentials import assemble_neumann_poincare

logger = logging.getLogger(__name__)

ContrastMode = Literal["trace", "mean"]

# -1/2 on the outside trace of our single layer: d/dnu S[psi]^+ = (NP_EXTERIOR_JUMP I + K') psi
NP_EXTERIOR_JUMP = -0.5
DEGENERATE_CONTRAST = 1e-12
CONDITION_LIMIT = 1e12
SPACE_DIMENSION = 2


@dataclass(frozen=True)
class PolarizationTensor:
    """Symmetric 2x2 tensor with its provenance."""

    matrix: np.ndarray
    shape: str
    gamma_bg: float
    trace_gamma_d: float
    contrast: ContrastMode
    n_grid: int
    quadrature_error: float
    area: float
    mean_density: float = 0.0  # max_l |int psi_l ds|

    @property
    def effective_contrast(self) -> float:
        return effective_contrast(self.trace_gamma_d, self.contrast)

    def to_record(self) -> PolarizationRecord:
        m = self.matrix
        return {
            "shape": self.shape,
            "gamma_bg": self.gamma_bg,
            "trace_gamma_d": self.trace_gamma_d,
            "contrast": self.contrast,
            "m11": float(m[0, 0]),
            "m12": float(m[0, 1]),
            "m21": float(m[1, 0]),
            "m22": float(m[1, 1]),
            "n_grid": self.n_grid,
            "quadrature_error": float(self.quadrature_error),
        }


def effective_contrast(trace_gamma_d: float, contrast: ContrastMode = "trace") -> float:
    """Scalar inclusion conductivity: tr(gamma_D) or tr(gamma_D) / n."""
    if contrast == "trace":
        return trace_gamma_d
    if contrast == "mean":
        return trace_gamma_d / SPACE_DIMENSION
    raise ValueError(f"Unknown contrast mode {contrast!r}")


def _tensor(grid: BoundaryGrid, gamma_bg: float, tau: float) -> tuple[np.ndarray, float]:
    area = grid.area
    if tau == gamma_bg:
        return area * np.eye(2), 0.0
    if abs(gamma_bg - tau) < DEGENERATE_CONTRAST:
        raise DegenerateContrast(
            "Background and inclusion contrast coincide", gamma_bg=gamma_bg, tau=tau
        )
    lambda_c = (gamma_bg + tau) / (2.0 * (gamma_bg - tau))
    np_operator = assemble_neumann_poincare(grid).matrix.real
    system = lambda_c * np.eye(grid.n) - np_operator
    condition = np.linalg.cond(system)
    if condition > CONDITION_LIMIT:
        raise IllConditioned(
            "Neumann-Poincare system is ill-conditioned", condition=float(condition), lambda_c=lambda_c
        )
    rhs = tau / (gamma_bg - tau) * grid.normals
    psi = la.solve(system, rhs)
    flux = NP_EXTERIOR_JUMP * psi + np_operator @ psi
    moments = (grid.nodes * grid.ds[:, None]).T @ flux  # [j, l] = int y_j flux_l
    matrix = area * np.eye(2) + (gamma_bg / tau - 1.0) * moments
    mean_density = float(np.max(np.abs(grid.ds @ psi)))
    return matrix, mean_density


def compute_polarization(
    grid: BoundaryGrid,
    gamma_bg: float,
    trace_gamma_d: float,
    contrast: ContrastMode = "trace",
    estimate_error: bool = True,
) -> PolarizationTensor:
    """Polarization tensor of the shape discretized by ``grid``.

    Args:
        grid: Grid on the reference shape B.
        gamma_bg: Background conductivity at the inclusion.
        trace_gamma_d: tr(gamma_D) of the inclusion material.
        contrast: "trace" uses tr(gamma_D) as the scalar contrast, "mean" uses tr(gamma_D)/2.
        estimate_error: Also solve on the half-size grid and report the difference.

    Returns:
        PolarizationTensor.

    Raises:
        DegenerateContrast: If the contrasts differ by less than 1e-12 without being equal.
        IllConditioned: If the second-kind system condition exceeds 1e12.
    """
    if gamma_bg <= 0 or trace_gamma_d <= 0:
        raise ValueError("Conductivities must be positive")
    tau = effective_contrast(trace_gamma_d, contrast)
    matrix, mean_density = _tensor(grid, gamma_bg, tau)

    error = 0.0
    if estimate_error and tau != gamma_bg and grid.n >= 32 and grid.n % 4 == 0:
        coarse = build_grid(grid.curve, grid.n // 2, label=f"{grid.label}:coarse")
        coarse_matrix, _ = _tensor(coarse, gamma_bg, tau)
        error = float(np.max(np.abs(coarse_matrix - matrix)))

    logger.debug("Polarization tensor of %s (tau=%g): %s", grid.label, tau, matrix.tolist())
    return PolarizationTensor(
        matrix=matrix,
        shape=grid.curve.shape_id,
        gamma_bg=float(gamma_bg),
        trace_gamma_d=float(trace_gamma_d),
        contrast=contrast,
        n_grid=grid.n,
        quadrature_error=error,
        area=grid.area,
        mean_density=mean_density,
    )


def polarization_shape_scaling(tensor: PolarizationTensor, s: float) -> PolarizationTensor:
    """Tensor of the dilated shape sB: M(sB) = s^2 M(B)."""
    if not s > 0:
        raise ValueError(f"Scale must be positive, got {s}")
    if s == 1:
        return tensor
    return replace(
        tensor,
        matrix=s**2 * tensor.matrix,
        shape=f"{tensor.shape}x{s:g}",
        area=s**2 * tensor.area,
        quadrature_error=s**2 * tensor.quadrature_error,
    )
