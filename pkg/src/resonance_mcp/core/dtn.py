"""Interior Dirichlet-to-Neumann maps.

``dtn_homogeneous`` solves the interior Calderon equation
``S q = (D + 1/(2 gamma1)) f`` with the gamma1 Helmholtz kernel.

``dtn_perturbed`` uses a direct multi-domain Green formulation. With the
kernel ``Phi = (i/4) H0(k1 r)`` (k1 = omega / sqrt(gamma1)) in the background
and, inside each inclusion, the Helmholtz kernel of wavenumber omega on the
transformed curve ``xi = A^{-1/2} x``, the unknowns are the outer Neumann
trace q0 and, per inclusion, the Dirichlet trace u_i and the conormal flux
p_i = gamma1 * d/dnu v^+ on dD_i:

    S_00 q0 - sum_j S_0j p_j / gamma1 + sum_j D_0j u_j            = (D_00 + 1/2) f
    S_i0 q0 - sum_j S_ij p_j / gamma1 + sum_j D_ij u_j - u_i / 2  = D_i0 f
    S^xi_i diag(1 / s_i) p_i - (D^xi_i + 1/2) u_i                 = 0

where s_i = |A^{1/2} nu| rescales the conormal flux to the normal derivative
in xi coordinates.
"""

import logging
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.linalg as la

from ..errors import NearSingularSystem
from .geometry import BoundaryGrid, Scene, build_grid
from .potentials import assemble_double_layer, assemble_single_layer
from .specfun import Kernel

logger = logging.getLogger(__name__)

DtnVariant = Literal["homogeneous", "perturbed"]
SINGULAR_FLOOR = 1e-10


@dataclass(frozen=True)
class DtnMap:
    """Discrete map from Dirichlet to Neumann traces on the outer grid."""

    matrix: np.ndarray
    omega: complex
    variant: DtnVariant
    grid: str
    min_singular_value: float
    diagnostics: dict[str, float] = field(default_factory=dict)

    def apply(self, trace: np.ndarray) -> np.ndarray:
        return self.matrix @ trace


def _min_singular_value(matrix: np.ndarray) -> float:
    return float(la.svdvals(matrix)[-1])


def dtn_homogeneous(
    grid: BoundaryGrid, omega: complex, gamma1: float, floor: float = SINGULAR_FLOOR
) -> DtnMap:
    """DtN map of ``gamma1 * Laplace + omega^2`` on the interior of ``grid``.

    Raises:
        NearSingularSystem: If omega^2 / gamma1 is (close to) an interior Dirichlet eigenvalue.
    """
    kernel = Kernel.helmholtz(omega, gamma1)
    single = assemble_single_layer(grid, grid, kernel).matrix
    double = assemble_double_layer(grid, grid, kernel).matrix
    sigma_min = _min_singular_value(single)
    if sigma_min < floor:
        raise NearSingularSystem(
            "Single layer is singular: omega is close to an interior Dirichlet eigenvalue",
            omega=complex(omega),
            sigma_min=sigma_min,
        )
    rhs = double + np.eye(grid.n) / (2.0 * gamma1)
    matrix = la.lu_solve(la.lu_factor(single), rhs)
    logger.debug("Homogeneous DtN at omega=%s: sigma_min(S)=%.3e", omega, sigma_min)
    return DtnMap(
        matrix=matrix,
        omega=complex(omega),
        variant="homogeneous",
        grid=grid.label,
        min_singular_value=sigma_min,
    )


# ============================================================================
# Perturbed interior
# ============================================================================


@dataclass(frozen=True)
class SceneGrids:
    """Grids for every boundary of a scene at its current epsilon."""

    outer: BoundaryGrid
    inclusions: tuple[BoundaryGrid, ...]
    transformed: tuple[BoundaryGrid, ...]  # A^{-1/2} dD_i, node-by-node with ``inclusions``
    flux_scales: tuple[np.ndarray, ...]  # |A^{1/2} nu| at the inclusion nodes


def _matrix_power(matrix: np.ndarray, power: float) -> np.ndarray:
    values, vectors = np.linalg.eigh(matrix)
    return (vectors * values**power) @ vectors.T


def build_scene_grids(
    scene: Scene, n_outer: int, n_inclusion: int, outer: BoundaryGrid | None = None
) -> SceneGrids:
    """Discretize the outer boundary and every scaled inclusion of ``scene``."""
    outer = outer if outer is not None else build_grid(scene.outer, n_outer, label="outer")
    if scene.epsilon == 0:
        return SceneGrids(outer=outer, inclusions=(), transformed=(), flux_scales=())

    inclusions, transformed, scales = [], [], []
    for j, (spec, curve) in enumerate(zip(scene.inclusions, scene.inclusion_curves())):
        grid = build_grid(curve, n_inclusion, label=f"inclusion{j}")
        gamma = spec.gamma_matrix
        xi_curve = curve.linear_map(_matrix_power(gamma, -0.5))
        xi_grid = build_grid(xi_curve, n_inclusion, label=f"inclusion{j}:xi")
        scale = np.linalg.norm(grid.normals @ _matrix_power(gamma, 0.5).T, axis=1)
        inclusions.append(grid)
        transformed.append(xi_grid)
        scales.append(scale)
    return SceneGrids(
        outer=outer,
        inclusions=tuple(inclusions),
        transformed=tuple(transformed),
        flux_scales=tuple(scales),
    )


def dtn_perturbed(
    scene: Scene, grids: SceneGrids, omega: complex, floor: float = SINGULAR_FLOOR
) -> DtnMap:
    """DtN map of ``div(gamma_eps grad) + omega^2`` on the outer grid.

    Args:
        scene: Validated scene; epsilon = 0 reduces to the homogeneous map.
        grids: Grids from ``build_scene_grids`` for the same scene.
        omega: Complex frequency.
        floor: Smallest admissible singular value of the block system.

    Returns:
        DtnMap with variant "perturbed" (or "homogeneous" when epsilon = 0).

    Raises:
        NearSingularSystem: If the block system is numerically singular.
    """
    if not scene.is_perturbed:
        return dtn_homogeneous(grids.outer, omega, scene.gamma1, floor=floor)

    gamma1 = scene.gamma1
    k1 = omega / np.sqrt(gamma1)
    background = Kernel.helmholtz(k1, 1.0)
    interior = Kernel.helmholtz(omega, 1.0)
    boundaries = (grids.outer, *grids.inclusions)
    sizes = [g.n for g in boundaries]
    n0 = sizes[0]
    m = len(grids.inclusions)

    # unknown layout: q0 | u_1 p_1 | u_2 p_2 | ...
    u_offsets = [n0 + 2 * sum(sizes[1 : i + 1]) for i in range(m)]
    p_offsets = [u + sizes[i + 1] for i, u in enumerate(u_offsets)]
    row_offsets = [0] + [n0 + sum(sizes[1 : i + 1]) for i in range(m)]
    c_offset = n0 + sum(sizes[1:])
    total = n0 + 2 * sum(sizes[1:])
    system = np.zeros((total, total), dtype=complex)
    rhs = np.zeros((total, n0), dtype=complex)

    for a, tgt in enumerate(boundaries):
        rows = slice(row_offsets[a], row_offsets[a] + tgt.n)
        system[rows, 0:n0] = assemble_single_layer(grids.outer, tgt, background).matrix
        d_outer = assemble_double_layer(grids.outer, tgt, background).matrix
        rhs[rows] = d_outer + (0.5 * np.eye(n0) if a == 0 else 0.0)
        for j, src in enumerate(grids.inclusions):
            single = assemble_single_layer(src, tgt, background).matrix
            double = assemble_double_layer(src, tgt, background).matrix
            if a == j + 1:
                double = double - 0.5 * np.eye(src.n)
            system[rows, u_offsets[j] : u_offsets[j] + src.n] = double
            system[rows, p_offsets[j] : p_offsets[j] + src.n] = -single / gamma1

    for i, (xi_grid, scale) in enumerate(zip(grids.transformed, grids.flux_scales)):
        rows = slice(c_offset + sum(sizes[1 : i + 1]), c_offset + sum(sizes[1 : i + 2]))
        single = assemble_single_layer(xi_grid, xi_grid, interior).matrix
        double = assemble_double_layer(xi_grid, xi_grid, interior).matrix
        system[rows, p_offsets[i] : p_offsets[i] + xi_grid.n] = single / scale[None, :]
        system[rows, u_offsets[i] : u_offsets[i] + xi_grid.n] = -(double + 0.5 * np.eye(xi_grid.n))

    sigma_min = _min_singular_value(system)
    if sigma_min < floor:
        raise NearSingularSystem(
            "Multi-domain system is singular at this frequency",
            omega=complex(omega),
            sigma_min=sigma_min,
            epsilon=scene.epsilon,
        )
    solution = la.lu_solve(la.lu_factor(system), rhs)
    logger.debug(
        "Perturbed DtN at omega=%s, eps=%g: %d unknowns, sigma_min=%.3e",
        omega,
        scene.epsilon,
        total,
        sigma_min,
    )
    return DtnMap(
        matrix=solution[:n0],
        omega=complex(omega),
        variant="perturbed",
        grid=grids.outer.label,
        min_singular_value=sigma_min,
        diagnostics={"unknowns": float(total), "inclusions": float(m)},
    )
