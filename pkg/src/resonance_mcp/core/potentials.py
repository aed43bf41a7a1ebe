"""Nyström assembly of boundary integral operators.

Self-interaction blocks use Kress' logarithmic splitting: the parametrized
kernel is written as ``K1(t, s) log(4 sin^2((t - s) / 2)) + K2(t, s)`` with
smooth K1, K2; the log part is integrated exactly against the trigonometric
interpolant, the smooth part with the trapezoid rule. Blocks between distinct
grids use the trapezoid rule directly.

Conventions (checked by the Gauss identity, D[1] = -1/2 for Laplace):
- ``D`` is the principal value of the double layer with kernel d/d(nu_y) G.
- Interior trace of the double layer potential: ``D - 1/(2 gamma)``;
  exterior trace: ``D + 1/(2 gamma)``.
- ``K'`` (adjoint double layer) has kernel d/d(nu_x) G. For Laplace this is
  the negative of the classical Neumann-Poincare operator.
"""

import logging
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import special
from scipy.linalg import circulant

from .geometry import BoundaryGrid
from .specfun import EULER_GAMMA, Kernel, green, green_gradient_x, green_gradient_y

logger = logging.getLogger(__name__)

MIN_SELF_NODES = 16


@dataclass(frozen=True)
class BoundaryOperator:
    """Dense discretized integral operator from ``source`` to ``target`` nodes."""

    matrix: np.ndarray
    source: str
    target: str
    kernel: Kernel
    kind: str

    @property
    def omega(self) -> complex:
        return self.kernel.omega

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def apply(self, density: np.ndarray) -> np.ndarray:
        return self.matrix @ density

    def conj(self) -> "BoundaryOperator":
        """Operator with complex-conjugated kernel."""
        return replace(self, matrix=_readonly(np.conj(self.matrix)), kind=f"conj({self.kind})")


def _readonly(matrix: np.ndarray) -> np.ndarray:
    matrix = np.ascontiguousarray(matrix)
    matrix.setflags(write=False)
    return matrix


@lru_cache(maxsize=16)
def kress_weights(n_nodes: int) -> np.ndarray:
    """Matrix R with R[i, j] = R_j(t_i) for the exact log-kernel quadrature.

    R_j(t) = -(2 pi / n) sum_{m=1}^{n-1} cos(m (t - t_j)) / m - (pi / n^2) cos(n (t - t_j)),
    with n = n_nodes / 2.
    """
    n = n_nodes // 2
    d = np.arange(n_nodes)
    m = np.arange(1, n)
    column = -(2.0 * np.pi / n) * np.sum(np.cos(np.outer(d, m) * np.pi / n) / m, axis=1)
    column -= (np.pi / n**2) * np.cos(np.pi * d)
    weights = circulant(column)
    weights.setflags(write=False)
    return weights


def _is_self(src: BoundaryGrid, tgt: BoundaryGrid) -> bool:
    return src is tgt or (src.n == tgt.n and np.array_equal(src.nodes, tgt.nodes))


def _check_self(grid: BoundaryGrid, kernel: Kernel) -> None:
    if grid.n < MIN_SELF_NODES:
        raise ValueError(f"Self-interaction blocks need at least {MIN_SELF_NODES} nodes, got {grid.n}")
    if kernel.family == "anisotropic2d":
        raise ValueError(
            "Self-interaction blocks of the anisotropic kernel are assembled on the "
            "transformed grid (curve.linear_map) with the Helmholtz kernel"
        )


def _pairwise(grid: BoundaryGrid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Differences x(t_i) - x(t_j), distances and log(4 sin^2((t_i - t_j)/2)) off the diagonal."""
    diff = grid.nodes[:, None, :] - grid.nodes[None, :, :]
    r = np.sqrt(np.sum(diff**2, axis=-1))
    np.fill_diagonal(r, 1.0)
    dt = grid.t[:, None] - grid.t[None, :]
    log_sin = np.log(4.0 * np.sin(dt / 2.0) ** 2 + np.eye(grid.n))
    return diff, r, log_sin


# ============================================================================
# Single layer
# ============================================================================


def assemble_single_layer(src: BoundaryGrid, tgt: BoundaryGrid, kernel: Kernel) -> BoundaryOperator:
    """Discrete single layer S[phi](x) = int G(x, y) phi(y) ds_y.

    Args:
        src: Grid carrying the density.
        tgt: Grid of evaluation points.
        kernel: Fundamental solution.

    Returns:
        BoundaryOperator of shape (tgt.n, src.n).
    """
    if not _is_self(src, tgt):
        matrix = green(kernel, tgt.nodes[:, None, :], src.nodes[None, :, :]) * src.ds[None, :]
        return BoundaryOperator(_readonly(np.asarray(matrix, dtype=complex)), src.label, tgt.label, kernel, "single")

    _check_self(src, kernel)
    grid = src
    n = grid.n
    _, r, log_sin = _pairwise(grid)
    speed = grid.speed[None, :]
    h = 2.0 * np.pi / n
    gamma = kernel.gamma

    if kernel.family == "laplace2d":
        m1 = np.full((n, n), -1.0 / (4.0 * np.pi * gamma)) * speed
        m2 = -(np.log(r**2) - log_sin) / (4.0 * np.pi * gamma) * speed
        np.fill_diagonal(m2, -np.log(grid.speed) * grid.speed / (2.0 * np.pi * gamma))
    else:
        k = kernel.wavenumber
        kr = k * r
        m1 = -special.jv(0, kr) / (4.0 * np.pi * gamma) * speed
        full = 0.25j / gamma * special.hankel1(0, kr) * speed
        m2 = full - m1 * log_sin
        np.fill_diagonal(m1, -grid.speed / (4.0 * np.pi * gamma))
        diag = (
            0.25j
            - EULER_GAMMA / (2.0 * np.pi)
            - np.log(k * grid.speed / 2.0) / (2.0 * np.pi)
        ) * grid.speed / gamma
        np.fill_diagonal(m2, diag)

    matrix = kress_weights(n) * m1 + h * m2
    logger.debug("Assembled single layer on %s (%s)", grid.label, kernel.describe())
    return BoundaryOperator(_readonly(matrix.astype(complex)), grid.label, grid.label, kernel, "single")


# ============================================================================
# Double layer and its adjoint
# ============================================================================


def _double_layer_self(grid: BoundaryGrid, kernel: Kernel, adjoint: bool) -> np.ndarray:
    n = grid.n
    diff, r, log_sin = _pairwise(grid)
    h = 2.0 * np.pi / n
    gamma = kernel.gamma
    if adjoint:
        # n(t) . (x(t) - x(s)) |x'(s)| / |x'(t)|, with n(t) the unnormalized normal at the target
        scaled_normal = grid.normals * grid.speed[:, None]
        d = np.einsum("ijk,ik->ij", diff, scaled_normal) * (grid.speed[None, :] / grid.speed[:, None])
        sign = -1.0
    else:
        scaled_normal = grid.normals * grid.speed[:, None]
        d = np.einsum("ijk,jk->ij", diff, scaled_normal)
        sign = 1.0
    diagonal = grid.curvature_term / (4.0 * np.pi * gamma)

    if kernel.family == "laplace2d":
        full = sign * d / (2.0 * np.pi * gamma * r**2)
        np.fill_diagonal(full, diagonal)
        return h * full

    k = kernel.wavenumber
    kr = k * r
    full = sign * 0.25j * k / gamma * special.hankel1(1, kr) * d / r
    l1 = -sign * k / (4.0 * np.pi * gamma) * special.jv(1, kr) * d / r
    l2 = full - l1 * log_sin
    np.fill_diagonal(l1, 0.0)
    np.fill_diagonal(l2, diagonal)
    return kress_weights(n) * l1 + h * l2


def assemble_double_layer(src: BoundaryGrid, tgt: BoundaryGrid, kernel: Kernel) -> BoundaryOperator:
    """Discrete double layer D[f](x) = int d/d(nu_y) G(x, y) f(y) ds_y (principal value on the curve)."""
    if not _is_self(src, tgt):
        grad = green_gradient_y(kernel, tgt.nodes[:, None, :], src.nodes[None, :, :])
        matrix = np.einsum("ijk,jk->ij", grad, src.normals) * src.ds[None, :]
        return BoundaryOperator(_readonly(matrix.astype(complex)), src.label, tgt.label, kernel, "double")
    _check_self(src, kernel)
    matrix = _double_layer_self(src, kernel, adjoint=False)
    logger.debug("Assembled double layer on %s (%s)", src.label, kernel.describe())
    return BoundaryOperator(_readonly(matrix.astype(complex)), src.label, tgt.label, kernel, "double")


def assemble_adjoint_double_layer(src: BoundaryGrid, tgt: BoundaryGrid, kernel: Kernel) -> BoundaryOperator:
    """Discrete adjoint double layer K'[g](x) = int d/d(nu_x) G(x, y) g(y) ds_y."""
    if not _is_self(src, tgt):
        grad = green_gradient_x(kernel, tgt.nodes[:, None, :], src.nodes[None, :, :])
        matrix = np.einsum("ijk,ik->ij", grad, tgt.normals) * src.ds[None, :]
        return BoundaryOperator(_readonly(matrix.astype(complex)), src.label, tgt.label, kernel, "adjoint_double")
    _check_self(src, kernel)
    matrix = _double_layer_self(src, kernel, adjoint=True)
    return BoundaryOperator(_readonly(matrix.astype(complex)), src.label, tgt.label, kernel, "adjoint_double")


def assemble_neumann_poincare(grid: BoundaryGrid) -> BoundaryOperator:
    """Laplace adjoint double layer K' (gamma = 1) used by the polarization solver."""
    return assemble_adjoint_double_layer(grid, grid, Kernel.laplace(1.0))


# ============================================================================
# Certificates
# ============================================================================


def smooth_test_densities(grid: BoundaryGrid, max_mode: int = 3) -> np.ndarray:
    """Columns cos(m t), sin(m t) for m <= max_mode plus exp(cos t)."""
    columns = [np.cos(m * grid.t) for m in range(max_mode + 1)]
    columns += [np.sin(m * grid.t) for m in range(1, max_mode + 1)]
    columns.append(np.exp(np.cos(grid.t)))
    return np.stack(columns, axis=1).astype(complex)


def calderon_residual(grid: BoundaryGrid, kernel: Kernel) -> float:
    """Residual of the Calderon identity S K' = D S on smooth densities.

    Returns:
        max over test densities phi of ||S K' phi - D S phi||_inf / ||phi||_inf.
    """
    single = assemble_single_layer(grid, grid, kernel).matrix
    double = assemble_double_layer(grid, grid, kernel).matrix
    adjoint = assemble_adjoint_double_layer(grid, grid, kernel).matrix
    phi = smooth_test_densities(grid)
    diff = single @ (adjoint @ phi) - double @ (single @ phi)
    scale = np.max(np.abs(phi), axis=0)
    residual = float(np.max(np.max(np.abs(diff), axis=0) / scale))
    logger.debug("Calderon residual on %s (%s): %.3e", grid.label, kernel.describe(), residual)
    return residual
