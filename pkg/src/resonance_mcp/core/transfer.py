"""Transfer operators T(omega), T_eps(omega) and the dual T*(omega).

    T(omega)   = c I - gamma2 D + gamma1 S N
    T_eps      = c I - gamma2 D + gamma1 S N_eps
    T*(omega)  = c I - gamma2 conj(K') + gamma1 N^{conj(omega)} conj(S)

S, D, K' use the gamma2 Helmholtz kernel. The exterior representation with
the normalized kernel gives c = 1/2 ("derived"); ``literal`` keeps the constant
1 - gamma2/2.

Dual operators at -conj(omega) are realized by complex conjugation of the
omega kernel, the continuation for which (S^omega)* = S^{-conj(omega)} holds.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .dtn import DtnMap, SceneGrids, dtn_homogeneous, dtn_perturbed
from .geometry import BoundaryGrid, Scene
from .potentials import assemble_adjoint_double_layer, assemble_double_layer, assemble_single_layer
from .specfun import Kernel

logger = logging.getLogger(__name__)

JumpMode = Literal["derived", "literal"]
TransferVariant = Literal["unperturbed", "perturbed", "dual", "dual_perturbed"]

DERIVED_JUMP = 0.5

MatrixFunction = Callable[[complex], np.ndarray]


def jump_coefficient(gamma2: float, mode: JumpMode = "derived") -> float:
    """Identity coefficient c of the transfer operator."""
    if mode == "derived":
        return DERIVED_JUMP
    if mode == "literal":
        return 1.0 - gamma2 / 2.0
    raise ValueError(f"Unknown jump mode {mode!r}")


@dataclass(frozen=True)
class TransferOperator:
    """Dense transfer operator on the outer grid."""

    matrix: np.ndarray
    omega: complex
    variant: TransferVariant
    jump_mode: JumpMode
    jump: float
    single_layer: np.ndarray  # gamma2 S^omega (or its conjugate for duals)
    dtn: DtnMap

    def apply(self, trace: np.ndarray) -> np.ndarray:
        return self.matrix @ trace


@dataclass(frozen=True)
class _ExteriorBlocks:
    single: np.ndarray
    double: np.ndarray


def _exterior_blocks(grid: BoundaryGrid, omega: complex, gamma2: float) -> _ExteriorBlocks:
    kernel = Kernel.helmholtz(omega, gamma2)
    return _ExteriorBlocks(
        single=assemble_single_layer(grid, grid, kernel).matrix,
        double=assemble_double_layer(grid, grid, kernel).matrix,
    )


def _compose(
    blocks: _ExteriorBlocks, dtn: DtnMap, gamma1: float, gamma2: float, mode: JumpMode
) -> tuple[np.ndarray, float]:
    c = jump_coefficient(gamma2, mode)
    n = blocks.single.shape[0]
    matrix = c * np.eye(n) - gamma2 * blocks.double + gamma1 * blocks.single @ dtn.matrix
    return matrix, c


def assemble_T(
    grid: BoundaryGrid, omega: complex, gamma1: float, gamma2: float, mode: JumpMode = "derived"
) -> TransferOperator:
    """Unperturbed transfer operator.

    Raises:
        NearSingularSystem: Propagated from the interior DtN map.
    """
    dtn = dtn_homogeneous(grid, omega, gamma1)
    blocks = _exterior_blocks(grid, omega, gamma2)
    matrix, c = _compose(blocks, dtn, gamma1, gamma2, mode)
    return TransferOperator(matrix, complex(omega), "unperturbed", mode, c, blocks.single, dtn)


def assemble_T_eps(
    scene: Scene, grids: SceneGrids, omega: complex, mode: JumpMode = "derived"
) -> TransferOperator:
    """Transfer operator with the perturbed DtN map N_eps."""
    dtn = dtn_perturbed(scene, grids, omega)
    blocks = _exterior_blocks(grids.outer, omega, scene.gamma2)
    matrix, c = _compose(blocks, dtn, scene.gamma1, scene.gamma2, mode)
    variant: TransferVariant = "perturbed" if scene.is_perturbed else "unperturbed"
    return TransferOperator(matrix, complex(omega), variant, mode, c, blocks.single, dtn)


def _dual(
    grid: BoundaryGrid,
    omega: complex,
    gamma1: float,
    gamma2: float,
    mode: JumpMode,
    dtn: DtnMap,
    variant: TransferVariant,
) -> TransferOperator:
    kernel = Kernel.helmholtz(omega, gamma2)
    single = np.conj(assemble_single_layer(grid, grid, kernel).matrix)
    adjoint = np.conj(assemble_adjoint_double_layer(grid, grid, kernel).matrix)
    c = jump_coefficient(gamma2, mode)
    matrix = c * np.eye(grid.n) - gamma2 * adjoint + gamma1 * dtn.matrix @ single
    return TransferOperator(matrix, complex(omega), variant, mode, c, single, dtn)


def assemble_T_dual(
    grid: BoundaryGrid, omega: complex, gamma1: float, gamma2: float, mode: JumpMode = "derived"
) -> TransferOperator:
    """Dual T*(omega) with respect to the weighted L2 product on the grid."""
    dtn = dtn_homogeneous(grid, np.conj(omega), gamma1)
    return _dual(grid, omega, gamma1, gamma2, mode, dtn, "dual")


def assemble_T_eps_dual(
    scene: Scene, grids: SceneGrids, omega: complex, mode: JumpMode = "derived"
) -> TransferOperator:
    """Dual of T_eps, using N_eps at conj(omega)."""
    dtn = dtn_perturbed(scene, grids, np.conj(omega))
    return _dual(grids.outer, omega, scene.gamma1, scene.gamma2, mode, dtn, "dual_perturbed")


# ============================================================================
# Matrix functions for the eigensolver
# ============================================================================


def transfer_function(
    grid: BoundaryGrid, gamma1: float, gamma2: float, mode: JumpMode = "derived"
) -> MatrixFunction:
    """omega -> T(omega) matrix."""

    def evaluate(omega: complex) -> np.ndarray:
        return assemble_T(grid, omega, gamma1, gamma2, mode).matrix

    return evaluate


def reflected_transfer_function(T_fn: MatrixFunction) -> MatrixFunction:
    """Continue ``T_fn`` into Re(omega) < 0 from the upper half-plane.

    The principal Hankel branch cuts along the negative real k axis, so the
    third quadrant it reaches is the sheet continued from Re(omega) > 0. The
    physical resonances there are the mirrors of those in Re(omega) > 0:
    T(omega) = conj(T(-conj(omega))). The continuation cuts along the
    negative imaginary axis, and contours must stay on one side of it.
    """

    def evaluate(omega: complex) -> np.ndarray:
        omega = complex(omega)
        if omega.real < 0:
            return np.conj(T_fn(-omega.conjugate()))
        return T_fn(omega)

    return evaluate


def perturbed_transfer_function(
    scene: Scene, grids: SceneGrids, mode: JumpMode = "derived"
) -> MatrixFunction:
    """omega -> T_eps(omega) matrix for a fixed scene."""

    def evaluate(omega: complex) -> np.ndarray:
        return assemble_T_eps(scene, grids, omega, mode).matrix

    return evaluate


# ============================================================================
# Norms and inner products
# ============================================================================


def weighted_adjoint(matrix: np.ndarray, grid: BoundaryGrid) -> np.ndarray:
    """Adjoint W^{-1} A^H W in the quadrature-weighted L2 product."""
    w = grid.ds
    return (np.conj(matrix).T * w[None, :]) / w[:, None]


def sobolev_norm(values: np.ndarray, s: float = 0.5) -> float:
    """Discrete H^s norm on the parameter circle via Fourier weights (1 + m^2)^s."""
    values = np.asarray(values)
    n = values.shape[0]
    coeffs = np.fft.fft(values, axis=0) / n
    modes = np.fft.fftfreq(n, d=1.0 / n)
    weights = (1.0 + modes**2) ** s
    return float(np.sqrt(2.0 * np.pi * np.sum(weights * np.abs(coeffs) ** 2)))


def min_singular_value(matrix: np.ndarray) -> float:
    return float(np.linalg.svd(matrix, compute_uv=False)[-1])


def singular_values_along(
    T_fn: MatrixFunction, omegas: np.ndarray
) -> list[tuple[complex, float, float]]:
    """(omega, sigma_min, sigma_max) of T along a list of frequencies."""
    samples = []
    for omega in np.asarray(omegas, dtype=complex):
        sv = np.linalg.svd(T_fn(complex(omega)), compute_uv=False)
        samples.append((complex(omega), float(sv[-1]), float(sv[0])))
        logger.debug("sigma_min(T(%s)) = %.3e", omega, sv[-1])
    return samples
