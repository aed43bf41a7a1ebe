"""Bessel/Hankel evaluation and fundamental solutions.

Normalization: every kernel G solves ``(gamma * Laplace + omega^2) G = -delta``
with outgoing behaviour, so the 2D Helmholtz kernel is
``(i / (4 gamma)) H0(k r)`` with ``k = omega / sqrt(gamma)``.
"""

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import special

from ..errors import CoincidentPoints, DomainError

logger = logging.getLogger(__name__)

KernelFamily = Literal["helmholtz2d", "laplace2d", "anisotropic2d"]

EULER_GAMMA = float(np.euler_gamma)
_COINCIDENT = 1e-300


def hankel1(order: int, z: complex | np.ndarray) -> complex | np.ndarray:
    """Hankel function of the first kind on the principal branch.

    Raises:
        DomainError: If order is negative or z = 0.
    """
    if order < 0:
        raise DomainError(f"Hankel order must be non-negative, got {order}", order=order)
    z_arr = np.asarray(z, dtype=complex)
    if np.any(z_arr == 0):
        raise DomainError("Hankel function is singular at z = 0", order=order)
    return special.hankel1(order, z)


def hankel1_derivative(order: int, z: complex | np.ndarray, n: int = 1) -> complex | np.ndarray:
    """n-th derivative of H^(1)_order."""
    if np.any(np.asarray(z, dtype=complex) == 0):
        raise DomainError("Hankel function is singular at z = 0", order=order)
    return special.h1vp(order, z, n)


def bessel_j(order: int, z: complex | np.ndarray, n: int = 0) -> complex | np.ndarray:
    """J_order or its n-th derivative."""
    return special.jv(order, z) if n == 0 else special.jvp(order, z, n)


def wronskian_residual(order: int, z: complex | np.ndarray) -> np.ndarray:
    """|J Y' - J' Y - 2 / (pi z)|, an identity-based accuracy certificate."""
    z = np.asarray(z, dtype=complex)
    j, dj = special.jv(order, z), special.jvp(order, z)
    y, dy = special.yv(order, z), special.yvp(order, z)
    return np.abs(j * dy - dj * y - 2.0 / (np.pi * z))


# ============================================================================
# Kernels
# ============================================================================


@dataclass(frozen=True)
class Kernel:
    """Fundamental solution descriptor."""

    family: KernelFamily
    omega: complex = 0.0
    gamma: float = 1.0
    anisotropy: tuple[float, float, float, float] | None = None

    def __post_init__(self) -> None:
        if self.family not in ("helmholtz2d", "laplace2d", "anisotropic2d"):
            raise ValueError(f"Unknown kernel family {self.family!r}")
        if self.gamma <= 0:
            raise ValueError("Kernel conductivity gamma must be positive")
        if self.family == "helmholtz2d" and self.omega == 0:
            raise ValueError("Helmholtz kernel needs omega != 0; use the laplace2d family")
        if self.family == "anisotropic2d":
            if self.anisotropy is None:
                raise ValueError("anisotropic2d kernel needs an anisotropy matrix")
            if self.omega == 0:
                raise ValueError("anisotropic2d kernel needs omega != 0")
            matrix = self.anisotropy_matrix
            if not np.allclose(matrix, matrix.T) or np.linalg.eigvalsh(matrix).min() <= 0:
                raise ValueError("Anisotropy matrix must be symmetric positive definite")

    @classmethod
    def helmholtz(cls, omega: complex, gamma: float = 1.0) -> "Kernel":
        return cls(family="helmholtz2d", omega=complex(omega), gamma=gamma)

    @classmethod
    def laplace(cls, gamma: float = 1.0) -> "Kernel":
        return cls(family="laplace2d", gamma=gamma)

    @classmethod
    def anisotropic(cls, omega: complex, matrix: np.ndarray) -> "Kernel":
        matrix = np.asarray(matrix, dtype=float)
        return cls(
            family="anisotropic2d",
            omega=complex(omega),
            anisotropy=tuple(float(v) for v in matrix.ravel()),
        )

    @property
    def wavenumber(self) -> complex:
        """k = omega / sqrt(gamma) (omega itself for the anisotropic family)."""
        if self.family == "anisotropic2d":
            return self.omega
        return self.omega / np.sqrt(self.gamma)

    @property
    def anisotropy_matrix(self) -> np.ndarray:
        if self.anisotropy is None:
            return np.eye(2)
        return np.array(self.anisotropy, dtype=float).reshape(2, 2)

    @property
    def conormal_matrix(self) -> np.ndarray:
        """Matrix C in the flux nu . C grad G."""
        if self.family == "anisotropic2d":
            return self.anisotropy_matrix
        return self.gamma * np.eye(2)

    def describe(self) -> str:
        if self.family == "laplace2d":
            return f"laplace2d(gamma={self.gamma:g})"
        if self.family == "helmholtz2d":
            return f"helmholtz2d(omega={self.omega:.6g}, gamma={self.gamma:g})"
        return f"anisotropic2d(omega={self.omega:.6g}, A={self.anisotropy})"


def _separation(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r = np.sqrt(np.sum(diff**2, axis=-1))
    if np.any(r < _COINCIDENT):
        raise CoincidentPoints("Kernel evaluated at coincident points x = y")
    return diff, r


def _anisotropic_distance(kernel: Kernel, diff: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    inv = np.linalg.inv(kernel.anisotropy_matrix)
    inv_diff = diff @ inv.T
    rho = np.sqrt(np.einsum("...i,...i->...", diff, inv_diff))
    return rho, inv_diff


def green(kernel: Kernel, x: np.ndarray, y: np.ndarray) -> complex | np.ndarray:
    """Fundamental solution G(x, y); broadcasts over leading axes of points of shape (..., 2).

    Raises:
        CoincidentPoints: If any pair has x = y.
    """
    diff, r = _separation(x, y)
    if kernel.family == "laplace2d":
        return -np.log(r) / (2.0 * np.pi * kernel.gamma)
    if kernel.family == "helmholtz2d":
        return 0.25j / kernel.gamma * special.hankel1(0, kernel.wavenumber * r)
    rho, _ = _anisotropic_distance(kernel, diff)
    scale = 1.0 / np.sqrt(np.linalg.det(kernel.anisotropy_matrix))
    return scale * 0.25j * special.hankel1(0, kernel.omega * rho)


def green_gradient_y(kernel: Kernel, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Gradient of G(x, y) with respect to y, shape (..., 2)."""
    diff, r = _separation(x, y)
    if kernel.family == "laplace2d":
        return diff / (2.0 * np.pi * kernel.gamma * r[..., None] ** 2)
    if kernel.family == "helmholtz2d":
        k = kernel.wavenumber
        factor = 0.25j * k / kernel.gamma * special.hankel1(1, k * r) / r
        return factor[..., None] * diff
    rho, inv_diff = _anisotropic_distance(kernel, diff)
    scale = 1.0 / np.sqrt(np.linalg.det(kernel.anisotropy_matrix))
    factor = scale * 0.25j * kernel.omega * special.hankel1(1, kernel.omega * rho) / rho
    return factor[..., None] * inv_diff


def green_gradient_x(kernel: Kernel, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Gradient of G(x, y) with respect to x (translation invariance)."""
    return -green_gradient_y(kernel, x, y)


def double_layer_gradient_x(
    kernel: Kernel, x: np.ndarray, y: np.ndarray, normal_y: np.ndarray
) -> np.ndarray:
    """Gradient in x of the double layer kernel d/d(nu_y) G(x, y), Helmholtz family only."""
    if kernel.family != "helmholtz2d":
        raise ValueError("double_layer_gradient_x is implemented for helmholtz2d kernels")
    diff, r = _separation(x, y)
    k = kernel.wavenumber
    h0 = special.hankel1(0, k * r)
    h1 = special.hankel1(1, k * r)
    d_dot_n = np.einsum("...i,...i->...", diff, normal_y)
    coeff = 0.25j * k / kernel.gamma
    radial = (k * h0 - 2.0 * h1 / r) * d_dot_n / r**2
    return coeff * ((h1 / r)[..., None] * normal_y + radial[..., None] * diff)


def flux_residual(kernel: Kernel, r: float, n_points: int = 512, x: np.ndarray | None = None) -> complex:
    """Conormal flux of G through a small circle around x, plus one.

    The flux of a fundamental solution normalized by ``-delta`` is -1, so the
    returned value measures the normalization error.
    """
    x = np.zeros(2) if x is None else np.asarray(x, dtype=float)
    theta = 2.0 * np.pi * np.arange(n_points) / n_points
    normals = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    points = x + r * normals
    grad = green_gradient_y(kernel, x, points)
    flux = np.einsum("ij,ij->i", normals, grad @ kernel.conormal_matrix.T)
    return complex(np.sum(flux) * 2.0 * np.pi * r / n_points + 1.0)
