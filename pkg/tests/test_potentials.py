"""Tests for layer-potential assembly."""

import numpy as np
import pytest
from scipy import special

from resonance_mcp.core.geometry import ParametricCurve, build_grid
from resonance_mcp.core.potentials import (
    assemble_adjoint_double_layer,
    assemble_double_layer,
    assemble_neumann_poincare,
    assemble_single_layer,
    calderon_residual,
    kress_weights,
)
from resonance_mcp.core.specfun import Kernel
from resonance_mcp.core.transfer import weighted_adjoint


def _disk_eigenvalues(omega: complex, gamma: float, m: int) -> tuple[complex, complex]:
    """Single and double layer eigenvalues of the unit circle on exp(i m t)."""
    k = omega / np.sqrt(gamma)
    single = 1j * np.pi / (2 * gamma) * special.jv(m, k) * special.hankel1(m, k)
    double = 1j * np.pi * k / (2 * gamma) * special.jv(m, k) * special.h1vp(m, k) + 1 / (2 * gamma)
    return single, double


class TestKressWeights:
    """Tests for the logarithmic quadrature weights."""

    def test_symmetric_circulant(self):
        """Test that R is symmetric and circulant."""
        weights = kress_weights(32)
        assert np.allclose(weights, weights.T)
        assert np.allclose(np.roll(weights[0], 1), weights[1])

    def test_cached_matrix_is_readonly(self):
        """Test that the cached weights cannot be mutated."""
        with pytest.raises(ValueError):
            kress_weights(32)[0, 0] = 1.0


class TestSelfOperators:
    """Tests for self-interaction blocks."""

    def test_gauss_identity(self):
        """Test Laplace D[1] = -1/2 on a non-convex curve."""
        grid = build_grid(ParametricCurve.kite(), 128)
        double = assemble_double_layer(grid, grid, Kernel.laplace(1.0)).matrix
        assert np.max(np.abs(double @ np.ones(grid.n) + 0.5)) < 1e-10

    def test_laplace_single_layer_on_circle(self, disk_grid):
        """Test the Laplace eigenvalues 1/(2m) and S[1] = 0 on the unit circle."""
        single = assemble_single_layer(disk_grid, disk_grid, Kernel.laplace(1.0)).matrix
        assert np.max(np.abs(single @ np.ones(disk_grid.n))) < 1e-12
        for m in (1, 2, 5):
            phi = np.cos(m * disk_grid.t)
            assert np.allclose(single @ phi, phi / (2 * m), atol=1e-12)

    def test_helmholtz_operators_on_circle(self, disk_grid):
        """Test S and D against the Bessel eigenvalues of the unit circle."""
        omega, gamma = 1.7 - 0.2j, 2.0
        kernel = Kernel.helmholtz(omega, gamma)
        single = assemble_single_layer(disk_grid, disk_grid, kernel).matrix
        double = assemble_double_layer(disk_grid, disk_grid, kernel).matrix
        for m in range(4):
            phi = np.exp(1j * m * disk_grid.t)
            s_m, d_m = _disk_eigenvalues(omega, gamma, m)
            assert np.allclose(single @ phi, s_m * phi, atol=1e-10)
            assert np.allclose(double @ phi, d_m * phi, atol=1e-10)

    def test_too_few_nodes(self):
        """Test that self blocks need at least 16 nodes."""
        grid = build_grid(ParametricCurve.circle(), 8)
        with pytest.raises(ValueError):
            assemble_single_layer(grid, grid, Kernel.helmholtz(1.0))

    def test_anisotropic_self_block_rejected(self, disk_grid):
        """Test that the anisotropic kernel has no self block."""
        kernel = Kernel.anisotropic(1.0, np.diag([2.0, 1.0]))
        with pytest.raises(ValueError):
            assemble_single_layer(disk_grid, disk_grid, kernel)

    def test_matrices_are_readonly(self, disk_grid):
        """Test that assembled matrices cannot be mutated."""
        single = assemble_single_layer(disk_grid, disk_grid, Kernel.helmholtz(1.0))
        with pytest.raises(ValueError):
            single.matrix[0, 0] = 0.0


class TestAdjointRelations:
    """Tests for the weighted adjoint structure of the discrete operators."""

    def test_adjoint_double_layer_is_weighted_transpose(self, kite_grid):
        """Test K' = W^{-1} D^T W on the kite."""
        kernel = Kernel.helmholtz(1.3 - 0.1j, 1.5)
        double = assemble_double_layer(kite_grid, kite_grid, kernel).matrix
        adjoint = assemble_adjoint_double_layer(kite_grid, kite_grid, kernel).matrix
        assert np.allclose(weighted_adjoint(double, kite_grid), np.conj(adjoint), atol=1e-12)

    def test_single_layer_is_weighted_symmetric(self, kite_grid):
        """Test W^{-1} S^H W = conj(S)."""
        single = assemble_single_layer(kite_grid, kite_grid, Kernel.helmholtz(1.3 - 0.1j, 1.5)).matrix
        assert np.allclose(weighted_adjoint(single, kite_grid), np.conj(single), atol=1e-12)

    def test_neumann_poincare_on_circle(self, disk_grid):
        """Test that K' of the circle annihilates mean-free densities and maps 1 to -1/2."""
        neumann = assemble_neumann_poincare(disk_grid).matrix
        assert np.allclose(neumann @ np.ones(disk_grid.n), -0.5, atol=1e-12)
        assert np.allclose(neumann @ np.cos(3 * disk_grid.t), 0.0, atol=1e-12)


class TestCalderon:
    """Tests for the Calderon identity S K' = D S."""

    def test_disk(self):
        """Test the identity on the circle with 256 nodes."""
        grid = build_grid(ParametricCurve.circle(), 256)
        assert calderon_residual(grid, Kernel.helmholtz(1.0, 1.0)) < 1e-8

    def test_kite_converges(self):
        """Test that the kite residual decreases under refinement."""
        kernel = Kernel.helmholtz(1.0, 1.0)
        coarse = calderon_residual(build_grid(ParametricCurve.kite(), 32), kernel)
        fine = calderon_residual(build_grid(ParametricCurve.kite(), 64), kernel)
        assert fine < coarse
        assert fine < 1e-6

    def test_off_grid_blocks_shapes(self, disk_grid):
        """Test that blocks between different grids have (target, source) shape."""
        small = build_grid(ParametricCurve.circle().affine(0.1, (0.3, 0.0)), 32)
        kernel = Kernel.helmholtz(1.0, 2.0)
        assert assemble_single_layer(small, disk_grid, kernel).shape == (64, 32)
        assert assemble_double_layer(disk_grid, small, kernel).shape == (32, 64)
