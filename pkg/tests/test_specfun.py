"""Tests for special functions and fundamental solutions."""

import numpy as np
import pytest
from scipy import special

from resonance_mcp.core.specfun import (
    Kernel,
    double_layer_gradient_x,
    flux_residual,
    green,
    green_gradient_x,
    green_gradient_y,
    hankel1,
    wronskian_residual,
)
from resonance_mcp.errors import CoincidentPoints, DomainError


class TestBessel:
    """Tests for Bessel and Hankel wrappers."""

    def test_hankel_at_zero(self):
        """Test that H_0(0) raises DomainError."""
        with pytest.raises(DomainError):
            hankel1(0, 0.0)

    def test_negative_order(self):
        """Test that negative orders raise DomainError."""
        with pytest.raises(DomainError):
            hankel1(-1, 1.0)

    def test_wronskian(self):
        """Test the Wronskian identity on complex arguments."""
        z = np.array([0.5 - 0.1j, 2.0 - 0.5j, 7.5 + 0.0j])
        for order in range(4):
            assert np.all(wronskian_residual(order, z) < 1e-12)

    def test_hankel_matches_scipy(self):
        """Test that the wrapper returns scipy's principal-branch values."""
        z = 1.7 - 0.3j
        assert hankel1(1, z) == special.hankel1(1, z)


class TestKernels:
    """Tests for kernel normalization and gradients."""

    def test_laplace_flux_is_exact(self):
        """Test that the Laplace kernel has unit flux."""
        assert abs(flux_residual(Kernel.laplace(2.0), r=0.1)) < 1e-12

    def test_helmholtz_flux_small_circle(self):
        """Test the Helmholtz flux normalization up to O((kr)^2 log kr)."""
        kernel = Kernel.helmholtz(2.0 - 0.1j, 1.5)
        r = 1e-3
        kr = abs(kernel.wavenumber) * r
        assert abs(flux_residual(kernel, r=r)) < 10 * kr**2 * abs(np.log(kr))

    def test_anisotropic_flux(self):
        """Test the anisotropic kernel with its conormal flux."""
        kernel = Kernel.anisotropic(1.0, np.array([[2.0, 0.3], [0.3, 1.0]]))
        assert abs(flux_residual(kernel, r=1e-3, n_points=2048)) < 1e-4

    def test_symmetry(self):
        """Test G(x, y) = G(y, x)."""
        kernel = Kernel.helmholtz(1.5 - 0.2j, 2.0)
        x, y = np.array([0.1, 0.2]), np.array([-0.4, 0.7])
        assert green(kernel, x, y) == pytest.approx(green(kernel, y, x))

    def test_coincident_points(self):
        """Test that x = y raises CoincidentPoints."""
        with pytest.raises(CoincidentPoints):
            green(Kernel.helmholtz(1.0), np.zeros(2), np.zeros(2))

    def test_gradient_by_finite_differences(self):
        """Test grad_y G against central differences."""
        kernel = Kernel.helmholtz(1.2 - 0.1j, 2.0)
        x, y = np.array([0.3, -0.2]), np.array([0.9, 0.4])
        h = 1e-6
        fd = np.array(
            [
                (green(kernel, x, y + h * e) - green(kernel, x, y - h * e)) / (2 * h)
                for e in np.eye(2)
            ]
        )
        assert np.allclose(green_gradient_y(kernel, x, y), fd, atol=1e-8)
        assert np.allclose(green_gradient_x(kernel, x, y), -fd, atol=1e-8)

    def test_double_layer_gradient_by_finite_differences(self):
        """Test grad_x of d/dnu_y G against central differences."""
        kernel = Kernel.helmholtz(1.2 - 0.1j, 2.0)
        x, y = np.array([0.3, -0.2]), np.array([0.9, 0.4])
        nu = np.array([0.6, 0.8])
        h = 1e-6

        def dnu(point):
            return green_gradient_y(kernel, point, y) @ nu

        fd = np.array([(dnu(x + h * e) - dnu(x - h * e)) / (2 * h) for e in np.eye(2)])
        assert np.allclose(double_layer_gradient_x(kernel, x, y, nu), fd, atol=1e-7)

    def test_helmholtz_needs_frequency(self):
        """Test that omega = 0 Helmholtz kernels are rejected."""
        with pytest.raises(ValueError):
            Kernel.helmholtz(0.0)
