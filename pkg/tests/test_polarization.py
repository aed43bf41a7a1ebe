"""Tests for polarization tensors."""

import numpy as np
import pytest

from resonance_mcp.core.geometry import ParametricCurve, build_grid
from resonance_mcp.core.polarization import (
    compute_polarization,
    effective_contrast,
    polarization_shape_scaling,
)
from resonance_mcp.errors import DegenerateContrast


class TestDisk:
    """Tests for the unit disk, where the tensor is known in closed form."""

    def test_trace_contrast(self, disk_grid_128):
        """Test M = 2 pi tau / (gamma + tau) I with tau = tr(gamma_D)."""
        tensor = compute_polarization(disk_grid_128, gamma_bg=1.0, trace_gamma_d=3.0)
        assert np.allclose(tensor.matrix, 1.5 * np.pi * np.eye(2), atol=1e-8)
        assert tensor.quadrature_error < 1e-10

    def test_mean_contrast(self, disk_grid_128):
        """Test the mean contrast tau = tr(gamma_D) / 2."""
        tensor = compute_polarization(disk_grid_128, gamma_bg=1.0, trace_gamma_d=3.0, contrast="mean")
        assert tensor.effective_contrast == 1.5
        assert np.allclose(tensor.matrix, 1.2 * np.pi * np.eye(2), atol=1e-8)

    def test_zero_contrast(self, disk_grid):
        """Test that tau = gamma gives |B| I."""
        tensor = compute_polarization(disk_grid, gamma_bg=2.0, trace_gamma_d=2.0)
        assert np.allclose(tensor.matrix, np.pi * np.eye(2), rtol=1e-13)

    def test_degenerate_contrast(self, disk_grid):
        """Test DegenerateContrast for contrasts closer than 1e-12."""
        with pytest.raises(DegenerateContrast):
            compute_polarization(disk_grid, gamma_bg=1.0, trace_gamma_d=1.0 + 1e-13)

    def test_rejects_nonpositive_conductivity(self, disk_grid):
        """Test that conductivities must be positive."""
        with pytest.raises(ValueError):
            compute_polarization(disk_grid, gamma_bg=0.0, trace_gamma_d=3.0)


class TestGeneralShapes:
    """Tests for structural properties of the tensor."""

    @pytest.mark.parametrize("trace_gamma_d", [0.1, 0.5, 2.0, 10.0])
    def test_symmetric_positive_definite(self, trace_gamma_d):
        """Test symmetry and positivity on the kite across contrasts."""
        grid = build_grid(ParametricCurve.kite(), 128)
        matrix = compute_polarization(grid, gamma_bg=1.0, trace_gamma_d=trace_gamma_d).matrix
        assert abs(matrix[0, 1] - matrix[1, 0]) < 1e-8 * np.max(np.abs(matrix))
        assert np.all(np.linalg.eigvalsh(0.5 * (matrix + matrix.T)) > 0)

    def test_rotation_covariance(self):
        """Test M(R B) = R M(B) R^T for an ellipse."""
        angle = np.pi / 6
        rotation = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
        base = ParametricCurve.ellipse(1.0, 0.5)
        plain = compute_polarization(build_grid(base, 128), 1.0, 4.0).matrix
        turned = compute_polarization(build_grid(base.rotated(angle), 128), 1.0, 4.0).matrix
        assert np.allclose(turned, rotation @ plain @ rotation.T, atol=1e-8)

    def test_ellipse_is_stronger_along_major_axis(self):
        """Test that a high-contrast ellipse polarizes more along its long axis."""
        matrix = compute_polarization(build_grid(ParametricCurve.ellipse(1.0, 0.5), 128), 1.0, 4.0).matrix
        assert matrix[0, 0] > matrix[1, 1]
        assert abs(matrix[0, 1]) < 1e-10

    def test_shape_scaling(self):
        """Test M(sB) = s^2 M(B) against a direct solve on the dilated curve."""
        curve = ParametricCurve.ellipse(1.0, 0.6)
        tensor = compute_polarization(build_grid(curve, 128), 1.0, 4.0)
        scaled = polarization_shape_scaling(tensor, 0.3)
        direct = compute_polarization(build_grid(curve.affine(0.3, (0.0, 0.0)), 128), 1.0, 4.0)
        assert np.allclose(scaled.matrix, direct.matrix, atol=1e-10)
        assert scaled.area == pytest.approx(0.09 * tensor.area)

    def test_record_fields(self, disk_grid):
        """Test the flat CSV record."""
        record = compute_polarization(disk_grid, 1.0, 3.0).to_record()
        assert record["shape"] == "circle(r=1)"
        assert record["m12"] == pytest.approx(record["m21"], abs=1e-12)

    def test_unknown_contrast_mode(self):
        """Test that only trace and mean are accepted."""
        with pytest.raises(ValueError):
            effective_contrast(3.0, "median")
