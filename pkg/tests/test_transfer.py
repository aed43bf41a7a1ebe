"""Tests for the transfer operator and its dual."""

import numpy as np
import pytest
from scipy import special

from resonance_mcp.core.oracle import disk_dispersion_roots
from resonance_mcp.core.transfer import (
    assemble_T,
    assemble_T_dual,
    jump_coefficient,
    min_singular_value,
    reflected_transfer_function,
    singular_values_along,
    sobolev_norm,
    transfer_function,
    weighted_adjoint,
)

GAMMA1, GAMMA2 = 2.0, 1.0


def _disk_symbol(omega: complex, gamma1: float, gamma2: float, m: int) -> complex:
    """Eigenvalue of T (jump c = 1/2) on exp(i m t) for the unit disk."""
    k1, k2 = omega / np.sqrt(gamma1), omega / np.sqrt(gamma2)
    dispersion = gamma1 * k1 * special.jvp(m, k1) * special.hankel1(m, k2) - gamma2 * k2 * special.jv(
        m, k1
    ) * special.h1vp(m, k2)
    return 1j * np.pi * special.jv(m, k2) / (2 * gamma2 * special.jv(m, k1)) * dispersion


class TestJump:
    """Tests for the identity coefficient."""

    def test_modes(self):
        """Test the derived and literal coefficients."""
        assert jump_coefficient(1.5, "derived") == 0.5
        assert jump_coefficient(1.5, "literal") == pytest.approx(0.25)

    def test_modes_agree_for_unit_exterior(self):
        """Test that both modes coincide when gamma2 = 1."""
        assert jump_coefficient(1.0, "literal") == jump_coefficient(1.0, "derived")

    def test_unknown_mode(self):
        """Test that unknown modes raise ValueError."""
        with pytest.raises(ValueError):
            jump_coefficient(1.0, "other")


class TestTransferOperator:
    """Tests for T(omega) on the unit disk."""

    def test_disk_symbol(self, disk_grid):
        """Test that T acts on exp(i m t) by the Bessel dispersion symbol."""
        omega = 1.8 - 0.3j
        T = assemble_T(disk_grid, omega, GAMMA1, GAMMA2)
        for m in range(4):
            phi = np.exp(1j * m * disk_grid.t)
            symbol = _disk_symbol(omega, GAMMA1, GAMMA2, m)
            assert np.allclose(T.apply(phi), symbol * phi, atol=1e-9 * max(1.0, abs(symbol)))

    def test_literal_jump_shifts_identity(self, disk_grid):
        """Test T_literal - T_derived = (c_literal - 1/2) I."""
        omega, gamma2 = 1.8 - 0.3j, 1.5
        derived = assemble_T(disk_grid, omega, GAMMA1, gamma2, "derived").matrix
        literal = assemble_T(disk_grid, omega, GAMMA1, gamma2, "literal").matrix
        assert np.allclose(literal - derived, -0.25 * np.eye(disk_grid.n), atol=1e-14)

    def test_singular_at_dispersion_root(self, disk_grid):
        """Test that T is numerically singular at a closed-form disk resonance."""
        roots = disk_dispersion_roots(GAMMA1, GAMMA2, 1.0, 1, (0.5, 6.0, -3.0, -0.01))
        assert roots
        root = max(roots, key=lambda r: r["omega_im"])
        omega = complex(root["omega_re"], root["omega_im"])
        sv = np.linalg.svd(assemble_T(disk_grid, omega, GAMMA1, GAMMA2).matrix, compute_uv=False)
        # m = 1 is a cos/sin pair
        assert sv[-1] / sv[0] < 1e-8
        assert sv[-2] / sv[0] < 1e-8
        assert sv[-3] / sv[0] > 1e-4

    def test_singular_values_along(self, disk_grid):
        """Test the sigma_min scan returns one sample per frequency."""
        T_fn = transfer_function(disk_grid, GAMMA1, GAMMA2)
        samples = singular_values_along(T_fn, np.array([1.0 - 0.1j, 2.0 - 0.1j]))
        assert [s[0] for s in samples] == [1.0 - 0.1j, 2.0 - 0.1j]
        assert all(0 < s[1] <= s[2] for s in samples)


class TestReflectedContinuation:
    """Tests for the continuation into Re(omega) < 0."""

    def test_right_half_plane_unchanged(self, disk_grid):
        """Test that Re(omega) >= 0 evaluates the plain family."""
        T_fn = transfer_function(disk_grid, GAMMA1, GAMMA2)
        reflected = reflected_transfer_function(T_fn)
        assert np.array_equal(reflected(1.8 - 0.3j), T_fn(1.8 - 0.3j))

    def test_left_half_plane_is_conjugate_mirror(self, disk_grid):
        """Test T(omega) = conj(T(-conj(omega))) for Re(omega) < 0."""
        T_fn = transfer_function(disk_grid, GAMMA1, GAMMA2)
        reflected = reflected_transfer_function(T_fn)
        assert np.array_equal(reflected(-1.8 - 0.3j), np.conj(T_fn(1.8 - 0.3j)))

    def test_singular_at_mirrored_root(self, disk_grid):
        """Test that the mirror of a disk resonance is singular for the continuation."""
        roots = disk_dispersion_roots(GAMMA1, GAMMA2, 1.0, 0, (0.5, 6.0, -3.0, -0.01))
        assert roots
        root = max(roots, key=lambda r: r["omega_im"])
        mirrored = complex(-root["omega_re"], root["omega_im"])
        reflected = reflected_transfer_function(transfer_function(disk_grid, GAMMA1, GAMMA2))
        sv = np.linalg.svd(reflected(mirrored), compute_uv=False)
        assert sv[-1] / sv[0] < 1e-8
        assert sv[-2] / sv[0] > 1e-4


class TestDual:
    """Tests for the dual transfer operator."""

    def test_dual_is_weighted_adjoint(self, disk_grid):
        """Test T*(omega) = W^{-1} T(omega)^H W on the disk."""
        omega = 1.8 - 0.3j
        T = assemble_T(disk_grid, omega, GAMMA1, GAMMA2).matrix
        dual = assemble_T_dual(disk_grid, omega, GAMMA1, GAMMA2).matrix
        assert np.linalg.norm(dual - weighted_adjoint(T, disk_grid)) < 1e-8 * np.linalg.norm(T)

    def test_dual_variant(self, disk_grid):
        """Test the dual records its variant and jump."""
        dual = assemble_T_dual(disk_grid, 1.8 - 0.3j, GAMMA1, 1.5, "literal")
        assert dual.variant == "dual"
        assert dual.jump == pytest.approx(0.25)


class TestNorms:
    """Tests for discrete norms."""

    def test_sobolev_norm_of_constant(self, disk_grid):
        """Test ||1||_{H^s} = sqrt(2 pi) for every s."""
        ones = np.ones(disk_grid.n)
        assert sobolev_norm(ones, 0.5) == pytest.approx(np.sqrt(2 * np.pi))
        assert sobolev_norm(ones, 0.0) == pytest.approx(np.sqrt(2 * np.pi))

    def test_sobolev_norm_weights_modes(self, disk_grid):
        """Test that cos(m t) gets the weight (1 + m^2)^s."""
        f = np.cos(3 * disk_grid.t)
        assert sobolev_norm(f, 0.5) == pytest.approx(np.sqrt(np.pi) * 10**0.25)

    def test_min_singular_value(self):
        """Test sigma_min of a diagonal matrix."""
        assert min_singular_value(np.diag([3.0, 0.5, 2.0])) == pytest.approx(0.5)
