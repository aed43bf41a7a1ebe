"""Tests for interior extensions, dual bases and shift predictions."""

from dataclasses import replace

import numpy as np
import pytest

from resonance_mcp.core.asymptotics import (
    dipole_response,
    dual_basis,
    fit_loglog_slope,
    interior_field,
    interior_gradient,
    operator_differences,
    predict_shift_general,
    predict_shift_simple,
    prepare_shift_inputs,
    verify_expansion_fprop1,
)
from resonance_mcp.core.geometry import InclusionSpec, ParametricCurve, Scene, build_grid
from resonance_mcp.core.nep import characterize
from resonance_mcp.core.oracle import disk_dispersion_roots
from resonance_mcp.core.polarization import compute_polarization
from resonance_mcp.core.transfer import assemble_T_dual, transfer_function
from resonance_mcp.errors import AscentMismatch, TooCloseToBoundary

GAMMA1, GAMMA2 = 2.0, 1.0
OMEGA = 1.8 - 0.3j
REGION = (0.5, 6.0, -3.0, -0.01)


def _scene(inclusion_gamma: float) -> Scene:
    return Scene(
        outer=ParametricCurve.circle(1.0),
        gamma1=GAMMA1,
        gamma2=GAMMA2,
        inclusions=(InclusionSpec.isotropic((0.3, 0.0), ParametricCurve.circle(1.0), inclusion_gamma),),
    )


def _tensors(scene: Scene) -> list:
    grid = build_grid(ParametricCurve.circle(1.0), 64)
    return [compute_polarization(grid, scene.gamma1, inc.trace, contrast="mean") for inc in scene.inclusions]


def _disk_resonance(grid, mode: int):
    roots = disk_dispersion_roots(GAMMA1, GAMMA2, 1.0, mode, REGION)
    root = max(roots, key=lambda r: r["omega_im"])
    T_fn = transfer_function(grid, GAMMA1, GAMMA2)
    resonance = characterize(T_fn, complex(root["omega_re"], root["omega_im"]), 1 if mode == 0 else 2, 0, grid.ds)
    return resonance, T_fn


class TestInteriorExtension:
    """Tests for the Green representation inside the body."""

    def test_plane_wave_gradient(self, disk_grid):
        """Test grad v for a plane wave trace."""
        k = OMEGA / np.sqrt(GAMMA1) * np.array([0.6, 0.8])
        trace = np.exp(1j * disk_grid.nodes @ k)
        z = np.array([[0.2, 0.1], [-0.3, 0.25]])
        expected = 1j * k[None, :] * np.exp(1j * z @ k)[:, None]
        assert np.allclose(interior_gradient(trace, disk_grid, OMEGA, GAMMA1, z), expected, atol=1e-8)
        assert np.allclose(interior_field(trace, disk_grid, OMEGA, GAMMA1, z), np.exp(1j * z @ k), atol=1e-8)

    def test_radial_field_is_flat_at_center(self, disk_grid):
        """Test that a constant trace has zero gradient at the origin."""
        grad = interior_gradient(np.ones(disk_grid.n), disk_grid, OMEGA, GAMMA1, np.zeros((1, 2)))
        assert np.max(np.abs(grad)) < 1e-12

    def test_gradient_matches_field_differences(self, disk_grid):
        """Test the gradient against central differences of the field."""
        trace = np.exp(np.cos(disk_grid.t)) + 1j * np.sin(2 * disk_grid.t)
        z, h = np.array([0.2, -0.1]), 1e-5
        fd = [
            (interior_field(trace, disk_grid, OMEGA, GAMMA1, z + h * e) - interior_field(trace, disk_grid, OMEGA, GAMMA1, z - h * e))[0]
            / (2 * h)
            for e in np.eye(2)
        ]
        grad = interior_gradient(trace, disk_grid, OMEGA, GAMMA1, z[None, :])[0]
        assert np.allclose(grad, fd, atol=1e-7)

    def test_several_traces(self, disk_grid):
        """Test the (points, 2, traces) layout."""
        traces = np.stack([np.cos(disk_grid.t), np.sin(disk_grid.t)], axis=1)
        grad = interior_gradient(traces, disk_grid, OMEGA, GAMMA1, np.array([[0.1, 0.0]]))
        assert grad.shape == (1, 2, 2)

    def test_too_close_to_boundary(self, disk_grid):
        """Test TooCloseToBoundary within five node spacings."""
        with pytest.raises(TooCloseToBoundary):
            interior_gradient(np.ones(disk_grid.n), disk_grid, OMEGA, GAMMA1, np.array([[0.95, 0.0]]))

    def test_dipole_response_shape(self, disk_grid):
        """Test one boundary column per dipole direction."""
        response = dipole_response(disk_grid, OMEGA, GAMMA1, GAMMA2, np.array([0.3, 0.0]))
        assert response.shape == (disk_grid.n, 2)


class TestDualBasis:
    """Tests for the dual null-space basis."""

    def test_biorthogonal_and_in_dual_kernel(self, disk_grid):
        """Test <u^i, u^j*> = delta_ij and T* u^j* = 0 at a double disk resonance."""
        resonance, _ = _disk_resonance(disk_grid, 1)
        assert resonance.multiplicity == 2
        dual = dual_basis(resonance.null_vectors, disk_grid, resonance.lam, GAMMA2)
        gram = dual.biorthogonality(resonance.null_vectors, disk_grid)
        assert np.allclose(gram, np.eye(2), atol=1e-8)
        T_dual = assemble_T_dual(disk_grid, resonance.lam, GAMMA1, GAMMA2).matrix
        assert dual.membership_residual(T_dual) < 1e-6


class TestShiftPrediction:
    """Tests for the averaged and general shift formulas."""

    @pytest.fixture
    def simple_inputs(self, disk_grid):
        scene = _scene(3.0)
        resonance, T_fn = _disk_resonance(disk_grid, 0)
        return prepare_shift_inputs(resonance, disk_grid, scene, _tensors(scene), T_fn)

    @pytest.mark.parametrize("mode", ["residue", "averaged"])
    def test_epsilon_squared_scaling(self, simple_inputs, mode):
        """Test that doubling epsilon quadruples the shift."""
        small = predict_shift_simple(simple_inputs, 0.05, mode).average_shift
        large = predict_shift_simple(simple_inputs, 0.1, mode).average_shift
        assert small != 0
        assert large / small == pytest.approx(4.0, rel=1e-12)

    @pytest.mark.parametrize("mode", ["residue", "averaged"])
    def test_transparent_inclusion_has_no_shift(self, disk_grid, mode):
        """Test a zero shift when the inclusion matches the background."""
        scene = _scene(GAMMA1)
        resonance, T_fn = _disk_resonance(disk_grid, 0)
        inputs = prepare_shift_inputs(resonance, disk_grid, scene, _tensors(scene), T_fn)
        prediction = predict_shift_simple(inputs, 0.1, mode)
        assert prediction.average_shift == 0
        assert prediction.predicted == resonance.lam

    def test_general_formula_reduces_to_simple(self, simple_inputs):
        """Test that ascent one gives the single branch of the averaged normalization."""
        [branch] = predict_shift_general(simple_inputs, 0.1, 0)
        simple = predict_shift_simple(simple_inputs, 0.1, "averaged")
        assert branch == pytest.approx(simple.predicted, rel=1e-12)

    def test_general_formula_branches(self, simple_inputs):
        """Test the two symmetric branches of an ascent-two resonance."""
        lam = simple_inputs.lam
        first_order = predict_shift_simple(simple_inputs, 0.1, "averaged").average_shift
        branches = predict_shift_general(replace(simple_inputs, ascent=2), 0.1, 0)
        assert len(branches) == 2
        assert branches[0] + branches[1] == pytest.approx(2 * lam, abs=1e-12)
        assert (branches[0] - lam) ** 2 == pytest.approx(first_order, rel=1e-10)

    def test_ascent_mismatch(self, simple_inputs):
        """Test that the averaged formula refuses ascent > 1."""
        with pytest.raises(AscentMismatch):
            predict_shift_simple(replace(simple_inputs, ascent=2), 0.1)

    def test_residue_needs_pairing(self, simple_inputs):
        """Test that the residue normalization needs the derivative pairing."""
        with pytest.raises(ValueError):
            predict_shift_simple(replace(simple_inputs, derivative_pairing=None), 0.1, "residue")


class TestExpansion:
    """Tests for (T - T_eps) f against the dipole expansion."""

    def test_transparent_inclusion(self, disk_grid):
        """Test that both sides vanish for a matched inclusion."""
        scene = _scene(GAMMA1)
        trace = np.exp(np.cos(disk_grid.t)).astype(complex)
        [row] = verify_expansion_fprop1(scene, disk_grid, OMEGA, trace, _tensors(scene), [0.1], n_inclusion=32)
        assert row.rhs_norm == 0
        assert row.lhs_norm < 1e-6

    @pytest.mark.slow
    def test_expansion_residual_is_higher_order(self, disk_grid):
        """Test that the expansion residual decays faster than eps^2."""
        scene = _scene(3.0)
        trace = np.exp(np.cos(disk_grid.t)).astype(complex)
        epsilons = [0.2, 0.1, 0.05]
        rows = verify_expansion_fprop1(scene, disk_grid, OMEGA, trace, _tensors(scene), epsilons)
        assert fit_loglog_slope(epsilons, [r.residual for r in rows]) > 2.0
        assert fit_loglog_slope(epsilons, [r.lhs_norm for r in rows]) == pytest.approx(2.0, abs=0.15)

    @pytest.mark.slow
    def test_operator_differences(self, disk_grid):
        """Test ||(T_eps - T) f|| = O(eps^2) for the primal and dual operators."""
        scene = _scene(3.0)
        f = np.exp(np.cos(disk_grid.t)).astype(complex)
        g = np.cos(2 * disk_grid.t) + 1j * np.sin(disk_grid.t)
        epsilons = [0.2, 0.1, 0.05]
        rows = operator_differences(scene, disk_grid, OMEGA, f, g, epsilons)
        assert 1.85 <= fit_loglog_slope(epsilons, [r.primal for r in rows]) <= 2.15
        assert 1.85 <= fit_loglog_slope(epsilons, [r.dual for r in rows]) <= 2.15


class TestSlopeFit:
    """Tests for the log-log slope helper."""

    def test_quadratic(self):
        """Test slope 2 for y = 3 x^2."""
        xs = [0.2, 0.1, 0.05]
        assert fit_loglog_slope(xs, [3 * x**2 for x in xs]) == pytest.approx(2.0, abs=1e-12)

    def test_nonpositive_values(self):
        """Test nan when a value is not positive."""
        assert np.isnan(fit_loglog_slope([0.1, 0.2], [0.0, 1.0]))
