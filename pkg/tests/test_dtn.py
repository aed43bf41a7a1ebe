"""Tests for the Dirichlet-to-Neumann maps."""

import numpy as np
import pytest
from scipy import special

from resonance_mcp.core.dtn import build_scene_grids, dtn_homogeneous, dtn_perturbed
from resonance_mcp.core.geometry import InclusionSpec, ParametricCurve, Scene
from resonance_mcp.core.oracle import disk_dtn_eigenvalue, two_layer_dtn_eigenvalue
from resonance_mcp.errors import NearSingularSystem

OMEGA = 1.3 - 0.2j
GAMMA1 = 2.0


def _centered_scene(core_gamma: float, epsilon: float) -> Scene:
    return Scene(
        outer=ParametricCurve.circle(1.0),
        gamma1=GAMMA1,
        gamma2=1.0,
        inclusions=(InclusionSpec.isotropic((0.0, 0.0), ParametricCurve.circle(1.0), core_gamma),),
        epsilon=epsilon,
    )


class TestHomogeneous:
    """Tests for the interior DtN map without inclusions."""

    def test_disk_eigenvalues(self, disk_grid):
        """Test N cos(m t) = k1 J_m'(k1)/J_m(k1) cos(m t) on the unit disk."""
        dtn = dtn_homogeneous(disk_grid, OMEGA, GAMMA1)
        for m in (0, 1, 2, 4):
            trace = np.cos(m * disk_grid.t)
            expected = disk_dtn_eigenvalue(OMEGA, GAMMA1, m) * trace
            assert np.allclose(dtn.apply(trace), expected, atol=1e-8)

    def test_dirichlet_eigenvalue_is_singular(self, disk_grid):
        """Test NearSingularSystem at an interior Dirichlet eigenvalue."""
        omega = special.jn_zeros(0, 1)[0] * np.sqrt(GAMMA1)
        with pytest.raises(NearSingularSystem) as excinfo:
            dtn_homogeneous(disk_grid, omega, GAMMA1)
        assert excinfo.value.exit_code == 1
        assert "sigma_min" in excinfo.value.details

    def test_records_singular_value(self, disk_grid):
        """Test that the map carries sigma_min of the single layer."""
        dtn = dtn_homogeneous(disk_grid, OMEGA, GAMMA1)
        assert dtn.variant == "homogeneous"
        assert dtn.min_singular_value > 1e-3


class TestPerturbed:
    """Tests for the multi-domain DtN map."""

    def test_zero_epsilon_is_homogeneous(self, disk_grid, disk_scene):
        """Test that epsilon = 0 reproduces the homogeneous map."""
        grids = build_scene_grids(disk_scene, 64, 32, outer=disk_grid)
        perturbed = dtn_perturbed(disk_scene, grids, OMEGA)
        homogeneous = dtn_homogeneous(disk_grid, OMEGA, disk_scene.gamma1)
        assert perturbed.variant == "homogeneous"
        assert np.allclose(perturbed.matrix, homogeneous.matrix)

    def test_transparent_inclusion(self, disk_grid):
        """Test that an inclusion with the background material changes nothing."""
        scene = _centered_scene(GAMMA1, 0.2)
        grids = build_scene_grids(scene, 64, 64, outer=disk_grid)
        perturbed = dtn_perturbed(scene, grids, OMEGA).matrix
        homogeneous = dtn_homogeneous(disk_grid, OMEGA, GAMMA1).matrix
        assert np.linalg.norm(perturbed - homogeneous) < 1e-6 * np.linalg.norm(homogeneous)

    def test_grids_follow_the_scene(self, disk_scene):
        """Test one scaled and one transformed grid per inclusion."""
        grids = build_scene_grids(disk_scene.with_epsilon(0.1), 64, 32)
        assert len(grids.inclusions) == len(grids.transformed) == 1
        assert grids.inclusions[0].length == pytest.approx(2 * np.pi * 0.1, rel=1e-12)
        assert np.allclose(grids.flux_scales[0], np.sqrt(3.0))

    @pytest.mark.slow
    def test_two_layer_disk(self, disk_grid):
        """Test a concentric core against the closed-form two-layer eigenvalue."""
        scene = _centered_scene(3.0, 0.2)
        grids = build_scene_grids(scene, 64, 64, outer=disk_grid)
        dtn = dtn_perturbed(scene, grids, OMEGA)
        assert dtn.variant == "perturbed"
        for m in (0, 2):
            trace = np.cos(m * disk_grid.t)
            mu = two_layer_dtn_eigenvalue(OMEGA, GAMMA1, 3.0, 0.2, m)
            assert np.allclose(dtn.apply(trace), mu * trace, atol=1e-6 * max(1.0, abs(mu)))
