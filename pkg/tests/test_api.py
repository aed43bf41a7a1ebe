"""Tests for the config-driven task orchestration."""

from dataclasses import replace

import numpy as np
import pytest

from resonance_mcp.api.polarization import polarization_from_config
from resonance_mcp.api.resonances import search_contours
from resonance_mcp.api.sweep import probe_traces, sweep_from_config
from resonance_mcp.api.validation import (
    check_calderon,
    check_flux_normalization,
    check_gauss_identity,
    check_lower_half_plane,
    check_reflection_symmetry,
    check_synthetic_beyn,
    validation_from_config,
)
from resonance_mcp.config import default_run_config
from resonance_mcp.core.geometry import InclusionSpec, ParametricCurve, build_grid
from resonance_mcp.core.transfer import transfer_function


class TestProbeTraces:
    """Tests for the fixed sweep probe data."""

    def test_values(self):
        """Test the smooth traces at t = 0."""
        grid = build_grid(ParametricCurve.circle(1.0), 32)
        f, g = probe_traces(grid)
        assert f.shape == g.shape == (32,)
        assert f[0] == pytest.approx(np.e)
        assert g[0] == pytest.approx(1.0)


class TestChecks:
    """Tests for individual validation checks."""

    def test_cheap_checks_pass(self):
        """Test the kernel and quadrature certificates on the bundled disk."""
        config = default_run_config("validate").with_overrides(n_outer=128)
        results = [*check_flux_normalization(config), check_gauss_identity(config), check_calderon(config)]
        for result in results:
            assert result["passed"], result
            assert result["value"] < result["threshold"]

    def test_synthetic_beyn(self):
        """Test the planted-eigenvalue eigensolver check."""
        result = check_synthetic_beyn(default_run_config("validate"))
        assert result["name"] == "synthetic_beyn"
        assert result["passed"], result

    def test_lower_half_plane_empty(self):
        """Test that no resonances trivially pass."""
        assert check_lower_half_plane([])["passed"]


class TestFluxNormalization:
    """Tests for the per-family kernel flux checks."""

    def test_every_family_passes(self):
        """Test the Laplace, Helmholtz and anisotropic fluxes on the bundled scene."""
        checks = {c["name"]: c for c in check_flux_normalization(default_run_config("validate"))}
        assert set(checks) == {
            "flux_normalization_laplace",
            "flux_normalization_helmholtz",
            "flux_normalization_anisotropic",
        }
        assert all(c["passed"] for c in checks.values()), checks
        assert "omega = (2-0.5j)" in checks["flux_normalization_helmholtz"]["detail"]
        assert checks["flux_normalization_helmholtz"]["threshold"] < 1e-3

    def test_anisotropic_material(self):
        """Test the conormal flux of a genuinely anisotropic inclusion material."""
        config = default_run_config("validate")
        inclusion = InclusionSpec(center=(0.3, 0.0), shape=ParametricCurve.circle(1.0), gamma=(2.0, 0.3, 0.3, 1.0))
        config = config.with_overrides(scene=replace(config.scene, inclusions=(inclusion,)))
        [check] = [c for c in check_flux_normalization(config) if c["name"] == "flux_normalization_anisotropic"]
        assert check["passed"], check
        assert check["value"] > 0.0

    def test_no_inclusions(self):
        """Test that the anisotropic family is skipped for an empty scene."""
        config = default_run_config("validate")
        config = config.with_overrides(scene=replace(config.scene, inclusions=()), contours=())
        checks = check_flux_normalization(config)
        assert checks[-1]["detail"].startswith("skipped")
        assert "omega = (1.3-0.2j)" in checks[1]["detail"]


class TestReflectionSymmetry:
    """Tests for the mirrored resonance search."""

    def test_disk_resonances_mirror(self):
        """Test that every disk resonance reappears as -conj(lambda) at N = 64."""
        config = default_run_config("validate").with_overrides(n_outer=64)
        grid = build_grid(config.scene.outer, config.n_outer)
        T_fn = transfer_function(grid, config.scene.gamma1, config.scene.gamma2, config.jump_mode)
        found = search_contours(config, T_fn, grid)
        assert found
        check = check_reflection_symmetry(config, T_fn, found)
        assert check["passed"], check
        assert not check["detail"].startswith("0 ")

    def test_contour_across_axis_skipped(self, synthetic_family):
        """Test that contours reaching Re(omega) <= 0 are not mirrored."""
        config = default_run_config("validate")
        contour = replace(config.contours[0], center=0.5 - 0.5j)
        config = config.with_overrides(contours=(contour,))
        check = check_reflection_symmetry(config, synthetic_family([1.0 - 0.2j, 3.0]), [])
        assert check["detail"].startswith("skipped")


class TestPolarizationTask:
    """Tests for the polarization task."""

    def test_bundled_job(self):
        """Test the bundled disk job in the mean contrast."""
        [record] = polarization_from_config(default_run_config("polarization"))
        assert record["m11"] == pytest.approx(1.2 * np.pi, abs=1e-8)
        assert record["m12"] == pytest.approx(0.0, abs=1e-10)


@pytest.mark.slow
class TestFullTasks:
    """End-to-end validation and sweep runs."""

    def test_validation_suite_passes(self):
        """Test that every check passes on the bundled disk."""
        report = validation_from_config(default_run_config("validate").with_overrides(n_outer=128))
        failed = [c for c in report["checks"] if not c["passed"]]
        assert report["passed"], failed

    def test_sweep_residual_is_higher_order(self):
        """Test that the prediction residual decays faster than eps^2."""
        result = sweep_from_config(default_run_config("sweep").with_overrides(n_outer=128))
        assert result["rows"]
        assert result["summary"]["residual_slope"] > 2.0
        assert result["target"]["lambda_im"] < 0
