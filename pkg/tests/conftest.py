"""
Pytest Configuration and Fixtures

This module provides shared fixtures for all tests.
"""

import numpy as np
import pytest

from resonance_mcp.core.geometry import BoundaryGrid, InclusionSpec, ParametricCurve, Scene, build_grid


@pytest.fixture
def disk_grid() -> BoundaryGrid:
    """Unit circle with 64 nodes."""
    return build_grid(ParametricCurve.circle(1.0), 64, label="disk")


@pytest.fixture
def disk_grid_128() -> BoundaryGrid:
    """Unit circle with 128 nodes."""
    return build_grid(ParametricCurve.circle(1.0), 128, label="disk128")


@pytest.fixture
def kite_grid() -> BoundaryGrid:
    """Kite curve with 64 nodes."""
    return build_grid(ParametricCurve.kite(1.0), 64, label="kite")


@pytest.fixture
def disk_scene() -> Scene:
    """Unit disk, gamma1 = 2, gamma2 = 1, one circular inclusion of conductivity 3 at (0.3, 0)."""
    return Scene(
        outer=ParametricCurve.circle(1.0),
        gamma1=2.0,
        gamma2=1.0,
        inclusions=(InclusionSpec.isotropic((0.3, 0.0), ParametricCurve.circle(1.0), 3.0),),
    )


@pytest.fixture
def synthetic_family():
    """Factory for T(z) = B - z I with prescribed eigenvalues."""

    def make(eigenvalues, seed: int = 7):
        eigenvalues = np.asarray(eigenvalues, dtype=complex)
        n = eigenvalues.size
        rng = np.random.default_rng(seed)
        basis = rng.standard_normal((n, n)) + n * np.eye(n)
        matrix = basis @ np.diag(eigenvalues) @ np.linalg.inv(basis)

        def family(z: complex) -> np.ndarray:
            return matrix - z * np.eye(n)

        return family

    return make
