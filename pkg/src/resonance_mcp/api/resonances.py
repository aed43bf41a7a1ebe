"""Resonance Search API Tools.

This module implements MCP tools for locating scattering resonances of the
configured scene and for the disk dispersion oracle.
"""

import asyncio
import logging
from typing import Any

import numpy as np

from ..config import ContourConfig, RunConfig, resolve_run_config
from ..core import oracle
from ..core.dtn import build_scene_grids
from ..core.geometry import BoundaryGrid, build_grid, validate_scene
from ..core.nep import ContourSpec, MatrixFunction, ResonanceResult, find_resonances
from ..core.transfer import perturbed_transfer_function, singular_values_along, transfer_function
from ..errors import ConfigError
from ..types import DispersionRoot, ResonanceRecord, SingularValueSample

logger = logging.getLogger(__name__)


# ============================================================================
# Shared helpers
# ============================================================================


def outer_grid(config: RunConfig) -> BoundaryGrid:
    """Grid on the outer boundary, checked for self-intersection."""
    return build_grid(config.scene.outer, config.n_outer, label="outer", check_simple=True)


def scene_transfer(config: RunConfig, grid: BoundaryGrid) -> MatrixFunction:
    """omega -> T(omega), or T_eps(omega) when the configured scene carries inclusions at eps > 0."""
    scene = config.scene
    if not scene.is_perturbed:
        return transfer_function(grid, scene.gamma1, scene.gamma2, config.jump_mode)
    validate_scene(scene, config.n_outer, config.n_inclusion)
    grids = build_scene_grids(scene, config.n_outer, config.n_inclusion, outer=grid)
    return perturbed_transfer_function(scene, grids, config.jump_mode)


def contour_spec(contour: ContourConfig) -> ContourSpec:
    return ContourSpec(contour.center, contour.radius, contour.points, contour.probe_rank)


def search_contours(config: RunConfig, T_fn: MatrixFunction, grid: BoundaryGrid) -> list[ResonanceResult]:
    """Run every configured contour with one seeded generator and merge duplicates."""
    rng = np.random.default_rng(config.seed)
    tol = config.tolerances
    merged: list[ResonanceResult] = []
    for contour in config.contours:
        report = find_resonances(
            T_fn, contour_spec(contour), rng, tol, config.threads, weights=grid.ds
        )
        for result in report.resonances:
            if any(abs(result.lam - other.lam) < tol.dedupe * max(1.0, abs(other.lam)) for other in merged):
                continue
            merged.append(result)
    merged.sort(key=lambda res: (round(res.lam.real, 10), round(res.lam.imag, 10)))
    return merged


def disk_radius(config: RunConfig) -> float:
    """Radius of the outer boundary when it is a centred circle."""
    outer = config.scene.outer
    if outer.kind != "circle" or outer.center != (0.0, 0.0) or outer.linear != (1.0, 0.0, 0.0, 1.0):
        raise ConfigError("The disk oracle needs a centred circular outer boundary", field="scene.outer")
    return outer.radius * outer.scale


# ============================================================================
# Config-driven entry points (shared with the CLI runner)
# ============================================================================


def resonances_from_config(config: RunConfig) -> dict[str, Any]:
    """Resonances inside the configured contours."""
    grid = outer_grid(config)
    T_fn = scene_transfer(config, grid)
    results = search_contours(config, T_fn, grid)
    records: list[ResonanceRecord] = [
        r.to_record(config.n_outer, config.tolerances.residual) for r in results
    ]
    logger.info("Found %d resonances in %d contours", len(records), len(config.contours))
    return {
        "resonances": records,
        "contours": len(config.contours),
        "epsilon": config.scene.epsilon,
        "n_outer": config.n_outer,
    }


def oracle_from_config(config: RunConfig) -> list[DispersionRoot]:
    """Disk dispersion roots over the configured modes and region."""
    radius = disk_radius(config)
    roots: list[DispersionRoot] = []
    for m in config.oracle.modes:
        roots.extend(
            oracle.disk_dispersion_roots(
                config.scene.gamma1, config.scene.gamma2, radius, m, config.oracle.region
            )
        )
    roots.sort(key=lambda r: (r["omega_re"], r["omega_im"], r["mode"]))
    return roots


# ============================================================================
# MCP tools
# ============================================================================


async def compute_resonances(
    config: dict[str, Any] | None = None,
    center_re: float | None = None,
    center_im: float | None = None,
    radius: float | None = None,
    epsilon: float | None = None,
) -> dict[str, Any]:
    """Locate resonances (poles of the transfer operator inverse) inside a contour.

    Args:
        config: Optional run configuration document; the bundled unit-disk scene
            (gamma1 = 2, gamma2 = 1) is used when omitted.
        center_re: Real part of the contour centre (replaces the configured contours).
        center_im: Imaginary part of the contour centre.
        radius: Contour radius.
        epsilon: Inclusion scale; 0 searches the unperturbed body.

    Returns:
        Dictionary with:
        - resonances: List of records (lambda_re, lambda_im, multiplicity, ascent, residual, ...)
        - contours: Number of contours searched
        - epsilon: Inclusion scale used

    Example:
        >>> result = await compute_resonances(center_re=2.0, center_im=-0.5, radius=1.0)
        >>> for r in result["resonances"]:
        >>>     print(r["lambda_re"], r["lambda_im"], r["multiplicity"])
    """
    cfg = resolve_run_config("resonances", config)
    if center_re is not None or center_im is not None or radius is not None:
        base = cfg.contours[0] if cfg.contours else ContourConfig(center=0j, radius=1.0)
        center = complex(
            base.center.real if center_re is None else center_re,
            base.center.imag if center_im is None else center_im,
        )
        cfg = cfg.with_overrides(
            contours=(ContourConfig(center, radius or base.radius, base.points, base.probe_rank),)
        )
    if epsilon is not None:
        cfg = cfg.with_overrides(scene=cfg.scene.with_epsilon(epsilon))
    return await asyncio.to_thread(resonances_from_config, cfg)


async def disk_dispersion_roots(
    gamma1: float = 2.0,
    gamma2: float = 1.0,
    radius: float = 1.0,
    modes: list[int] | None = None,
    region: list[float] | None = None,
) -> dict[str, Any]:
    """Resonances of a homogeneous disk from its Bessel dispersion relation.

    Independent of the boundary integral solver; useful as a reference.

    Args:
        gamma1: Interior material constant.
        gamma2: Exterior material constant.
        radius: Disk radius.
        modes: Angular modes m to search (default 0, 1, 2, 3).
        region: Search rectangle [re_min, re_max, im_min, im_max] in the lower half-plane.

    Returns:
        Dictionary with:
        - roots: List of {mode, omega_re, omega_im, residual}
        - count: Number of roots (modes m > 0 are double resonances)

    Example:
        >>> result = await disk_dispersion_roots(gamma1=2.0, gamma2=1.0, modes=[0, 1])
        >>> print(result["count"])
    """
    modes = [0, 1, 2, 3] if modes is None else modes
    region = [0.5, 4.0, -1.5, -0.01] if region is None else region
    if len(region) != 4:
        raise ConfigError("region must be [re_min, re_max, im_min, im_max]", field="region")

    def search() -> list[DispersionRoot]:
        roots: list[DispersionRoot] = []
        for m in modes:
            roots.extend(oracle.disk_dispersion_roots(gamma1, gamma2, radius, m, tuple(region)))
        return sorted(roots, key=lambda r: (r["omega_re"], r["omega_im"], r["mode"]))

    roots = await asyncio.to_thread(search)
    return {"roots": roots, "count": len(roots)}


async def transfer_singular_values(
    omega_re_min: float = 0.5,
    omega_re_max: float = 4.0,
    omega_im: float = -0.1,
    samples: int = 50,
    config: dict[str, Any] | None = None,
) -> dict[str, Any]:
    """Smallest singular value of T(omega) along a horizontal line in the frequency plane.

    Dips of sigma_min locate resonances close to the line.

    Args:
        omega_re_min: Start of the line (real part).
        omega_re_max: End of the line (real part).
        omega_im: Imaginary part of the line.
        samples: Number of frequencies sampled.
        config: Optional run configuration document.

    Returns:
        Dictionary with:
        - samples: List of {omega_re, omega_im, sigma_min, sigma_max}
        - n_outer: Grid size used
    """
    if samples < 2:
        raise ConfigError("samples must be >= 2", field="samples")
    cfg = resolve_run_config("resonances", config)

    def scan() -> list[SingularValueSample]:
        grid = outer_grid(cfg)
        T_fn = scene_transfer(cfg, grid)
        omegas = np.linspace(omega_re_min, omega_re_max, samples) + 1j * omega_im
        return [
            {"omega_re": w.real, "omega_im": w.imag, "sigma_min": lo, "sigma_max": hi}
            for w, lo, hi in singular_values_along(T_fn, omegas)
        ]

    return {"samples": await asyncio.to_thread(scan), "n_outer": cfg.n_outer}
