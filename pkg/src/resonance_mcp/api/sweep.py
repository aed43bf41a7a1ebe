"""Epsilon Sweep API Tools.

Tracks one unperturbed resonance through a sequence of inclusion scales and
compares the measured shifts with the polarization-tensor prediction.
"""

import asyncio
import logging
from dataclasses import replace
from typing import Any

import numpy as np

from ..config import RunConfig, resolve_run_config
from ..core.asymptotics import (
    AsymptoticPrediction,
    fit_loglog_slope,
    operator_differences,
    predict_shift_simple,
    prepare_shift_inputs,
    verify_expansion_fprop1,
)
from ..core.dtn import build_scene_grids
from ..core.geometry import BoundaryGrid, Scene, build_grid, validate_scene
from ..core.nep import MatrixFunction, ResonanceResult, characterize, newton_refine, track_resonance
from ..core.polarization import PolarizationTensor, compute_polarization
from ..core.transfer import perturbed_transfer_function, transfer_function
from ..errors import ConfigError, NoConvergence
from ..schema import SHIFT_MODES
from ..types import SweepRow, SweepSummary
from .resonances import outer_grid, search_contours

logger = logging.getLogger(__name__)


def probe_traces(grid: BoundaryGrid) -> tuple[np.ndarray, np.ndarray]:
    """Smooth boundary data f = exp(cos t) and g = cos 2t + i sin t."""
    t = grid.t
    return np.exp(np.cos(t)).astype(complex), np.cos(2 * t) + 1j * np.sin(t)


def select_target(config: RunConfig, T_fn: MatrixFunction, grid: BoundaryGrid) -> ResonanceResult:
    """Configured target refined by Newton, or the simple resonance with the smallest |Im|.

    Raises:
        NoConvergence: If no simple resonance lies inside the configured contours.
    """
    tol = config.tolerances
    if config.sweep.target is not None:
        lam, iterations = newton_refine(T_fn, config.sweep.target, tol)
        return characterize(T_fn, lam, 1, iterations, grid.ds, tol)
    simple = [r for r in search_contours(config, T_fn, grid) if r.multiplicity == 1 and r.ascent == 1]
    if not simple:
        raise NoConvergence(
            "No simple resonance found in the configured contours", contours=len(config.contours)
        )
    return min(simple, key=lambda r: abs(r.lam.imag))


def inclusion_tensors(config: RunConfig, scene: Scene) -> list[PolarizationTensor]:
    """Polarization tensors of every reference shape B_i against the background gamma1."""
    tensors = []
    for i, inclusion in enumerate(scene.inclusions):
        grid = build_grid(inclusion.shape, config.n_inclusion, label=f"shape{i}")
        tensors.append(
            compute_polarization(grid, scene.gamma1, inclusion.trace, config.contrast, estimate_error=False)
        )
    return tensors


def _family(config: RunConfig, scene: Scene, grid: BoundaryGrid):
    def at(eps: float) -> MatrixFunction:
        scaled = scene.with_epsilon(eps)
        if not scaled.is_perturbed:
            return transfer_function(grid, scene.gamma1, scene.gamma2, config.jump_mode)
        grids = build_scene_grids(scaled, config.n_outer, config.n_inclusion, outer=grid)
        return perturbed_transfer_function(scaled, grids, config.jump_mode)

    return at


def _mean(values: list[float]) -> float:
    return float(np.mean(values)) if values else float("nan")


def sweep_from_config(config: RunConfig) -> dict[str, Any]:
    """Full sweep: target, predictions, tracking, operator and expansion diagnostics."""
    scene = config.scene.with_epsilon(0.0)
    if not scene.inclusions:
        raise ConfigError("A sweep needs at least one inclusion", field="scene.inclusions")
    epsilons = list(config.sweep.epsilons)
    positive = [e for e in epsilons if e > 0]
    if positive:
        validate_scene(scene.with_epsilon(max(positive)), config.n_outer, config.n_inclusion)

    grid = outer_grid(config)
    T_fn = transfer_function(grid, scene.gamma1, scene.gamma2, config.jump_mode)
    base = select_target(config, T_fn, grid)
    logger.info("Sweep target %s (multiplicity %d)", base.lam, base.multiplicity)

    tensors = inclusion_tensors(config, scene)
    inputs = prepare_shift_inputs(base, grid, scene, tensors, T_fn)
    predictions: list[AsymptoticPrediction] = [
        predict_shift_simple(inputs, eps, config.sweep.shift_mode) for eps in epsilons
    ]

    tracked = track_resonance(
        _family(config, scene, grid),
        base,
        epsilons,
        predicted_shifts=[abs(p.average_shift) for p in predictions],
        points=config.contours[0].points if config.contours else 64,
        probe_rank=config.contours[0].probe_rank if config.contours else 8,
        seed=config.seed,
        tolerances=config.tolerances,
        threads=config.threads,
        weights=grid.ds,
    )

    f, g = probe_traces(grid)
    omega = config.sweep.probe_omega
    differences = operator_differences(
        scene, grid, omega, f, g, epsilons, config.n_inclusion, config.jump_mode
    )

    rows: list[SweepRow] = []
    mean_shift: list[float] = []
    mean_residual: list[float] = []
    for track, prediction, difference in zip(tracked, predictions, differences):
        residuals, shifts = [], []
        for branch, result in enumerate(track.resonances):
            shift = result.lam - base.lam
            predicted = min(prediction.shifts, key=lambda s: abs(shift - s)) if prediction.shifts.size else 0j
            residual = abs(shift - predicted)
            residuals.append(residual)
            shifts.append(abs(shift))
            rows.append(
                {
                    "epsilon": track.epsilon,
                    "branch": branch,
                    "lambda_re": result.lam.real,
                    "lambda_im": result.lam.imag,
                    "shift_re": shift.real,
                    "shift_im": shift.imag,
                    "predicted_re": complex(predicted).real,
                    "predicted_im": complex(predicted).imag,
                    "residual": float(residual),
                    "scaled_residual": float(residual / track.epsilon**2) if track.epsilon > 0 else 0.0,
                    "operator_difference": difference.primal,
                    "n_outer": config.n_outer,
                    "tolerance": config.tolerances.residual,
                }
            )
        mean_shift.append(_mean(shifts))
        mean_residual.append(_mean(residuals))

    expansion = verify_expansion_fprop1(
        scene, grid, omega, f, tensors, positive, config.n_inclusion, config.jump_mode
    )
    eps_pos = [i for i, e in enumerate(epsilons) if e > 0]
    summary: SweepSummary = {
        "shift_slope": fit_loglog_slope([epsilons[i] for i in eps_pos], [mean_shift[i] for i in eps_pos]),
        "residual_slope": fit_loglog_slope([epsilons[i] for i in eps_pos], [mean_residual[i] for i in eps_pos]),
        "operator_slope": fit_loglog_slope(
            [epsilons[i] for i in eps_pos], [differences[i].primal for i in eps_pos]
        ),
        "dual_operator_slope": fit_loglog_slope(
            [epsilons[i] for i in eps_pos], [differences[i].dual for i in eps_pos]
        ),
        "expansion_residual_slope": fit_loglog_slope(positive, [r.residual for r in expansion]),
    }
    logger.info("Sweep slopes: %s", summary)
    return {
        "target": {"lambda_re": base.lam.real, "lambda_im": base.lam.imag, "multiplicity": base.multiplicity},
        "rows": rows,
        "summary": summary,
        "predictions": [
            {
                "epsilon": p.epsilon,
                "shift_re": p.average_shift.real,
                "shift_im": p.average_shift.imag,
                "per_inclusion": [[c.real, c.imag] for c in p.per_inclusion],
            }
            for p in predictions
        ],
        "expansion": [
            {"epsilon": r.epsilon, "lhs": r.lhs_norm, "rhs": r.rhs_norm, "residual": r.residual}
            for r in expansion
        ],
    }


async def run_epsilon_sweep(
    config: dict[str, Any] | None = None,
    epsilons: list[float] | None = None,
    shift_mode: str | None = None,
    target_re: float | None = None,
    target_im: float | None = None,
) -> dict[str, Any]:
    """Track a resonance through an epsilon sweep and compare with the asymptotic shift.

    Args:
        config: Optional run configuration document (bundled scene when omitted).
        epsilons: Inclusion scales, e.g. [0.2, 0.1, 0.05].
        shift_mode: "residue" (default) or "averaged" normalization of the predicted shift.
        target_re: Real part of the unperturbed resonance to follow (searched when omitted).
        target_im: Imaginary part of the target.

    Returns:
        Dictionary with:
        - target: Unperturbed resonance followed
        - rows: One SweepRow per epsilon and branch
        - summary: Fitted log-log slopes of shifts, residuals and operator differences
        - predictions: Predicted averaged shift and per-inclusion breakdown per epsilon

    Example:
        >>> result = await run_epsilon_sweep(epsilons=[0.2, 0.1, 0.05])
        >>> print(result["summary"]["residual_slope"])
    """
    cfg = resolve_run_config("sweep", config)
    changes: dict[str, Any] = {}
    if epsilons is not None:
        if not epsilons or any(e < 0 for e in epsilons):
            raise ConfigError("epsilons must be a non-empty list of non-negative numbers", field="epsilons")
        changes["epsilons"] = tuple(float(e) for e in epsilons)
    if shift_mode is not None:
        if shift_mode not in SHIFT_MODES:
            raise ConfigError(f"shift_mode must be one of {SHIFT_MODES}", field="shift_mode")
        changes["shift_mode"] = shift_mode
    if target_re is not None or target_im is not None:
        changes["target"] = complex(target_re or 0.0, target_im or 0.0)
    if changes:
        cfg = cfg.with_overrides(sweep=replace(cfg.sweep, **changes))
    return await asyncio.to_thread(sweep_from_config, cfg)
