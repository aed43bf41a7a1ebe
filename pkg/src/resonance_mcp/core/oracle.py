"""Closed-form references for the disk.

For Omega = {|x| < R} the separated solution J_m(k1 r) e^{i m t} inside and
H^(1)_m(k2 r) e^{i m t} outside (k_j = omega / sqrt(gamma_j)) satisfies the
transmission conditions exactly when

    f_m(omega) = gamma1 k1 J_m'(k1 R) H_m(k2 R) - gamma2 k2 J_m(k1 R) H_m'(k2 R) = 0.

Roots are found by complex Newton iteration from a grid of seeds.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from ..types import DispersionRoot

logger = logging.getLogger(__name__)

Region = tuple[float, float, float, float]  # re_min, re_max, im_min, im_max

ROOT_DEDUPE = 1e-9
ROOT_RESIDUAL = 1e-12
NEWTON_TOL = 1e-14
NEWTON_MAXITER = 60
SEEDS_RE = 16
SEEDS_IM = 6


def _wavenumbers(omega: complex, gamma1: float, gamma2: float) -> tuple[complex, complex]:
    return omega / np.sqrt(gamma1), omega / np.sqrt(gamma2)


def _terms(omega: complex, gamma1: float, gamma2: float, radius: float, m: int) -> tuple[complex, complex]:
    k1, k2 = _wavenumbers(omega, gamma1, gamma2)
    t1 = gamma1 * k1 * special.jvp(m, k1 * radius) * special.hankel1(m, k2 * radius)
    t2 = gamma2 * k2 * special.jv(m, k1 * radius) * special.h1vp(m, k2 * radius)
    return complex(t1), complex(t2)


def disk_dispersion(omega: complex, gamma1: float, gamma2: float, radius: float, m: int) -> complex:
    """f_m(omega) for the disk of the given radius."""
    t1, t2 = _terms(omega, gamma1, gamma2, radius, m)
    return t1 - t2


def disk_dispersion_derivative(omega: complex, gamma1: float, gamma2: float, radius: float, m: int) -> complex:
    """Analytic d f_m / d omega."""
    k1, k2 = _wavenumbers(omega, gamma1, gamma2)
    s1, s2 = 1.0 / np.sqrt(gamma1), 1.0 / np.sqrt(gamma2)
    a, b = k1 * radius, k2 * radius
    j, j1, j2 = special.jv(m, a), special.jvp(m, a, 1), special.jvp(m, a, 2)
    h, h1, h2 = special.hankel1(m, b), special.h1vp(m, b, 1), special.h1vp(m, b, 2)
    first = gamma1 * (s1 * j1 * h + k1 * j2 * radius * s1 * h + k1 * j1 * h1 * radius * s2)
    second = gamma2 * (s2 * j * h1 + k2 * j1 * radius * s1 * h1 + k2 * j * h2 * radius * s2)
    return complex(first - second)


def _normalized_residual(omega: complex, gamma1: float, gamma2: float, radius: float, m: int) -> float:
    t1, t2 = _terms(omega, gamma1, gamma2, radius, m)
    scale = abs(t1) + abs(t2)
    return abs(t1 - t2) / scale if scale > 0 else float("inf")


def _inside(omega: complex, region: Region) -> bool:
    re_min, re_max, im_min, im_max = region
    return re_min <= omega.real <= re_max and im_min <= omega.imag <= im_max


def disk_dispersion_roots(
    gamma1: float,
    gamma2: float,
    radius: float,
    m: int,
    region: Region,
    seeds: tuple[int, int] = (SEEDS_RE, SEEDS_IM),
) -> list[DispersionRoot]:
    """Roots of f_m with Im(omega) < 0 inside ``region``, sorted by real part.

    Args:
        gamma1: Interior constant.
        gamma2: Exterior constant.
        radius: Disk radius R.
        m: Angular mode (non-negative).
        region: (re_min, re_max, im_min, im_max).
        seeds: Number of Newton seeds along the real and imaginary axes.

    Returns:
        List of DispersionRoot records with normalized residual below 1e-12.
    """
    if m < 0:
        raise ValueError(f"Angular mode must be non-negative, got {m}")
    re_min, re_max, im_min, im_max = region
    if not (re_min < re_max and im_min < im_max):
        raise ValueError(f"Empty search region {region}")

    def f(w: complex) -> complex:
        return disk_dispersion(w, gamma1, gamma2, radius, m)

    def df(w: complex) -> complex:
        return disk_dispersion_derivative(w, gamma1, gamma2, radius, m)

    found: list[complex] = []
    for re in np.linspace(re_min, re_max, seeds[0]):
        for im in np.linspace(im_min, im_max, seeds[1]):
            seed = complex(re, im)
            if seed == 0:
                continue
            try:
                root = complex(optimize.newton(f, seed, fprime=df, tol=NEWTON_TOL, maxiter=NEWTON_MAXITER))
            except (RuntimeError, ZeroDivisionError, OverflowError, ValueError):
                continue
            if not np.isfinite(root) or root.imag >= 0 or not _inside(root, region):
                continue
            if _normalized_residual(root, gamma1, gamma2, radius, m) >= ROOT_RESIDUAL:
                continue
            if any(abs(root - other) < ROOT_DEDUPE * max(1.0, abs(root)) for other in found):
                continue
            found.append(root)

    found.sort(key=lambda w: (w.real, w.imag))
    logger.debug("Mode %d: %d dispersion roots in %s", m, len(found), region)
    return [
        {
            "mode": m,
            "omega_re": w.real,
            "omega_im": w.imag,
            "residual": _normalized_residual(w, gamma1, gamma2, radius, m),
        }
        for w in found
    ]


@dataclass(frozen=True)
class DiskResonance:
    omega: complex
    mode: int
    multiplicity: int  # 1 for m = 0, 2 for the cos/sin pair otherwise


def disk_resonances(
    gamma1: float, gamma2: float, radius: float, modes: tuple[int, ...], region: Region
) -> list[DiskResonance]:
    """Resonances of the disk over several angular modes, sorted by real part."""
    resonances = []
    for m in modes:
        for root in disk_dispersion_roots(gamma1, gamma2, radius, m, region):
            omega = complex(root["omega_re"], root["omega_im"])
            resonances.append(DiskResonance(omega=omega, mode=m, multiplicity=1 if m == 0 else 2))
    resonances.sort(key=lambda r: (r.omega.real, r.omega.imag))
    return resonances


# ============================================================================
# Dirichlet-to-Neumann eigenvalues
# ============================================================================


def disk_dtn_eigenvalue(omega: complex, gamma1: float, m: int, radius: float = 1.0) -> complex:
    """Eigenvalue of the interior DtN map on e^{i m t}: k1 J_m'(k1 R) / J_m(k1 R)."""
    k1 = omega / np.sqrt(gamma1)
    return complex(k1 * special.jvp(m, k1 * radius) / special.jv(m, k1 * radius))


def two_layer_dtn_eigenvalue(
    omega: complex, gamma1: float, core_gamma: float, core_radius: float, m: int, radius: float = 1.0
) -> complex:
    """DtN eigenvalue of the disk with a concentric core of constant ``core_gamma``.

    Inside r < a the solution is A J_m(k_in r), k_in = omega / sqrt(core_gamma);
    in a < r < R it is B J_m(k1 r) + C Y_m(k1 r). Continuity of the trace and of the
    conormal flux at r = a and the unit trace at r = R fix A, B, C.
    """
    if not 0 < core_radius < radius:
        raise ValueError("Core radius must lie strictly inside the disk")
    k1 = omega / np.sqrt(gamma1)
    k_in = omega / np.sqrt(core_gamma)
    a = core_radius
    system = np.array(
        [
            [special.jv(m, k_in * a), -special.jv(m, k1 * a), -special.yv(m, k1 * a)],
            [
                core_gamma * k_in * special.jvp(m, k_in * a),
                -gamma1 * k1 * special.jvp(m, k1 * a),
                -gamma1 * k1 * special.yvp(m, k1 * a),
            ],
            [0.0, special.jv(m, k1 * radius), special.yv(m, k1 * radius)],
        ],
        dtype=complex,
    )
    _, b, c = np.linalg.solve(system, np.array([0.0, 0.0, 1.0], dtype=complex))
    return complex(k1 * (b * special.jvp(m, k1 * radius) + c * special.yvp(m, k1 * radius)))
