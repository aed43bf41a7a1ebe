"""Contour-integral eigensolver for meromorphic matrix families.

Poles of T^{-1}(z) inside a circle are found from the contour moments

    A_0 = 1/(2 pi i) int T^{-1}(z) V dz,   A_1 = 1/(2 pi i) int z T^{-1}(z) V dz

evaluated with the trapezoid rule, followed by a reduced eigenproblem and
Newton refinement on the smallest singular triplet of T.
"""

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
from joblib import Parallel, delayed

from ..config import Tolerances
from ..errors import ContourThroughPole, CountMismatch, NoConvergence
from ..types import ResonanceRecord

logger = logging.getLogger(__name__)

MatrixFunction = Callable[[complex], np.ndarray]

MAX_CONTOUR_RETRIES = 3
TRACK_MIN_RADIUS = 1e-4
TRACK_RADIUS_FACTOR = 5.0


@dataclass(frozen=True)
class ContourSpec:
    """Circle |z - center| = radius sampled at ``points`` equispaced nodes."""

    center: complex
    radius: float
    points: int = 64
    probe_rank: int = 8

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValueError(f"Contour radius must be positive, got {self.radius}")
        if self.points < 8:
            raise ValueError(f"Contour needs at least 8 points, got {self.points}")
        if self.probe_rank < 1:
            raise ValueError("probe_rank must be positive")

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes z_k and weights such that sum w_k f(z_k) ~ 1/(2 pi i) int f dz."""
        theta = 2.0 * np.pi * np.arange(self.points) / self.points
        offset = self.radius * np.exp(1j * theta)
        return self.center + offset, offset / self.points

    def contains(self, z: complex) -> bool:
        return abs(z - self.center) < self.radius

    def clearance(self, z: complex) -> float:
        """Distance of z to the contour line."""
        return abs(abs(z - self.center) - self.radius)

    def grown(self, factor: float) -> "ContourSpec":
        return ContourSpec(self.center, self.radius * factor, self.points, self.probe_rank)


@dataclass(frozen=True)
class ProjectorData:
    """Contour moments and their rank."""

    contour: ContourSpec
    A0: np.ndarray
    A1: np.ndarray
    probes: np.ndarray
    singular_values: np.ndarray
    scale: float
    rank: int


@dataclass
class ResonanceResult:
    """One converged pole of T^{-1}."""

    lam: complex
    multiplicity: int  # geometric
    algebraic_count: int
    ascent: int
    null_vectors: np.ndarray  # columns, orthonormal in the weighted product
    left_vectors: np.ndarray
    residual: float  # sigma_min(T) / ||T||
    newton_iterations: int

    def to_record(self, n_outer: int, tolerance: float) -> ResonanceRecord:
        return {
            "lambda_re": float(self.lam.real),
            "lambda_im": float(self.lam.imag),
            "multiplicity": self.multiplicity,
            "algebraic_count": self.algebraic_count,
            "ascent": self.ascent,
            "residual": float(self.residual),
            "newton_iterations": self.newton_iterations,
            "n_outer": n_outer,
            "tolerance": tolerance,
        }


@dataclass
class SearchReport:
    """Resonances found in one contour plus rejected candidates."""

    contour: ContourSpec
    resonances: list[ResonanceResult]
    rank: int
    rejected: list[dict] = field(default_factory=list)


# ============================================================================
# Contour moments
# ============================================================================


def _as_matrix(value: object) -> np.ndarray:
    return np.asarray(getattr(value, "matrix", value), dtype=complex)


def _node_solve(T_fn: MatrixFunction, z: complex, probes: np.ndarray, pole_condition: float) -> np.ndarray:
    matrix = _as_matrix(T_fn(z))
    condition = np.linalg.cond(matrix)
    if not np.isfinite(condition) or condition > pole_condition:
        raise ContourThroughPole(
            "Contour node is too close to a pole", node=complex(z), condition=float(condition)
        )
    return la.lu_solve(la.lu_factor(matrix), probes)


def _make_rng(seed: int | np.random.Generator | None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _probe_block(rng: np.random.Generator, n: int, r: int) -> np.ndarray:
    return rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))


def spectral_projector(
    T_fn: MatrixFunction,
    contour: ContourSpec,
    seed: int | np.random.Generator | None = None,
    tolerances: Tolerances | None = None,
    threads: int = 1,
) -> ProjectorData:
    """Trapezoid-rule moments A_0, A_1 of T^{-1} against a random probe block.

    The probe width doubles while the numerical rank saturates it.

    Raises:
        ContourThroughPole: If a contour node solve has condition above the pole limit.
    """
    tol = tolerances or Tolerances()
    rng = _make_rng(seed)
    nodes, weights = contour.nodes()
    size = _as_matrix(T_fn(nodes[0])).shape[0]
    r = min(contour.probe_rank, size)

    while True:
        probes = _probe_block(rng, size, r)

        def solve(z: complex) -> np.ndarray:
            return _node_solve(T_fn, z, probes, tol.pole_condition)

        if threads > 1:
            solutions = Parallel(n_jobs=threads, prefer="threads")(delayed(solve)(z) for z in nodes)
        else:
            solutions = [solve(z) for z in nodes]

        A0 = sum(w * X for w, X in zip(weights, solutions))
        A1 = sum(w * z * X for w, z, X in zip(weights, nodes, solutions))
        scale = contour.radius * max(np.linalg.norm(X, 2) for X in solutions)
        sv = la.svdvals(A0)
        rank = int(np.sum(sv > tol.beyn_rank * scale))
        logger.debug(
            "Contour %s r=%.3g: probe width %d, rank %d, sv=%s",
            contour.center,
            contour.radius,
            r,
            rank,
            np.array2string(sv[: rank + 2], precision=2),
        )
        if rank < r or r >= size:
            return ProjectorData(contour, A0, A1, probes, sv, float(scale), rank)
        r = min(2 * r, size)


def beyn_eigenvalues(data: ProjectorData) -> np.ndarray:
    """Eigenvalues of the reduced pencil that lie inside the contour."""
    if data.rank == 0:
        return np.zeros(0, dtype=complex)
    U, s, Wh = la.svd(data.A0, full_matrices=False)
    k = data.rank
    U0, S0, W0 = U[:, :k], s[:k], Wh[:k].conj().T
    reduced = U0.conj().T @ data.A1 @ W0 / S0[None, :]
    eigvals = la.eigvals(reduced)
    inside = np.array([data.contour.contains(z) for z in eigvals], dtype=bool)
    return np.sort_complex(eigvals[inside])


# ============================================================================
# Refinement
# ============================================================================


def central_derivative(T_fn: MatrixFunction, z: complex, h: float | None = None) -> np.ndarray:
    """dT/dz by central differences with step h (default 1e-6 max(1, |z|))."""
    h = h if h is not None else 1e-6 * max(1.0, abs(z))
    return (_as_matrix(T_fn(z + h)) - _as_matrix(T_fn(z - h))) / (2.0 * h)


def newton_refine(
    T_fn: MatrixFunction, lam0: complex, tolerances: Tolerances | None = None
) -> tuple[complex, int]:
    """Newton iteration on the smallest singular triplet of T.

    Uses the two-sided update lam <- lam - (u^H T v) / (u^H T' v).

    Raises:
        NoConvergence: If the step does not drop below newton_step * |lam|.
    """
    tol = tolerances or Tolerances()
    lam = complex(lam0)
    for iteration in range(1, tol.newton_max_iter + 1):
        matrix = _as_matrix(T_fn(lam))
        U, s, Vh = la.svd(matrix)
        if s[-1] <= 1e-15 * s[0]:
            return lam, iteration
        u, v = U[:, -1], Vh[-1].conj()
        denominator = u.conj() @ central_derivative(T_fn, lam) @ v
        if denominator == 0:
            break
        step = (u.conj() @ matrix @ v) / denominator
        lam = lam - step
        logger.debug("Newton %d: lam=%s, |step|=%.2e", iteration, lam, abs(step))
        if abs(step) < tol.newton_step * max(abs(lam), 1.0):
            return lam, iteration
    raise NoConvergence(
        "Newton refinement did not converge", start=complex(lam0), last=complex(lam)
    )


def weighted_orthonormalize(vectors: np.ndarray, weights: np.ndarray | None) -> np.ndarray:
    """Orthonormalize columns in the product <f, g> = sum w f conj(g)."""
    if weights is None:
        return la.qr(vectors, mode="economic")[0]
    root = np.sqrt(weights)[:, None]
    q = la.qr(root * vectors, mode="economic")[0]
    return q / root


def null_space_distance(U: np.ndarray, V: np.ndarray, weights: np.ndarray | None = None) -> float:
    """Largest principal angle between span(U) and span(V)."""
    root = np.ones((U.shape[0], 1)) if weights is None else np.sqrt(weights)[:, None]
    return float(np.max(la.subspace_angles(root * U, root * V)))


def _cluster(values: Sequence[tuple[complex, int]], tol: float) -> list[list[tuple[complex, int]]]:
    clusters: list[list[tuple[complex, int]]] = []
    for value in values:
        for cluster in clusters:
            if abs(cluster[0][0] - value[0]) < tol * max(1.0, abs(value[0])):
                cluster.append(value)
                break
        else:
            clusters.append([value])
    return clusters


def characterize(
    T_fn: MatrixFunction,
    lam: complex,
    algebraic_count: int,
    iterations: int,
    weights: np.ndarray | None = None,
    tolerances: Tolerances | None = None,
) -> ResonanceResult:
    """Null space, multiplicities and residual of T at a converged lam."""
    tol = tolerances or Tolerances()
    matrix = _as_matrix(T_fn(lam))
    U, s, Vh = la.svd(matrix)
    norm = s[0]
    geometric = max(1, int(np.sum(s < tol.null_space * norm)))
    null = weighted_orthonormalize(Vh[-geometric:].conj().T, weights)
    algebraic = max(algebraic_count, geometric)
    return ResonanceResult(
        lam=complex(lam),
        multiplicity=geometric,
        algebraic_count=algebraic,
        ascent=math.ceil(algebraic / geometric),
        null_vectors=null,
        left_vectors=U[:, -geometric:],
        residual=float(s[-1] / norm),
        newton_iterations=iterations,
    )


# ============================================================================
# Search
# ============================================================================


def _search_once(
    T_fn: MatrixFunction,
    contour: ContourSpec,
    rng: np.random.Generator,
    tol: Tolerances,
    threads: int,
    weights: np.ndarray | None,
    lower_half_only: bool,
) -> SearchReport:
    data = spectral_projector(T_fn, contour, seed=rng, tolerances=tol, threads=threads)
    candidates = beyn_eigenvalues(data)
    rejected: list[dict] = []
    refined: list[tuple[complex, int]] = []
    for candidate in candidates:
        try:
            lam, iterations = newton_refine(T_fn, candidate, tol)
        except NoConvergence as e:
            logger.warning("Dropping candidate %s: %s", candidate, e.message)
            rejected.append({"candidate": complex(candidate), "reason": "no_convergence"})
            continue
        if not contour.contains(lam):
            logger.debug("Candidate %s refined to %s outside the contour", candidate, lam)
            rejected.append({"candidate": complex(candidate), "reason": "left_contour"})
            continue
        if lower_half_only and lam.imag >= -tol.residual * max(1.0, abs(lam)):
            logger.warning("Dropping non-physical candidate %s with Im >= 0", lam)
            rejected.append({"candidate": complex(lam), "reason": "upper_half_plane"})
            continue
        refined.append((lam, iterations))

    results = []
    for cluster in _cluster(refined, tol.dedupe):
        lam, iterations = cluster[0]
        result = characterize(T_fn, lam, len(cluster), iterations, weights, tol)
        if result.residual > tol.residual:
            logger.warning("Dropping %s: residual %.2e above tolerance", lam, result.residual)
            rejected.append({"candidate": complex(lam), "reason": "residual"})
            continue
        results.append(result)
    results.sort(key=lambda res: (round(res.lam.real, 10), round(res.lam.imag, 10)))
    return SearchReport(contour=contour, resonances=results, rank=data.rank, rejected=rejected)


def find_resonances(
    T_fn: MatrixFunction,
    contour: ContourSpec,
    seed: int | np.random.Generator | None = None,
    tolerances: Tolerances | None = None,
    threads: int = 1,
    weights: np.ndarray | None = None,
    lower_half_only: bool = True,
) -> SearchReport:
    """Locate the poles of T^{-1} inside ``contour``.

    The radius grows slightly when a node hits a pole or a converged pole sits
    within the contact tolerance of the contour.

    Args:
        T_fn: Matrix family z -> T(z).
        contour: Search circle.
        seed: Seed (or generator) for the probe block.
        tolerances: Solver thresholds.
        threads: Worker threads for the contour node solves.
        weights: Quadrature weights for orthonormalizing null vectors.
        lower_half_only: Drop candidates with Im >= 0.

    Returns:
        SearchReport with converged resonances sorted by real then imaginary part.

    Raises:
        ContourThroughPole: If re-sizing the contour does not clear the pole.
    """
    tol = tolerances or Tolerances()
    rng = _make_rng(seed)
    current = contour
    for attempt in range(MAX_CONTOUR_RETRIES + 1):
        try:
            report = _search_once(T_fn, current, rng, tol, threads, weights, lower_half_only)
        except ContourThroughPole as e:
            if attempt == MAX_CONTOUR_RETRIES:
                raise
            logger.warning("Contour through pole at %s; growing radius", e.details.get("node"))
            current = current.grown(1.0 + 10 * tol.contact)
            continue
        touching = [r.lam for r in report.resonances if current.clearance(r.lam) < tol.contact * current.radius]
        if touching and attempt < MAX_CONTOUR_RETRIES:
            logger.warning("Resonance %s within contact distance of the contour; growing radius", touching[0])
            current = current.grown(1.0 + 10 * tol.contact)
            continue
        return report
    raise AssertionError("unreachable")


def cover_rectangle(
    region: tuple[float, float, float, float], radius: float, points: int = 64, probe_rank: int = 8
) -> list[ContourSpec]:
    """Circles of the given radius whose union covers the rectangle [re_min, re_max] x [im_min, im_max]."""
    re_min, re_max, im_min, im_max = region
    side = radius * np.sqrt(2.0)
    n_re = max(1, math.ceil((re_max - re_min) / side))
    n_im = max(1, math.ceil((im_max - im_min) / side))
    step_re = (re_max - re_min) / n_re
    step_im = (im_max - im_min) / n_im
    return [
        ContourSpec(
            complex(re_min + (i + 0.5) * step_re, im_min + (j + 0.5) * step_im),
            radius,
            points,
            probe_rank,
        )
        for j in range(n_im)
        for i in range(n_re)
    ]


def find_resonances_in_rectangle(
    T_fn: MatrixFunction,
    region: tuple[float, float, float, float],
    radius: float = 0.5,
    points: int = 64,
    probe_rank: int = 8,
    seed: int | None = None,
    tolerances: Tolerances | None = None,
    threads: int = 1,
    weights: np.ndarray | None = None,
) -> list[ResonanceResult]:
    """Union of circle searches covering a rectangle, deduplicated and clipped to it."""
    tol = tolerances or Tolerances()
    rng = _make_rng(seed)
    re_min, re_max, im_min, im_max = region
    merged: list[ResonanceResult] = []
    for contour in cover_rectangle(region, radius, points, probe_rank):
        for result in find_resonances(T_fn, contour, rng, tol, threads, weights).resonances:
            if not (re_min <= result.lam.real <= re_max and im_min <= result.lam.imag <= im_max):
                continue
            if any(abs(result.lam - other.lam) < tol.dedupe * max(1.0, abs(other.lam)) for other in merged):
                continue
            merged.append(result)
    merged.sort(key=lambda res: (round(res.lam.real, 10), round(res.lam.imag, 10)))
    return merged


@dataclass
class TrackedResonance:
    """Resonances of T_eps found around an unperturbed pole."""

    epsilon: float
    radius: float
    resonances: list[ResonanceResult]


def track_resonance(
    family: Callable[[float], MatrixFunction],
    base: ResonanceResult,
    epsilons: Sequence[float],
    predicted_shifts: Sequence[float] | None = None,
    points: int = 64,
    probe_rank: int = 8,
    seed: int | None = None,
    tolerances: Tolerances | None = None,
    threads: int = 1,
    weights: np.ndarray | None = None,
) -> list[TrackedResonance]:
    """Follow an unperturbed resonance through an epsilon sweep.

    For each epsilon the search circle is centred at ``base.lam`` with radius
    max(5 |predicted shift|, 1e-4).

    Raises:
        CountMismatch: If the geometric multiplicities found do not add up to base.multiplicity.
    """
    tol = tolerances or Tolerances()
    tracked = []
    for idx, eps in enumerate(epsilons):
        shift = abs(predicted_shifts[idx]) if predicted_shifts is not None else 0.0
        radius = max(TRACK_RADIUS_FACTOR * shift, TRACK_MIN_RADIUS)
        contour = ContourSpec(base.lam, radius, points, max(probe_rank, 2 * base.algebraic_count))
        report = find_resonances(family(eps), contour, seed, tol, threads, weights)
        count = sum(r.multiplicity for r in report.resonances)
        if count != base.multiplicity:
            raise CountMismatch(
                "Number of perturbed resonances differs from the unperturbed multiplicity",
                epsilon=eps,
                expected=base.multiplicity,
                found=count,
                radius=radius,
                candidates=[r.lam for r in report.resonances],
            )
        logger.info("eps=%g: tracked %s", eps, [r.lam for r in report.resonances])
        tracked.append(TrackedResonance(epsilon=float(eps), radius=radius, resonances=report.resonances))
    return tracked
