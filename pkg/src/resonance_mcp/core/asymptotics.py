"""Leading-order resonance shifts caused by small inclusions.

Notation: u^l are the boundary null vectors of T(lam), v^l their interior
Helmholtz extensions, z_i the inclusion centres, P_i = gamma1 (1 - gamma1/tau_i) M_i
with M_i the polarization tensor of the reference shape B_i.

Two normalizations of the averaged first-order shift are available:
- ``averaged``: -eps^2 / m * sum_j sum_i sum_l c_jl grad v^j(z_i) . P_i grad v^l(z_i)
- ``residue`` (default): the shifts are the eigenvalues of -B^{-1} A where
  A_jk = eps^2 sum_i grad v^k(z_i) . P_i grad W^j(z_i), W^j = sum_l conj(c_jl) v^l
  and B_jk = <T'(lam) u^k, u^{j*}>.
"""

import cmath
import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.linalg as la

from ..errors import AscentMismatch, IllConditioned, SingularGram, TooCloseToBoundary
from .dtn import DtnMap, SceneGrids, build_scene_grids, dtn_homogeneous
from .geometry import BoundaryGrid, Scene
from .nep import MatrixFunction, ResonanceResult, central_derivative
from .polarization import PolarizationTensor
from .potentials import assemble_single_layer
from .specfun import Kernel, double_layer_gradient_x, green, green_gradient_x, green_gradient_y
from .transfer import JumpMode, assemble_T, assemble_T_dual, assemble_T_eps, assemble_T_eps_dual, sobolev_norm

logger = logging.getLogger(__name__)

ShiftMode = Literal["residue", "averaged"]

SPACE_DIMENSION = 2
GRAM_CONDITION_LIMIT = 1e12
BOUNDARY_CLEARANCE = 5.0  # in node spacings


# ============================================================================
# Dual basis
# ============================================================================


@dataclass(frozen=True)
class DualBasis:
    """Dual vectors u^{j*} spanning the null space of T*(lam)."""

    vectors: np.ndarray  # columns u^{j*}
    densities: np.ndarray  # columns conj(S^lam)^{-1} conj(u^k)
    gram: np.ndarray  # A_ki = <psi_k, u^i>
    coefficients: np.ndarray  # c = A^{-1}

    def biorthogonality(self, null_vectors: np.ndarray, grid: BoundaryGrid) -> np.ndarray:
        """Matrix [i, j] = <u^i, u^{j*}>."""
        return null_vectors.T @ (grid.ds[:, None] * np.conj(self.vectors))

    def membership_residual(self, dual_matrix: np.ndarray) -> float:
        """max_j ||T* u^{j*}|| / (||T*|| ||u^{j*}||)."""
        norm = np.linalg.norm(dual_matrix, 2)
        image = dual_matrix @ self.vectors
        ratios = np.linalg.norm(image, axis=0) / (norm * np.linalg.norm(self.vectors, axis=0))
        return float(np.max(ratios))


def dual_basis(
    null_vectors: np.ndarray, grid: BoundaryGrid, lam: complex, gamma2: float
) -> DualBasis:
    """Dual basis built from the reflected single layer S^{-conj(lam)} = conj(S^lam).

    Raises:
        IllConditioned: If the single layer is not safely invertible.
        SingularGram: If the Gram matrix has condition above 1e12.
    """
    single = assemble_single_layer(grid, grid, Kernel.helmholtz(lam, gamma2)).matrix
    reflected = np.conj(single)
    condition = np.linalg.cond(reflected)
    if condition > GRAM_CONDITION_LIMIT:
        raise IllConditioned("Reflected single layer is not invertible", condition=float(condition))
    densities = la.solve(reflected, np.conj(null_vectors))
    gram = densities.T @ (grid.ds[:, None] * np.conj(null_vectors))
    gram_condition = np.linalg.cond(gram)
    if gram_condition > GRAM_CONDITION_LIMIT:
        raise SingularGram(
            "Dual-basis Gram matrix is numerically singular", condition=float(gram_condition)
        )
    coefficients = la.inv(gram)
    vectors = densities @ coefficients.T
    logger.debug("Dual basis at %s: cond(A)=%.3e", lam, gram_condition)
    return DualBasis(vectors=vectors, densities=densities, gram=gram, coefficients=coefficients)


# ============================================================================
# Interior extension
# ============================================================================


def _check_interior(grid: BoundaryGrid, points: np.ndarray) -> None:
    clearance = grid.distance_to(points)
    inside = grid.contains(points)
    limit = BOUNDARY_CLEARANCE * grid.spacing
    bad = np.flatnonzero(~inside | (clearance <= limit))
    if bad.size:
        raise TooCloseToBoundary(
            "Interior evaluation point too close to (or outside) the boundary",
            point=points[bad[0]].tolist(),
            distance=float(clearance[bad[0]]),
            required=float(limit),
        )


def _traces(trace: np.ndarray, grid: BoundaryGrid, omega: complex, gamma1: float, dtn: DtnMap | None):
    dtn = dtn if dtn is not None else dtn_homogeneous(grid, omega, gamma1)
    return np.asarray(trace), dtn.matrix @ trace


def interior_field(
    trace: np.ndarray,
    grid: BoundaryGrid,
    omega: complex,
    gamma1: float,
    points: np.ndarray,
    dtn: DtnMap | None = None,
) -> np.ndarray:
    """v(z) for the solution of gamma1 Laplace v + omega^2 v = 0 with v = trace on the boundary.

    Green representation v(z) = int (Phi q - d/dnu_y Phi f) ds with
    Phi = (i/4) H0(k1 r) and q = N f. Accepts several columns of traces.
    """
    points = np.atleast_2d(points)
    _check_interior(grid, points)
    f, q = _traces(trace, grid, omega, gamma1, dtn)
    kernel = Kernel.helmholtz(omega / np.sqrt(gamma1), 1.0)
    phi = green(kernel, points[:, None, :], grid.nodes[None, :, :])
    dphi = np.einsum("pkc,kc->pk", green_gradient_y(kernel, points[:, None, :], grid.nodes[None, :, :]), grid.normals)
    return (phi * grid.ds) @ q - (dphi * grid.ds) @ f


def interior_gradient(
    trace: np.ndarray,
    grid: BoundaryGrid,
    omega: complex,
    gamma1: float,
    points: np.ndarray,
    dtn: DtnMap | None = None,
) -> np.ndarray:
    """grad v(z) from the differentiated Green representation.

    Returns:
        Array of shape (n_points, 2) for a single trace, or (n_points, 2, n_traces).

    Raises:
        TooCloseToBoundary: If a point lies within five node spacings of the boundary.
    """
    points = np.atleast_2d(points)
    _check_interior(grid, points)
    f, q = _traces(trace, grid, omega, gamma1, dtn)
    kernel = Kernel.helmholtz(omega / np.sqrt(gamma1), 1.0)
    z = points[:, None, :]
    y = grid.nodes[None, :, :]
    grad_phi = green_gradient_x(kernel, z, y) * grid.ds[None, :, None]
    grad_dphi = double_layer_gradient_x(kernel, z, y, grid.normals[None, :, :]) * grid.ds[None, :, None]
    return np.einsum("pkc,k...->pc...", grad_phi, q) - np.einsum("pkc,k...->pc...", grad_dphi, f)


def dipole_response(
    grid: BoundaryGrid,
    omega: complex,
    gamma1: float,
    gamma2: float,
    center: np.ndarray,
    dtn: DtnMap | None = None,
    single_layer: np.ndarray | None = None,
) -> np.ndarray:
    """Boundary response Y(x) = -gamma1 S[d/dnu grad_z G_D(., z)](x) of a dipole at z.

    G_D is the interior Dirichlet Green function of gamma1 Laplace + omega^2, so
    d/dnu grad_z G_D = d/dnu grad_z Gamma - N[grad_z Gamma(., z)].

    Returns:
        Array of shape (grid.n, 2), one column per dipole direction.
    """
    center = np.asarray(center, dtype=float)
    _check_interior(grid, center[None, :])
    dtn = dtn if dtn is not None else dtn_homogeneous(grid, omega, gamma1)
    if single_layer is None:
        single_layer = assemble_single_layer(grid, grid, Kernel.helmholtz(omega, gamma2)).matrix
    kernel = Kernel.helmholtz(omega, gamma1)
    z = np.broadcast_to(center, grid.nodes.shape)
    grad_gamma = green_gradient_x(kernel, z, grid.nodes)
    normal_grad = double_layer_gradient_x(kernel, z, grid.nodes, grid.normals)
    flux = normal_grad - dtn.matrix @ grad_gamma
    return -gamma1 * single_layer @ flux


# ============================================================================
# Shift predictions
# ============================================================================


def contrast_factor(gamma1: float, tau: float) -> float:
    """gamma1 (1 - gamma1 / tau)."""
    return gamma1 * (1.0 - gamma1 / tau)


@dataclass(frozen=True)
class ShiftInputs:
    """Epsilon-independent ingredients of the shift formulas."""

    lam: complex
    ascent: int
    null_vectors: np.ndarray
    dual: DualBasis
    gradients: np.ndarray  # (m_geo, n_inclusions, 2): grad v^l(z_i)
    dipoles: tuple[np.ndarray, ...]  # P_i = contrast_factor * M_i
    derivative_pairing: np.ndarray | None  # B_jk = <T'(lam) u^k, u^{j*}>


@dataclass(frozen=True)
class AsymptoticPrediction:
    """Predicted first-order shift at one epsilon."""

    lam: complex
    epsilon: float
    mode: ShiftMode
    average_shift: complex
    shifts: np.ndarray  # per-branch first-order shifts
    per_inclusion: np.ndarray  # contribution of each inclusion to the average shift
    gradients: np.ndarray = field(repr=False)

    @property
    def predicted(self) -> complex:
        return self.lam + self.average_shift


def prepare_shift_inputs(
    resonance: ResonanceResult,
    grid: BoundaryGrid,
    scene: Scene,
    tensors: Sequence[PolarizationTensor],
    T_fn: MatrixFunction | None = None,
) -> ShiftInputs:
    """Gradients, dual basis and derivative pairing at an unperturbed resonance."""
    if len(tensors) != len(scene.inclusions):
        raise ValueError("One polarization tensor per inclusion is required")
    lam = resonance.lam
    U = resonance.null_vectors
    dual = dual_basis(U, grid, lam, scene.gamma2)
    dtn = dtn_homogeneous(grid, lam, scene.gamma1)
    centers = np.array([inc.center for inc in scene.inclusions], dtype=float).reshape(-1, 2)
    if len(centers):
        grads = interior_gradient(U, grid, lam, scene.gamma1, centers, dtn)  # (n_inc, 2, m)
        gradients = np.transpose(grads, (2, 0, 1))
    else:
        gradients = np.zeros((U.shape[1], 0, 2), dtype=complex)
    dipoles = tuple(
        contrast_factor(scene.gamma1, t.effective_contrast) * t.matrix for t in tensors
    )
    pairing = None
    if T_fn is not None:
        derivative = central_derivative(T_fn, lam)
        pairing = np.conj(dual.vectors).T @ (grid.ds[:, None] * (derivative @ U))
    return ShiftInputs(lam, resonance.ascent, U, dual, gradients, dipoles, pairing)


def _averaged_terms(inputs: ShiftInputs) -> np.ndarray:
    """R[j, i] = sum_l c_jl grad v^j(z_i) . P_i grad v^l(z_i)."""
    c = inputs.dual.coefficients
    g = inputs.gradients
    m, n_inc = g.shape[0], g.shape[1]
    terms = np.zeros((m, n_inc), dtype=complex)
    for i, P in enumerate(inputs.dipoles):
        for j in range(m):
            terms[j, i] = sum(c[j, l] * g[j, i] @ P @ g[l, i] for l in range(m))
    return terms


def predict_shift_simple(inputs: ShiftInputs, epsilon: float, mode: ShiftMode = "residue") -> AsymptoticPrediction:
    """Averaged first-order shift of the resonances near a semisimple lam.

    Raises:
        AscentMismatch: If the resonance has ascent > 1.
    """
    if inputs.ascent != 1:
        raise AscentMismatch(
            "Averaged shift formula requires ascent 1; use predict_shift_general",
            ascent=inputs.ascent,
        )
    eps2 = epsilon**SPACE_DIMENSION
    m = inputs.null_vectors.shape[1]

    if mode == "averaged":
        terms = _averaged_terms(inputs)
        per_inclusion = -eps2 * terms.sum(axis=0) / m
        shifts = -eps2 * terms.sum(axis=1)
        average = complex(per_inclusion.sum())
    elif mode == "residue":
        if inputs.derivative_pairing is None:
            raise ValueError("Residue normalization needs T_fn when preparing the inputs")
        g = inputs.gradients
        w = np.einsum("jl,lic->jic", np.conj(inputs.dual.coefficients), g)
        B = inputs.derivative_pairing
        blocks = [eps2 * np.einsum("kc,cd,jd->jk", g[:, i, :], P, w[:, i, :]) for i, P in enumerate(inputs.dipoles)]
        total = sum(blocks) if blocks else np.zeros((m, m), dtype=complex)
        shifts = la.eigvals(-la.solve(B, total))
        per_inclusion = np.array([-np.trace(la.solve(B, blk)) / m for blk in blocks], dtype=complex)
        average = complex(-np.trace(la.solve(B, total)) / m)
    else:
        raise ValueError(f"Unknown shift mode {mode!r}")

    return AsymptoticPrediction(
        lam=inputs.lam,
        epsilon=float(epsilon),
        mode=mode,
        average_shift=average,
        shifts=np.sort_complex(np.asarray(shifts, dtype=complex)),
        per_inclusion=np.asarray(per_inclusion, dtype=complex),
        gradients=inputs.gradients,
    )


def predict_shift_general(inputs: ShiftInputs, epsilon: float, j: int) -> list[complex]:
    """All alpha branches lam + (-eps^2 R_j)^{1/alpha} e^{2 pi i k / alpha} for eigenfunction j."""
    alpha = inputs.ascent
    if alpha < 1:
        raise AscentMismatch("Ascent must be at least 1", ascent=alpha)
    r_j = complex(_averaged_terms(inputs)[j].sum())
    root = cmath.exp(cmath.log(-(epsilon**SPACE_DIMENSION) * r_j) / alpha) if r_j != 0 else 0.0
    return [inputs.lam + root * cmath.exp(2j * cmath.pi * k / alpha) for k in range(alpha)]


# ============================================================================
# Operator expansion checks
# ============================================================================


@dataclass(frozen=True)
class ExpansionRow:
    """(T - T_eps) f against its dipole expansion at one epsilon."""

    epsilon: float
    lhs_norm: float
    rhs_norm: float
    residual: float


def expansion_rhs(
    grid: BoundaryGrid,
    scene: Scene,
    omega: complex,
    trace: np.ndarray,
    tensors: Sequence[PolarizationTensor],
    epsilon: float,
) -> np.ndarray:
    """-eps^2 sum_i grad v(z_i) . P_i Y_i on the outer grid."""
    dtn = dtn_homogeneous(grid, omega, scene.gamma1)
    single = assemble_single_layer(grid, grid, Kernel.helmholtz(omega, scene.gamma2)).matrix
    result = np.zeros(grid.n, dtype=complex)
    for inc, tensor in zip(scene.inclusions, tensors):
        center = np.asarray(inc.center, dtype=float)
        grad = interior_gradient(trace, grid, omega, scene.gamma1, center[None, :], dtn)[0]
        dipole = contrast_factor(scene.gamma1, tensor.effective_contrast) * tensor.matrix
        response = dipole_response(grid, omega, scene.gamma1, scene.gamma2, center, dtn, single)
        result += response @ (dipole.T @ grad)
    return -(epsilon**SPACE_DIMENSION) * result


def verify_expansion_fprop1(
    scene: Scene,
    grid: BoundaryGrid,
    omega: complex,
    trace: np.ndarray,
    tensors: Sequence[PolarizationTensor],
    epsilons: Sequence[float],
    n_inclusion: int = 64,
    mode: JumpMode = "derived",
) -> list[ExpansionRow]:
    """Compare (T - T_eps) f with the polarization-tensor expansion for each epsilon."""
    base = assemble_T(grid, omega, scene.gamma1, scene.gamma2, mode).matrix @ trace
    unit_rhs = expansion_rhs(grid, scene, omega, trace, tensors, 1.0)
    rows = []
    for eps in epsilons:
        scaled = scene.with_epsilon(eps)
        grids = build_scene_grids(scaled, grid.n, n_inclusion, outer=grid)
        lhs = base - assemble_T_eps(scaled, grids, omega, mode).matrix @ trace
        rhs = eps**SPACE_DIMENSION * unit_rhs
        rows.append(
            ExpansionRow(
                epsilon=float(eps),
                lhs_norm=float(np.max(np.abs(lhs))),
                rhs_norm=float(np.max(np.abs(rhs))),
                residual=float(np.max(np.abs(lhs - rhs))),
            )
        )
        logger.debug("fprop1 eps=%g: residual %.3e", eps, rows[-1].residual)
    return rows


@dataclass(frozen=True)
class OperatorDifference:
    epsilon: float
    primal: float  # ||(T_eps - T) f||_{H^1/2}
    dual: float  # ||(T*_eps - T*) g||_{H^1/2}


def operator_differences(
    scene: Scene,
    grid: BoundaryGrid,
    omega: complex,
    trace: np.ndarray,
    dual_trace: np.ndarray,
    epsilons: Sequence[float],
    n_inclusion: int = 64,
    mode: JumpMode = "derived",
) -> list[OperatorDifference]:
    """Pointwise operator convergence in the discrete H^{1/2} norm."""
    T = assemble_T(grid, omega, scene.gamma1, scene.gamma2, mode).matrix
    T_dual = assemble_T_dual(grid, omega, scene.gamma1, scene.gamma2, mode).matrix
    rows = []
    for eps in epsilons:
        scaled = scene.with_epsilon(eps)
        grids: SceneGrids = build_scene_grids(scaled, grid.n, n_inclusion, outer=grid)
        primal = (assemble_T_eps(scaled, grids, omega, mode).matrix - T) @ trace
        dual = (assemble_T_eps_dual(scaled, grids, omega, mode).matrix - T_dual) @ dual_trace
        rows.append(OperatorDifference(float(eps), sobolev_norm(primal), sobolev_norm(dual)))
    return rows


def fit_loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log y against log x (nan if any y <= 0)."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size < 2 or np.any(y <= 0) or np.any(x <= 0):
        return float("nan")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])
