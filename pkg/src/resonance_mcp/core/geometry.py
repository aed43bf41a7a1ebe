"""Parametric curves, Nyström grids and multi-inclusion scenes.

Curves are analytic: every shape provides closed-form first and second
derivatives, which the Kress quadrature in ``potentials`` needs for its
diagonal terms. All curves are counterclockwise, so the normal
``(y', -x') / |p'|`` points outward.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from ..errors import BoundaryTooClose, NonRegularCurve, OverlapError

logger = logging.getLogger(__name__)

CurveKind = Literal["circle", "ellipse", "kite", "star"]
CURVE_KINDS: tuple[str, ...] = ("circle", "ellipse", "kite", "star")

MIN_SPEED = 1e-12
SAFETY_FACTOR = 3.0  # scene margin in units of the largest node spacing

_IDENTITY = (1.0, 0.0, 0.0, 1.0)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array)
    array.setflags(write=False)
    return array


# ============================================================================
# Curves
# ============================================================================


@dataclass(frozen=True)
class ParametricCurve:
    """Smooth closed curve p(t), t in [0, 2*pi).

    The physical curve is ``center + scale * L @ R(orientation) @ base(t)``
    where ``base`` is the reference shape of ``kind`` and ``L`` an optional
    linear map with positive determinant (identity unless ``linear_map`` was used).
    """

    kind: CurveKind = "circle"
    radius: float = 1.0
    semi_axes: tuple[float, float] = (1.0, 1.0)
    amplitude: float = 0.0
    arms: int = 5
    center: tuple[float, float] = (0.0, 0.0)
    orientation: float = 0.0
    scale: float = 1.0
    linear: tuple[float, float, float, float] = _IDENTITY

    def __post_init__(self) -> None:
        if self.kind not in CURVE_KINDS:
            raise ValueError(f"Unknown curve kind {self.kind!r}; expected one of {CURVE_KINDS}")
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if min(self.semi_axes) <= 0:
            raise ValueError("semi_axes must be positive")
        if self.kind == "star" and not abs(self.amplitude) < 1.0:
            raise ValueError("star amplitude must satisfy |amplitude| < 1")
        if self.kind == "star" and self.arms < 1:
            raise ValueError("star arms must be a positive integer")
        if self.scale < 0:
            raise ValueError("scale must be non-negative")
        if np.linalg.det(self.linear_matrix) <= 0:
            raise ValueError("linear map must preserve orientation (positive determinant)")

    @classmethod
    def circle(cls, radius: float = 1.0, center: tuple[float, float] = (0.0, 0.0)) -> "ParametricCurve":
        return cls(kind="circle", radius=radius, center=center)

    @classmethod
    def ellipse(
        cls, a: float, b: float, center: tuple[float, float] = (0.0, 0.0), orientation: float = 0.0
    ) -> "ParametricCurve":
        return cls(kind="ellipse", semi_axes=(a, b), center=center, orientation=orientation)

    @classmethod
    def kite(cls, size: float = 1.0, center: tuple[float, float] = (0.0, 0.0)) -> "ParametricCurve":
        return cls(kind="kite", radius=size, center=center)

    @classmethod
    def star(
        cls,
        radius: float = 1.0,
        amplitude: float = 0.2,
        arms: int = 5,
        center: tuple[float, float] = (0.0, 0.0),
    ) -> "ParametricCurve":
        return cls(kind="star", radius=radius, amplitude=amplitude, arms=arms, center=center)

    @property
    def linear_matrix(self) -> np.ndarray:
        return np.array(self.linear, dtype=float).reshape(2, 2)

    @property
    def shape_id(self) -> str:
        """Short human-readable identifier used in CSV provenance columns."""
        if self.kind == "circle":
            base = f"circle(r={self.radius:g})"
        elif self.kind == "ellipse":
            base = f"ellipse(a={self.semi_axes[0]:g},b={self.semi_axes[1]:g})"
        elif self.kind == "kite":
            base = f"kite(size={self.radius:g})"
        else:
            base = f"star(r={self.radius:g},amp={self.amplitude:g},arms={self.arms})"
        if self.orientation:
            base += f"@{self.orientation:g}rad"
        if self.scale != 1.0:
            base += f"x{self.scale:g}"
        return base

    def affine(self, scale: float, shift: tuple[float, float]) -> "ParametricCurve":
        """Return ``shift + scale * self`` (the map B -> z + eps*B)."""
        cx, cy = self.center
        return replace(
            self,
            center=(shift[0] + scale * cx, shift[1] + scale * cy),
            scale=self.scale * scale,
        )

    def rotated(self, angle: float) -> "ParametricCurve":
        """Rotate about the origin by ``angle`` radians."""
        c, s = np.cos(angle), np.sin(angle)
        rot = np.array([[c, -s], [s, c]])
        if not np.allclose(self.linear_matrix, np.eye(2)):
            return self.linear_map(rot)
        center = rot @ np.asarray(self.center)
        return replace(
            self, orientation=self.orientation + angle, center=(float(center[0]), float(center[1]))
        )

    def linear_map(self, matrix: np.ndarray) -> "ParametricCurve":
        """Return the image of the curve under ``x -> matrix @ x``."""
        matrix = np.asarray(matrix, dtype=float)
        combined = matrix @ self.linear_matrix
        center = matrix @ np.asarray(self.center)
        return replace(
            self,
            center=(float(center[0]), float(center[1])),
            linear=tuple(float(v) for v in combined.ravel()),
        )

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------

    def _base(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Reference shape and its first two derivatives, each of shape (n, 2)."""
        c, s = np.cos(t), np.sin(t)
        if self.kind == "circle":
            r = self.radius
            p = np.stack([r * c, r * s], axis=-1)
            dp = np.stack([-r * s, r * c], axis=-1)
            ddp = -p
        elif self.kind == "ellipse":
            a, b = self.semi_axes
            p = np.stack([a * c, b * s], axis=-1)
            dp = np.stack([-a * s, b * c], axis=-1)
            ddp = -p
        elif self.kind == "kite":
            h = self.radius
            c2, s2 = np.cos(2 * t), np.sin(2 * t)
            p = h * np.stack([c + 0.65 * c2 - 0.65, 1.5 * s], axis=-1)
            dp = h * np.stack([-s - 1.3 * s2, 1.5 * c], axis=-1)
            ddp = h * np.stack([-c - 2.6 * c2, -1.5 * s], axis=-1)
        else:
            k = self.arms
            rho = self.radius * (1.0 + self.amplitude * np.cos(k * t))
            drho = -self.radius * self.amplitude * k * np.sin(k * t)
            ddrho = -self.radius * self.amplitude * k * k * np.cos(k * t)
            p = np.stack([rho * c, rho * s], axis=-1)
            dp = np.stack([drho * c - rho * s, drho * s + rho * c], axis=-1)
            ddp = np.stack(
                [ddrho * c - 2 * drho * s - rho * c, ddrho * s + 2 * drho * c - rho * s], axis=-1
            )
        return p, dp, ddp

    def _frame(self) -> np.ndarray:
        c, s = np.cos(self.orientation), np.sin(self.orientation)
        rot = np.array([[c, -s], [s, c]])
        return self.scale * self.linear_matrix @ rot

    def evaluate(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Evaluate p(t), p'(t), p''(t).

        Args:
            t: Parameter values.

        Returns:
            Three arrays of shape (len(t), 2).
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        p, dp, ddp = self._base(t)
        frame = self._frame()
        return (
            p @ frame.T + np.asarray(self.center),
            dp @ frame.T,
            ddp @ frame.T,
        )

    def points(self, t: np.ndarray) -> np.ndarray:
        return self.evaluate(t)[0]


# ============================================================================
# Grids
# ============================================================================


@dataclass(frozen=True)
class BoundaryGrid:
    """Equispaced Nyström discretization of a closed curve."""

    curve: ParametricCurve
    t: np.ndarray
    nodes: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    speed: np.ndarray
    tangents: np.ndarray
    normals: np.ndarray
    weights: np.ndarray  # trapezoid weights 2*pi/N in the parameter
    label: str = field(default="")

    @property
    def n(self) -> int:
        return int(self.t.size)

    @property
    def ds(self) -> np.ndarray:
        """Arclength quadrature weights, ``weights * speed``."""
        return self.weights * self.speed

    @property
    def length(self) -> float:
        return float(np.sum(self.ds))

    @property
    def area(self) -> float:
        """Enclosed area from the divergence theorem, (1/2) * sum x . nu ds."""
        return float(0.5 * np.sum(np.einsum("ij,ij->i", self.nodes, self.normals) * self.ds))

    @property
    def spacing(self) -> float:
        """Largest distance between consecutive nodes."""
        gaps = np.linalg.norm(np.roll(self.nodes, -1, axis=0) - self.nodes, axis=1)
        return float(gaps.max())

    @property
    def curvature_term(self) -> np.ndarray:
        """``(y' x'' - x' y'') / |p'|^2``, the on-curve limit of the double layer kernel."""
        cross = self.d1[:, 1] * self.d2[:, 0] - self.d1[:, 0] * self.d2[:, 1]
        return cross / self.speed**2

    def distance_to(self, points: np.ndarray) -> np.ndarray:
        """Distance from each point to the nearest grid node."""
        points = np.atleast_2d(points)
        diff = points[:, None, :] - self.nodes[None, :, :]
        return np.sqrt(np.min(np.einsum("ijk,ijk->ij", diff, diff), axis=1))

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Winding-number inside test of the polygon through the nodes."""
        points = np.atleast_2d(points)
        rel = self.nodes[None, :, :] - points[:, None, :]
        angles = np.arctan2(rel[..., 1], rel[..., 0])
        turns = np.diff(np.concatenate([angles, angles[:, :1]], axis=1), axis=1)
        turns = (turns + np.pi) % (2 * np.pi) - np.pi
        return np.abs(turns.sum(axis=1)) > np.pi

    def inner(self, f: np.ndarray, g: np.ndarray) -> complex:
        """Quadrature-weighted L2 inner product <f, g> = sum f conj(g) ds."""
        return complex(np.sum(self.ds * f * np.conj(g)))


def build_grid(curve: ParametricCurve, n: int, label: str = "", check_simple: bool = False) -> BoundaryGrid:
    """Discretize ``curve`` at the nodes t_k = 2*pi*k/n.

    Args:
        curve: The curve to sample.
        n: Number of nodes (even, >= 4).
        label: Identifier recorded on the grid (used in operator metadata).
        check_simple: Also run the pairwise segment intersection scan.

    Returns:
        BoundaryGrid with exact geometric quantities at the nodes.

    Raises:
        ValueError: If n is odd or too small.
        NonRegularCurve: If the speed vanishes at a node or the curve self-intersects.
    """
    if n < 4 or n % 2:
        raise ValueError(f"Grid size must be an even integer >= 4, got {n}")
    if curve.scale == 0:
        raise NonRegularCurve("Curve has zero scale (degenerate inclusion)", curve=curve.shape_id)

    t = 2.0 * np.pi * np.arange(n) / n
    nodes, d1, d2 = curve.evaluate(t)
    speed = np.linalg.norm(d1, axis=1)
    if speed.min() < MIN_SPEED:
        raise NonRegularCurve(
            "Parametrization speed vanishes at a grid node",
            curve=curve.shape_id,
            min_speed=float(speed.min()),
        )
    tangents = d1 / speed[:, None]
    normals = np.stack([tangents[:, 1], -tangents[:, 0]], axis=-1)
    grid = BoundaryGrid(
        curve=curve,
        t=_frozen(t),
        nodes=_frozen(nodes),
        d1=_frozen(d1),
        d2=_frozen(d2),
        speed=_frozen(speed),
        tangents=_frozen(tangents),
        normals=_frozen(normals),
        weights=_frozen(np.full(n, 2.0 * np.pi / n)),
        label=label or curve.shape_id,
    )
    if grid.area <= 0:
        raise NonRegularCurve("Curve is not positively oriented", curve=curve.shape_id)
    if check_simple and not is_simple(grid):
        raise NonRegularCurve("Curve self-intersects at the working grid", curve=curve.shape_id)
    logger.debug("Built grid %s with %d nodes, length %.6g", grid.label, n, grid.length)
    return grid


def is_simple(grid: BoundaryGrid) -> bool:
    """Check that no two non-adjacent chords of the node polygon intersect."""
    a = grid.nodes
    b = np.roll(a, -1, axis=0)
    n = grid.n

    def orient(p: np.ndarray, q: np.ndarray, r: np.ndarray) -> np.ndarray:
        return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (q[..., 1] - p[..., 1]) * (
            r[..., 0] - p[..., 0]
        )

    ai, bi = a[:, None, :], b[:, None, :]
    aj, bj = a[None, :, :], b[None, :, :]
    d1 = orient(ai, bi, aj)
    d2 = orient(ai, bi, bj)
    d3 = orient(aj, bj, ai)
    d4 = orient(aj, bj, bi)
    crossing = (d1 * d2 < 0) & (d3 * d4 < 0)
    idx = np.arange(n)
    gap = np.abs(idx[:, None] - idx[None, :])
    adjacent = (gap <= 1) | (gap == n - 1)
    return not bool(np.any(crossing & ~adjacent))


# ============================================================================
# Scenes
# ============================================================================


@dataclass(frozen=True)
class InclusionSpec:
    """One anisotropic inclusion D_i = z_i + eps * B_i with constant material."""

    center: tuple[float, float]
    shape: ParametricCurve
    gamma: tuple[float, float, float, float]  # row-major symmetric 2x2

    def __post_init__(self) -> None:
        matrix = self.gamma_matrix
        if not np.allclose(matrix, matrix.T, atol=1e-14):
            raise ValueError(f"Inclusion material must be symmetric, got {self.gamma}")
        if np.linalg.eigvalsh(matrix).min() <= 0:
            raise ValueError(f"Inclusion material must be positive definite, got {self.gamma}")

    @classmethod
    def isotropic(
        cls, center: tuple[float, float], shape: ParametricCurve, conductivity: float
    ) -> "InclusionSpec":
        return cls(center=center, shape=shape, gamma=(conductivity, 0.0, 0.0, conductivity))

    @property
    def gamma_matrix(self) -> np.ndarray:
        return np.array(self.gamma, dtype=float).reshape(2, 2)

    @property
    def trace(self) -> float:
        return float(self.gamma[0] + self.gamma[3])

    @property
    def ellipticity(self) -> float:
        """Smallest eigenvalue a_i of the material matrix."""
        return float(np.linalg.eigvalsh(self.gamma_matrix).min())

    def scaled_curve(self, epsilon: float) -> ParametricCurve:
        return self.shape.affine(epsilon, self.center)


@dataclass(frozen=True)
class Scene:
    """Outer boundary, background constants and inclusions at scale epsilon."""

    outer: ParametricCurve
    gamma1: float
    gamma2: float
    inclusions: tuple[InclusionSpec, ...] = ()
    epsilon: float = 0.0

    def __post_init__(self) -> None:
        if self.gamma1 <= 0 or self.gamma2 <= 0:
            raise ValueError("Background constants gamma1, gamma2 must be positive")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        object.__setattr__(self, "inclusions", tuple(self.inclusions))

    @property
    def is_perturbed(self) -> bool:
        return self.epsilon > 0 and len(self.inclusions) > 0

    def with_epsilon(self, epsilon: float) -> "Scene":
        return replace(self, epsilon=epsilon)

    def inclusion_curves(self) -> list[ParametricCurve]:
        return [inc.scaled_curve(self.epsilon) for inc in self.inclusions]


@dataclass(frozen=True)
class SceneReport:
    """Measured separations of a validated scene."""

    margin: float
    center_distances: tuple[float, ...]  # dist(z_j, dOmega)
    boundary_clearances: tuple[float, ...]  # dist(dD_j, dOmega)
    min_pair_distance: float  # inf when fewer than two non-degenerate inclusions


def validate_scene(
    scene: Scene, n_outer: int = 256, n_inclusion: int = 64, d0: float | None = None
) -> SceneReport:
    """Check the separation assumptions of the scene.

    Inclusions must be pairwise disjoint with closures, and every center must lie
    inside the outer boundary at distance at least ``d0``. Both checks are
    carried out on the working grids with a safety margin of three times the
    largest node spacing.

    Args:
        scene: Scene to validate.
        n_outer: Node count on the outer boundary.
        n_inclusion: Node count on each inclusion boundary.
        d0: Minimal admissible distance of a center to the boundary
            (defaults to the safety margin).

    Returns:
        SceneReport with the measured distances.

    Raises:
        OverlapError: If two inclusions overlap or are closer than the margin.
        BoundaryTooClose: If an inclusion reaches the outer boundary margin.
    """
    outer = build_grid(scene.outer, n_outer, label="outer")
    margin = SAFETY_FACTOR * outer.spacing
    d0 = margin if d0 is None else d0

    centers = np.array([inc.center for inc in scene.inclusions], dtype=float).reshape(-1, 2)
    center_distances = outer.distance_to(centers) if len(centers) else np.zeros(0)
    inside = outer.contains(centers) if len(centers) else np.zeros(0, dtype=bool)
    for j, (dist, ok) in enumerate(zip(center_distances, inside)):
        if not ok or dist < d0:
            raise BoundaryTooClose(
                f"Inclusion {j} center is {'outside' if not ok else 'too close to'} the outer boundary",
                inclusion=j,
                distance=float(dist),
                required=float(d0),
            )

    grids: list[BoundaryGrid] = []
    clearances: list[float] = []
    if scene.epsilon > 0:
        for j, curve in enumerate(scene.inclusion_curves()):
            grid = build_grid(curve, n_inclusion, label=f"inclusion{j}")
            local_margin = SAFETY_FACTOR * max(grid.spacing, 0.0)
            clearance = float(outer.distance_to(grid.nodes).min())
            if clearance < max(margin, local_margin) or not np.all(outer.contains(grid.nodes)):
                raise BoundaryTooClose(
                    f"Inclusion {j} reaches the outer boundary margin",
                    inclusion=j,
                    distance=float(center_distances[j]),
                    clearance=clearance,
                    required=float(max(margin, local_margin)),
                )
            grids.append(grid)
            clearances.append(clearance)

    min_pair = float("inf")
    for i in range(len(grids)):
        for j in range(i + 1, len(grids)):
            gi, gj = grids[i], grids[j]
            dist = float(gi.distance_to(gj.nodes).min())
            pair_margin = SAFETY_FACTOR * max(gi.spacing, gj.spacing)
            nested = bool(np.any(gi.contains(gj.nodes)) or np.any(gj.contains(gi.nodes)))
            if nested or dist < pair_margin:
                raise OverlapError(
                    f"Inclusions {i} and {j} overlap",
                    pair=(i, j),
                    distance=dist,
                    required=pair_margin,
                )
            min_pair = min(min_pair, dist)

    report = SceneReport(
        margin=float(margin),
        center_distances=tuple(float(d) for d in center_distances),
        boundary_clearances=tuple(clearances),
        min_pair_distance=min_pair,
    )
    logger.debug("Scene validated: %s", report)
    return report
