"""Configuration for the resonance solver.

Two layers:
- ``SolverSettings``: process-wide defaults read from environment variables
  (optionally from a ``.env`` file).
- ``RunConfig``: the versioned JSON document describing one run (scene,
  contours, tolerances, epsilon grid), checked against the JSON schema in
  ``schema``. Unknown or malformed fields raise ``ConfigError`` naming
  the field path.
"""

import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Literal

from dotenv import load_dotenv

from .core.geometry import InclusionSpec, ParametricCurve, Scene
from .errors import ConfigError
from .schema import (
    CURVE_SCHEMA,
    JUMP_MODES,
    SCHEMA_VERSION,
    TASKS,
    validate_document,
)

# Load environment variables from multiple possible locations
_env_paths = [
    Path.cwd() / ".env",
    Path(__file__).parent.parent.parent / ".env",
    Path.home() / ".env",
]

for env_path in _env_paths:
    if env_path.exists():
        load_dotenv(env_path)
        break

logger = logging.getLogger(__name__)


JumpMode = Literal["derived", "literal"]
ShiftMode = Literal["residue", "averaged"]
ContrastMode = Literal["trace", "mean"]


# ============================================================================
# Environment settings
# ============================================================================


@dataclass
class SolverSettings:
    """Process-wide solver defaults."""

    n_outer: int
    n_inclusion: int
    contour_points: int
    probe_rank: int
    seed: int
    threads: int
    jump_mode: str
    output_dir: Path
    debug: bool


def _env_int(name: str, default: int, minimum: int = 1) -> int:
    raw = os.getenv(name, str(default))
    try:
        value = int(raw)
    except ValueError as e:
        raise ConfigError(f"{name} must be an integer, got {raw!r}", field=name) from e
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}", field=name)
    return value


def get_solver_settings() -> SolverSettings:
    """Get solver settings from environment variables.

    Returns:
        SolverSettings with every value resolved.

    Raises:
        ConfigError: If a variable is present but malformed.
    """
    jump_mode = os.getenv("RESONANCE_JUMP_MODE", "derived").lower()
    if jump_mode not in JUMP_MODES:
        raise ConfigError(
            f"RESONANCE_JUMP_MODE must be one of {JUMP_MODES}, got {jump_mode!r}",
            field="RESONANCE_JUMP_MODE",
        )
    n_outer = _env_int("RESONANCE_N_OUTER", 256, minimum=16)
    n_inclusion = _env_int("RESONANCE_N_INCLUSION", 64, minimum=16)
    for name, value in (("RESONANCE_N_OUTER", n_outer), ("RESONANCE_N_INCLUSION", n_inclusion)):
        if value % 2:
            raise ConfigError(f"{name} must be even, got {value}", field=name)

    return SolverSettings(
        n_outer=n_outer,
        n_inclusion=n_inclusion,
        contour_points=_env_int("RESONANCE_CONTOUR_POINTS", 64, minimum=8),
        probe_rank=_env_int("RESONANCE_PROBE_RANK", 8),
        seed=_env_int("RESONANCE_SEED", 20240601, minimum=0),
        threads=_env_int("RESONANCE_THREADS", 1),
        jump_mode=jump_mode,
        output_dir=Path(os.getenv("RESONANCE_OUTPUT_DIR", "./results")),
        debug=os.getenv("RESONANCE_DEBUG", "false").lower() == "true",
    )


# ============================================================================
# Run configuration schema
# ============================================================================


@dataclass(frozen=True)
class Tolerances:
    """Every numerical threshold used by a run; echoed into the manifest."""

    beyn_rank: float = 1e-8
    null_space: float = 1e-6
    newton_step: float = 1e-12
    newton_max_iter: int = 30
    residual: float = 1e-8
    contact: float = 1e-3
    system_condition: float = 1e12
    pole_condition: float = 1e14
    singular_floor: float = 1e-10
    dedupe: float = 1e-6


@dataclass(frozen=True)
class ContourConfig:
    """Circle in the complex frequency plane."""

    center: complex
    radius: float
    points: int = 64
    probe_rank: int = 8


@dataclass(frozen=True)
class PolarizationJob:
    """One polarization tensor request."""

    shape: ParametricCurve
    gamma_bg: float
    trace_gamma_d: float
    n_grid: int = 128


@dataclass(frozen=True)
class SweepConfig:
    """Epsilon sweep around one unperturbed resonance."""

    epsilons: tuple[float, ...] = (0.2, 0.1, 0.05)
    target: complex | None = None
    probe_omega: complex = 1.0 + 0.0j
    shift_mode: str = "residue"


@dataclass(frozen=True)
class OracleConfig:
    """Disk dispersion root search."""

    modes: tuple[int, ...] = (0, 1, 2, 3)
    region: tuple[float, float, float, float] = (0.5, 4.0, -1.5, -0.01)  # re_min, re_max, im_min, im_max


@dataclass(frozen=True)
class RunConfig:
    """Complete, versioned description of one run."""

    task: str
    scene: Scene
    contours: tuple[ContourConfig, ...] = ()
    n_outer: int = 256
    n_inclusion: int = 64
    seed: int = 20240601
    threads: int = 1
    jump_mode: str = "derived"
    contrast: str = "mean"
    polarization: tuple[PolarizationJob, ...] = ()
    sweep: SweepConfig = field(default_factory=SweepConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    tolerances: Tolerances = field(default_factory=Tolerances)
    output_dir: str = "./results"
    schema_version: int = SCHEMA_VERSION

    def with_overrides(self, **changes: Any) -> "RunConfig":
        """Return a copy with the non-None keyword values applied."""
        return replace(self, **{key: value for key, value in changes.items() if value is not None})

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": self.schema_version,
            "task": self.task,
            "scene": _scene_to_dict(self.scene),
            "contours": [
                {
                    "center": _complex_to_list(c.center),
                    "radius": c.radius,
                    "points": c.points,
                    "probe_rank": c.probe_rank,
                }
                for c in self.contours
            ],
            "n_outer": self.n_outer,
            "n_inclusion": self.n_inclusion,
            "seed": self.seed,
            "threads": self.threads,
            "jump_mode": self.jump_mode,
            "contrast": self.contrast,
            "polarization": [
                {
                    "shape": _curve_to_dict(job.shape),
                    "gamma_bg": job.gamma_bg,
                    "trace_gamma_d": job.trace_gamma_d,
                    "n_grid": job.n_grid,
                }
                for job in self.polarization
            ],
            "sweep": {
                "epsilons": list(self.sweep.epsilons),
                "target": None if self.sweep.target is None else _complex_to_list(self.sweep.target),
                "probe_omega": _complex_to_list(self.sweep.probe_omega),
                "shift_mode": self.sweep.shift_mode,
            },
            "oracle": {"modes": list(self.oracle.modes), "region": list(self.oracle.region)},
            "tolerances": asdict(self.tolerances),
            "output_dir": self.output_dir,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: Any) -> "RunConfig":
        """Validate a configuration document and build the run description.

        Args:
            data: Decoded JSON object.

        Returns:
            RunConfig with defaults filled in.

        Raises:
            ConfigError: On unknown, missing or malformed fields.
        """
        validate_document(data)
        return cls(
            task=data["task"],
            scene=_build_scene(data["scene"]),
            contours=tuple(_build_contour(item) for item in data.get("contours", [])),
            n_outer=int(data.get("n_outer", 256)),
            n_inclusion=int(data.get("n_inclusion", 64)),
            seed=int(data.get("seed", 20240601)),
            threads=int(data.get("threads", 1)),
            jump_mode=data.get("jump_mode", "derived"),
            contrast=data.get("contrast", "mean"),
            polarization=tuple(
                _build_polarization_job(item, f"polarization[{i}]") for i, item in enumerate(data.get("polarization", []))
            ),
            sweep=_build_sweep(data.get("sweep", {})),
            oracle=_build_oracle(data.get("oracle", {})),
            tolerances=Tolerances(**data.get("tolerances", {})),
            output_dir=data.get("output_dir", "./results"),
            schema_version=data.get("schema_version", SCHEMA_VERSION),
        )


def load_run_config(path: str | Path) -> RunConfig:
    """Read a RunConfig from a JSON file.

    Raises:
        ConfigError: If the file is missing, not JSON, or fails validation.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ConfigError(f"Config file not found: {path}", field="--config") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file is not valid JSON: {e}", field="--config") from e
    logger.debug("Loaded run config from %s", path)
    return RunConfig.from_dict(data)


def default_run_config(task: str = "validate", settings: SolverSettings | None = None) -> RunConfig:
    """Bundled unit-disk scene (gamma1 = 2, gamma2 = 1) with one inclusion at (0.3, 0)."""
    settings = settings or get_solver_settings()
    scene = Scene(
        outer=ParametricCurve.circle(1.0),
        gamma1=2.0,
        gamma2=1.0,
        inclusions=(
            InclusionSpec.isotropic(center=(0.3, 0.0), shape=ParametricCurve.circle(1.0), conductivity=3.0),
        ),
    )
    contour = ContourConfig(
        center=2.0 - 0.5j,
        radius=1.0,
        points=settings.contour_points,
        probe_rank=settings.probe_rank,
    )
    return RunConfig(
        task=task,
        scene=scene,
        contours=(contour,),
        n_outer=settings.n_outer,
        n_inclusion=settings.n_inclusion,
        seed=settings.seed,
        threads=settings.threads,
        jump_mode=settings.jump_mode,
        contrast="mean",
        polarization=(PolarizationJob(shape=ParametricCurve.circle(1.0), gamma_bg=1.0, trace_gamma_d=3.0),),
        output_dir=str(settings.output_dir),
    )


def _complex_to_list(value: complex) -> list[float]:
    return [float(value.real), float(value.imag)]


def _curve_to_dict(curve: ParametricCurve) -> dict[str, Any]:
    data: dict[str, Any] = {}
    for f in fields(curve):
        value = getattr(curve, f.name)
        data[f.name] = list(value) if isinstance(value, tuple) else value
    return data


def _scene_to_dict(scene: Scene) -> dict[str, Any]:
    return {
        "outer": _curve_to_dict(scene.outer),
        "gamma1": scene.gamma1,
        "gamma2": scene.gamma2,
        "epsilon": scene.epsilon,
        "inclusions": [
            {
                "center": list(inc.center),
                "shape": _curve_to_dict(inc.shape),
                "gamma": [list(inc.gamma[:2]), list(inc.gamma[2:])],
            }
            for inc in scene.inclusions
        ],
    }


# ============================================================================
# Builders over validated documents
# ============================================================================


def _pair(value: list[float]) -> complex:
    return complex(float(value[0]), float(value[1]))


def _build_curve(data: dict[str, Any], path: str) -> ParametricCurve:
    values = {key: tuple(float(v) for v in value) if isinstance(value, list) else value for key, value in data.items()}
    try:
        return ParametricCurve(**values)
    except ValueError as e:
        raise ConfigError(f"{path}.linear: {e}", field=f"{path}.linear") from e


def _material(value: float | list[list[float]]) -> tuple[float, float, float, float]:
    if isinstance(value, list):
        return (float(value[0][0]), float(value[0][1]), float(value[1][0]), float(value[1][1]))
    return (float(value), 0.0, 0.0, float(value))


def _build_scene(data: dict[str, Any]) -> Scene:
    inclusions = []
    for i, item in enumerate(data.get("inclusions", [])):
        path = f"scene.inclusions[{i}]"
        shape = _build_curve(item["shape"], f"{path}.shape")
        try:
            inclusions.append(
                InclusionSpec(center=tuple(float(v) for v in item["center"]), shape=shape, gamma=_material(item["gamma"]))
            )
        except ValueError as e:
            raise ConfigError(f"{path}.gamma: {e}", field=f"{path}.gamma") from e
    return Scene(
        outer=_build_curve(data["outer"], "scene.outer"),
        gamma1=float(data["gamma1"]),
        gamma2=float(data["gamma2"]),
        inclusions=tuple(inclusions),
        epsilon=float(data.get("epsilon", 0.0)),
    )


def _build_contour(data: dict[str, Any]) -> ContourConfig:
    return ContourConfig(
        center=_pair(data["center"]),
        radius=float(data["radius"]),
        points=int(data.get("points", 64)),
        probe_rank=int(data.get("probe_rank", 8)),
    )


def _build_polarization_job(data: dict[str, Any], path: str) -> PolarizationJob:
    return PolarizationJob(
        shape=_build_curve(data["shape"], f"{path}.shape"),
        gamma_bg=float(data["gamma_bg"]),
        trace_gamma_d=float(data["trace_gamma_d"]),
        n_grid=int(data.get("n_grid", 128)),
    )


def _build_sweep(data: dict[str, Any]) -> SweepConfig:
    target = data.get("target")
    return SweepConfig(
        epsilons=tuple(float(e) for e in data.get("epsilons", SweepConfig.epsilons)),
        target=None if target is None else _pair(target),
        probe_omega=_pair(data["probe_omega"]) if "probe_omega" in data else SweepConfig.probe_omega,
        shift_mode=data.get("shift_mode", "residue"),
    )


def _build_oracle(data: dict[str, Any]) -> OracleConfig:
    region = tuple(float(v) for v in data.get("region", OracleConfig.region))
    if region[0] >= region[1] or region[2] >= region[3]:
        raise ConfigError("oracle.region must be [re_min, re_max, im_min, im_max]", field="oracle.region")
    return OracleConfig(modes=tuple(int(m) for m in data.get("modes", OracleConfig.modes)), region=region)


# ============================================================================
# Entry points for the tool surfaces
# ============================================================================


def resolve_run_config(task: str, document: dict[str, Any] | None = None) -> RunConfig:
    """RunConfig for ``task`` from an optional JSON document (bundled scene when omitted).

    Raises:
        ConfigError: If the document fails validation.
    """
    if task not in TASKS:
        raise ConfigError(f"task must be one of {TASKS}, got {task!r}", field="task")
    if document is None:
        return default_run_config(task)
    return RunConfig.from_dict({**document, "task": task})


def curve_from_dict(data: dict[str, Any], path: str = "shape") -> ParametricCurve:
    """Validate and build one curve, e.g. ``{"kind": "ellipse", "semi_axes": [1, 0.5]}``."""
    validate_document(data, CURVE_SCHEMA, prefix=path)
    return _build_curve(data, path)
