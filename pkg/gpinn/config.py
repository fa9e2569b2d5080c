"""Configuration system for gpinn.

Supports loading from YAML or JSON files, dicts, or programmatic construction
via Pydantic models. The config drives geometry generation, the problem
definition, network/optimizer settings and where run artifacts are written.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, Field, model_validator

from gpinn.core.errors import GeometryError

# Embedding cache location, overridable for CI sandboxes and shared clusters.
CACHE_ENV_VAR = "GPINN_CACHE_DIR"
DEFAULT_CACHE_DIR = Path.home() / ".cache" / "gpinn" / "embeddings"


def cache_dir(override: str | Path | None = None) -> Path:
    """Resolve the embedding cache directory (argument > env var > default)."""
    if override:
        return Path(override)
    env = os.environ.get(CACHE_ENV_VAR)
    if env:
        return Path(env)
    return DEFAULT_CACHE_DIR


# ---------------------------------------------------------------------------
# Geometry
# ---------------------------------------------------------------------------


class WallSlit(BaseModel):
    """A vertical interior wall, modelled as a rectangular hole."""

    x: float
    y_start: float
    y_end: float


class HouseGeometry(BaseModel):
    """The 'house': a square room split by two wall slits, with a heat source.

    The window is a segment of the bottom edge held at a fixed temperature.
    """

    side: float = Field(default=1.0, gt=0)
    wall_thickness: float = Field(default=0.04, gt=0)
    left_wall: WallSlit = Field(default_factory=lambda: WallSlit(x=0.33, y_start=0.0, y_end=0.7))
    right_wall: WallSlit = Field(
        default_factory=lambda: WallSlit(x=0.66, y_start=0.3, y_end=1.0)
    )
    source_center: tuple[float, float] = (0.1, 0.85)
    source_radius: float = Field(default=0.08, gt=0)
    window: tuple[float, float] = (0.35, 0.65)

    def wall_boxes(self) -> list[tuple[float, float, float, float]]:
        """Wall slabs as (x0, x1, y0, y1) rectangles."""
        half = 0.5 * self.wall_thickness
        return [
            (w.x - half, w.x + half, w.y_start, w.y_end)
            for w in (self.left_wall, self.right_wall)
        ]


class PlateGeometry(BaseModel):
    """Rectangular plate with an optional single edge crack along y = crack_tip[1]."""

    width: float = Field(default=1.0, gt=0)
    height: float = Field(default=1.0, gt=0)
    crack_tip: tuple[float, float] = (0.5, 0.5)
    crack_mouth: Literal["left", "right"] = "left"
    tip_refinement: float = Field(default=8.0, ge=1.0)

    @property
    def crack_length(self) -> float:
        if self.crack_mouth == "left":
            return self.crack_tip[0]
        return self.width - self.crack_tip[0]


GeometryKind = Literal["house", "crack_plate", "plate", "unit_square"]


class GeometryConfig(BaseModel):
    """Which domain to mesh and at what resolution.

    ``mesh_path`` loads a mesh from disk instead of generating one; ``kind``
    still selects which problem-specific tags are expected.
    """

    kind: GeometryKind = "house"
    h: float = Field(default=0.05, gt=0)
    house: HouseGeometry = Field(default_factory=HouseGeometry)
    plate: PlateGeometry = Field(default_factory=PlateGeometry)
    mesh_path: str | None = None

    def check(self) -> None:
        """Raise GeometryError if the selected geometry cannot be meshed."""
        if self.kind == "house":
            _check_house(self.house)
        elif self.kind == "crack_plate":
            _check_plate(self.plate, cracked=True)
        elif self.kind == "plate":
            _check_plate(self.plate, cracked=False)


def _check_house(house: HouseGeometry) -> None:
    cx, cy = house.source_center
    r = house.source_radius
    side = house.side
    if not (r < cx < side - r and r < cy < side - r):
        raise GeometryError("Source disc must lie strictly inside the house")
    for name, (x0, x1, y0, y1) in zip(("left", "right"), house.wall_boxes()):
        if not (0.0 < x0 < x1 < side) or not (0.0 <= y0 < y1 <= side):
            raise GeometryError(f"{name} wall slit leaves the house")
        # Distance from the disc centre to the wall rectangle
        dx = max(x0 - cx, 0.0, cx - x1)
        dy = max(y0 - cy, 0.0, cy - y1)
        if math.hypot(dx, dy) <= r:
            raise GeometryError(f"{name} wall slit crosses the source disc")
    a, b = house.window
    if not (0.0 <= a < b <= side):
        raise GeometryError(f"Window segment {house.window} is not on the bottom edge")
    for x0, x1, y0, _ in house.wall_boxes():
        if y0 == 0.0 and a < x1 and b > x0:
            raise GeometryError("Window segment overlaps a wall slit")


def _check_plate(plate: PlateGeometry, cracked: bool) -> None:
    if not cracked:
        return
    tx, ty = plate.crack_tip
    if not (0.0 < ty < plate.height):
        raise GeometryError("Crack tip must lie strictly inside the plate")
    if plate.crack_length <= 0.0 or plate.crack_length >= plate.width:
        raise GeometryError(
            f"Crack length {plate.crack_length} must be in (0, plate width {plate.width})"
        )


# ---------------------------------------------------------------------------
# Problems
# ---------------------------------------------------------------------------


class HeatSettings(BaseModel):
    """Poisson heat problem settings (Delta u = f)."""

    source_strength: float = 1.0
    dirichlet_value: float = 0.0
    neumann_value: float = 0.0
    manufactured: str | None = None


class ElasticitySettings(BaseModel):
    """Linear elasticity crack problem settings."""

    youngs_modulus: float = Field(default=1.0, gt=0)
    poisson_ratio: float = Field(default=0.3, gt=0, lt=0.5)
    model: Literal["plane_stress", "plane_strain"] = "plane_stress"
    traction: tuple[float, float] = (0.0, 1.0)
    dirichlet_displacement: tuple[float, float] = (0.0, 0.0)
    dirichlet_mode: Literal["clamped", "roller"] = "clamped"


# ---------------------------------------------------------------------------
# Network / optimization / sampling
# ---------------------------------------------------------------------------


class NetworkConfig(BaseModel):
    """Fully connected tanh network; input width is derived from the mode."""

    hidden: list[int] = Field(default_factory=lambda: [64, 64, 64])
    activation: Literal["tanh"] = "tanh"
    seed: int | None = None

    @model_validator(mode="after")
    def _check_hidden(self) -> NetworkConfig:
        if not self.hidden or any(w < 1 for w in self.hidden):
            raise ValueError("network.hidden needs at least one layer of width >= 1")
        return self


class OptimizerConfig(BaseModel):
    """Adam followed by optional L-BFGS refinement."""

    adam_iterations: int = Field(default=20000, ge=0)
    lbfgs_iterations: int = Field(default=2000, ge=0)
    learning_rate: float = Field(default=1e-3, gt=0)
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = Field(default=1e-8, gt=0)
    lbfgs_memory: int = Field(default=20, ge=1)
    lbfgs_learning_rate: float = Field(default=1.0, gt=0)
    tol: float = Field(default=0.0, ge=0)
    patience: int = Field(default=100, ge=1)

    @model_validator(mode="after")
    def _check_budget(self) -> OptimizerConfig:
        if self.adam_iterations + self.lbfgs_iterations < 1:
            raise ValueError("optimizer needs an iteration budget >= 1")
        return self


class SamplingConfig(BaseModel):
    """Collocation counts (per tagged boundary kind) and resampling period."""

    n_interior: int = Field(default=4096, ge=1)
    n_data: int = Field(default=0, ge=0)
    n_dirichlet: int = Field(default=512, ge=0)
    n_neumann: int = Field(default=512, ge=0)
    resample_every: int = Field(default=500, ge=1)
    domain_order: Literal[1, 3] = 3
    boundary_order: Literal[1, 2] = 2


class LossWeights(BaseModel):
    """Scaling factors of the composite loss (pde, data, ic, bc)."""

    pde: float = Field(default=1.0, ge=0)
    data: float = Field(default=0.0, ge=0)
    ic: float = Field(default=0.0, ge=0)
    bc: float = Field(default=1.0, ge=0)


class EmbeddingConfig(BaseModel):
    """Fiedler embedding solve and cache settings."""

    tol: float = Field(default=1e-10, gt=0)
    max_iterations: int = Field(default=10000, ge=1)
    method: Literal["inverse_iteration", "dense"] = "inverse_iteration"
    differentiation_mode: Literal["frozen", "chain_rule"] = "frozen"
    cache: bool = True
    cache_dir: str | None = None


class ReferenceConfig(BaseModel):
    """Reference FEM resolution and evaluation grid."""

    h: float = Field(default=1.0 / 256, gt=0)
    eval_grid: int = Field(default=128, ge=2)


class LoggingConfig(BaseModel):
    """Logging configuration."""

    level: str = "INFO"
    log_every: int = Field(default=500, ge=1)


# ---------------------------------------------------------------------------
# Top level
# ---------------------------------------------------------------------------


class ExperimentConfig(BaseModel):
    """Top-level gpinn experiment configuration.

    Can be constructed programmatically, from a dict, or loaded from YAML/JSON.

    Examples:
        # Programmatic
        config = ExperimentConfig(
            problem="heat",
            mode="gpinn",
            geometry=GeometryConfig(kind="house", h=0.02),
        )

        # From a file
        config = ExperimentConfig.from_yaml("house_gpinn.yaml")

        # Shorthand
        config = ExperimentConfig.from_dict({
            "problem": "elasticity",
            "mode": "pinn",
            "kind": "crack_plate",
            "iterations": 5000,
        })
    """

    name: str = "experiment"
    problem: Literal["heat", "elasticity"] = "heat"
    mode: Literal["pinn", "gpinn"] = "gpinn"
    seed: int = 0
    geometry: GeometryConfig = Field(default_factory=GeometryConfig)
    heat: HeatSettings = Field(default_factory=HeatSettings)
    elasticity: ElasticitySettings = Field(default_factory=ElasticitySettings)
    network: NetworkConfig = Field(default_factory=NetworkConfig)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    sampling: SamplingConfig = Field(default_factory=SamplingConfig)
    weights: LossWeights = Field(default_factory=LossWeights)
    embedding: EmbeddingConfig = Field(default_factory=EmbeddingConfig)
    reference: ReferenceConfig = Field(default_factory=ReferenceConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)
    output_dir: str = "runs"

    @model_validator(mode="after")
    def _check_problem_geometry(self) -> ExperimentConfig:
        kind = self.geometry.kind
        if self.problem == "elasticity" and kind in ("unit_square", "house"):
            raise ValueError(f"elasticity needs a plate geometry with a traction edge, got {kind}")
        if self.problem == "heat" and self.heat.manufactured and kind != "unit_square":
            raise ValueError("manufactured heat cases are defined on the unit_square geometry")
        if self.problem == "heat" and self.sampling.n_dirichlet < 1:
            raise ValueError("heat problems need n_dirichlet >= 1")
        return self

    @property
    def run_dir(self) -> Path:
        """Directory that receives this experiment's artifacts."""
        return Path(self.output_dir) / f"{self.name}-{self.problem}-{self.mode}"

    @property
    def input_dim(self) -> int:
        return 3 if self.mode == "gpinn" else 2

    @property
    def output_dim(self) -> int:
        return 1 if self.problem == "heat" else 2

    @classmethod
    def from_yaml(cls, path: str | Path) -> ExperimentConfig:
        """Load configuration from a YAML file."""
        path = Path(path)
        with path.open() as f:
            data = yaml.safe_load(f) or {}
        return cls._from_raw(data)

    @classmethod
    def from_json(cls, path: str | Path) -> ExperimentConfig:
        """Load configuration from a JSON file."""
        data = json.loads(Path(path).read_text())
        return cls._from_raw(data)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ExperimentConfig:
        """Load configuration from a dictionary.

        Supports both the full nested format and a flat shorthand format:

        Full format:
            {"geometry": {"kind": "house", "h": 0.02}, "optimizer": {"adam_iterations": 5000}}

        Shorthand format:
            {"kind": "house", "h": 0.02, "iterations": 5000}
        """
        return cls._from_raw(dict(data))

    @classmethod
    def _from_raw(cls, data: dict[str, Any]) -> ExperimentConfig:
        """Normalize and construct config from a raw dict."""
        flat_mappings = {
            "kind": ("geometry", "kind"),
            "h": ("geometry", "h"),
            "mesh_path": ("geometry", "mesh_path"),
            "iterations": ("optimizer", "adam_iterations"),
            "lbfgs_iterations": ("optimizer", "lbfgs_iterations"),
            "learning_rate": ("optimizer", "learning_rate"),
            "differentiation_mode": ("embedding", "differentiation_mode"),
            "log_level": ("logging", "level"),
        }

        for flat_key, (section, nested_key) in flat_mappings.items():
            if flat_key in data:
                if section not in data:
                    data[section] = {}
                data[section][nested_key] = data.pop(flat_key)

        return cls(**data)

    def to_yaml(self) -> str:
        """Serialize to YAML (used for the run directory's config copy)."""
        return yaml.safe_dump(self.model_dump(mode="json"), sort_keys=False)


def load_config(source: str | Path | dict[str, Any] | ExperimentConfig) -> ExperimentConfig:
    """Load an ExperimentConfig from any supported source.

    Args:
        source: A YAML/JSON file path (str/Path), a dict, or an existing ExperimentConfig.

    Returns:
        An ExperimentConfig instance.
    """
    if isinstance(source, ExperimentConfig):
        return source
    if isinstance(source, dict):
        return ExperimentConfig.from_dict(source)
    if isinstance(source, (str, Path)):
        path = Path(source)
        if not path.exists():
            raise FileNotFoundError(f"Config file not found: {path}")
        if path.suffix == ".json":
            return ExperimentConfig.from_json(path)
        return ExperimentConfig.from_yaml(path)
    raise TypeError(f"Cannot load config from {type(source)}")


# Default YAML template for `gpinn init`
DEFAULT_CONFIG_YAML = """\
# gpinn experiment configuration

name: house
problem: heat           # heat | elasticity
mode: gpinn             # pinn | gpinn
seed: 0

geometry:
  kind: house           # house | crack_plate | plate | unit_square
  h: 0.02

heat:
  source_strength: 1.0  # signed: Delta u = f
  dirichlet_value: 0.0  # window temperature
  neumann_value: 0.0    # insulated walls

network:
  hidden: [64, 64, 64]

optimizer:
  adam_iterations: 20000
  lbfgs_iterations: 2000
  learning_rate: 0.001

sampling:
  n_interior: 4096
  n_dirichlet: 512
  n_neumann: 512
  resample_every: 500

weights:
  pde: 1.0
  data: 0.0
  bc: 1.0

embedding:
  differentiation_mode: frozen   # frozen | chain_rule

logging:
  level: INFO

output_dir: runs
"""
