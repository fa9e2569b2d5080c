"""Relative error of a field against a reference: RE(u) = |u - u*| / max|u*|.

The maximum is taken over the evaluation point set, so RE is unchanged when
candidate and reference are scaled by the same non-zero factor. Vector fields
get one RE column per component plus a Euclidean-norm column
``|u - u*| / max|u*|`` with vector norms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Union

import numpy as np
import pandas as pd
from loguru import logger

from gpinn.mesh.mesh import Mesh
from gpinn.reference.solution import FieldSolution

Evaluable = Union[FieldSolution, Callable[[np.ndarray], np.ndarray]]

_GRID_SPEC = re.compile(r"^(\d+)x(\d+)$")


@dataclass(frozen=True)
class ErrorReport:
    """Pointwise relative errors at a set of evaluation points.

    Attributes:
        points: (P, 2) evaluation points.
        values: RE per column (``"u"`` for scalar fields; component names
            plus ``"norm"`` for vector fields), each (P,).
        descriptor: How the points were produced (``grid:64x64``, ``file:...``).
    """

    points: np.ndarray
    values: dict[str, np.ndarray]
    descriptor: str = "points"

    @property
    def primary(self) -> str:
        """Column the summary statistics refer to."""
        return "norm" if "norm" in self.values else next(iter(self.values))

    @property
    def re(self) -> np.ndarray:
        return self.values[self.primary]

    @property
    def max(self) -> float:
        return float(self.re.max()) if len(self.re) else 0.0

    @property
    def mean(self) -> float:
        return float(self.re.mean()) if len(self.re) else 0.0

    @property
    def l2(self) -> float:
        """Root mean square of RE over the points."""
        return float(np.sqrt(np.mean(self.re**2))) if len(self.re) else 0.0

    def summary(self) -> dict[str, dict[str, float]]:
        return {
            name: {
                "max": float(v.max()),
                "mean": float(v.mean()),
                "l2": float(np.sqrt(np.mean(v**2))),
            }
            for name, v in self.values.items()
        }

    def frame(self) -> pd.DataFrame:
        """Plot-ready table: x, y and one ``re_<column>`` per RE column."""
        data = {"x": self.points[:, 0], "y": self.points[:, 1]}
        data.update({f"re_{name}": v for name, v in self.values.items()})
        return pd.DataFrame(data)


def _values(field: Evaluable, points: np.ndarray) -> np.ndarray:
    values = field.evaluate(points) if isinstance(field, FieldSolution) else field(points)
    values = np.asarray(values, dtype=np.float64)
    return values.reshape(len(points), -1)


def relative_error(
    candidate: Evaluable,
    reference: Evaluable,
    points: np.ndarray,
    descriptor: str = "points",
    components: list[str] | None = None,
) -> ErrorReport:
    """Pointwise RE of ``candidate`` against ``reference`` at ``points``.

    Raises:
        ValueError: If the reference vanishes at every point or the
            component counts differ.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    u = _values(candidate, points)
    ref = _values(reference, points)
    if u.shape != ref.shape:
        raise ValueError(f"candidate shape {u.shape} != reference shape {ref.shape}")
    if components is None:
        components = (
            reference.components
            if isinstance(reference, FieldSolution)
            else (["u"] if ref.shape[1] == 1 else [f"u_{k}" for k in range(ref.shape[1])])
        )

    ref_norm = np.linalg.norm(ref, axis=1)
    scale = float(ref_norm.max()) if len(ref_norm) else 0.0
    if scale == 0.0:
        raise ValueError("reference field is zero at every evaluation point")

    values: dict[str, np.ndarray] = {}
    for c, name in enumerate(components):
        comp_scale = float(np.abs(ref[:, c]).max())
        # a component that vanishes everywhere is measured against the vector scale
        values[name] = np.abs(u[:, c] - ref[:, c]) / (comp_scale if comp_scale > 0 else scale)
    if len(components) > 1:
        values["norm"] = np.linalg.norm(u - ref, axis=1) / scale
    report = ErrorReport(points, values, descriptor)
    logger.debug(f"Relative error on {descriptor}: max={report.max:.3e} mean={report.mean:.3e}")
    return report


def relative_l2(candidate: Evaluable, reference: Evaluable, points: np.ndarray) -> float:
    """Discrete ``||u - u*||_2 / ||u*||_2`` over the points."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    u = _values(candidate, points)
    ref = _values(reference, points)
    denom = float(np.linalg.norm(ref))
    if denom == 0.0:
        raise ValueError("reference field is zero at every evaluation point")
    return float(np.linalg.norm(u - ref)) / denom


# ---------------------------------------------------------------------------
# Evaluation points
# ---------------------------------------------------------------------------


def parse_grid(spec: str) -> tuple[int, int]:
    """``"128x128"`` -> (128, 128)."""
    match = _GRID_SPEC.match(spec.strip().lower())
    if match is None or min(int(match.group(1)), int(match.group(2))) < 2:
        raise ValueError(f"grid must look like NxM with N, M >= 2, got {spec!r}")
    return int(match.group(1)), int(match.group(2))


def regular_grid(bounds: tuple[float, float, float, float], nx: int, ny: int) -> np.ndarray:
    """(nx * ny, 2) grid over ``(xmin, xmax, ymin, ymax)``, x varying fastest."""
    xmin, xmax, ymin, ymax = bounds
    gx, gy = np.meshgrid(np.linspace(xmin, xmax, nx), np.linspace(ymin, ymax, ny))
    return np.stack([gx.ravel(), gy.ravel()], axis=1)


def evaluation_points(spec: str, mesh: Mesh) -> tuple[np.ndarray, str]:
    """Resolve ``grid:NxM`` or ``file:<csv with x,y columns>`` to points.

    Grid points that fall outside the mesh (holes, wall slabs) are dropped.
    """
    kind, _, arg = spec.partition(":")
    if kind == "grid":
        nx, ny = parse_grid(arg)
        points = regular_grid(mesh.bounds, nx, ny)
        inside = ~mesh.locator.locate(points).extrapolated
        return points[inside], spec
    if kind == "file":
        path = Path(arg)
        if not path.exists():
            raise FileNotFoundError(f"evaluation point file not found: {path}")
        frame = pd.read_csv(path, float_precision="round_trip")
        missing = {"x", "y"} - set(frame.columns)
        if missing:
            raise ValueError(f"{path} lacks columns {sorted(missing)}")
        return frame[["x", "y"]].to_numpy(dtype=np.float64), spec
    raise ValueError(f"evaluation points must be grid:NxM or file:<path>, got {spec!r}")
