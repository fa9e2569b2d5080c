"""Nodal field solutions and their JSON/CSV files."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel

from gpinn.mesh.io import MeshDocument
from gpinn.mesh.locate import locate_points
from gpinn.mesh.mesh import Mesh


@dataclass(frozen=True, eq=False)
class FieldSolution:
    """Piecewise-linear field given by its values at the mesh nodes.

    Attributes:
        mesh: Mesh the values live on.
        nodal_values: (N, m) values, one column per component.
        components: Component names (``["u"]`` or ``["u_x", "u_y"]``).
        metadata: Free-form provenance (solver, h, timestamp).
    """

    mesh: Mesh
    nodal_values: np.ndarray
    components: list[str] = field(default_factory=lambda: ["u"])
    metadata: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        values = np.asarray(self.nodal_values, dtype=np.float64)
        values = values.reshape(self.mesh.n_nodes, -1)
        if values.shape[1] != len(self.components):
            raise ValueError(
                f"{values.shape[1]} value columns for components {self.components}"
            )
        if not np.isfinite(values).all():
            raise ValueError("field solution contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "nodal_values", values)

    @property
    def n_components(self) -> int:
        return len(self.components)

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """(P, m) linear interpolation at points (clamped outside the mesh)."""
        loc = locate_points(self.mesh, np.asarray(points, dtype=np.float64).reshape(-1, 2))
        nodal = self.nodal_values[self.mesh.elements[loc.elements]]
        return np.einsum("pk,pkc->pc", loc.barycentric, nodal)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.evaluate(points)

    def element_gradients(self) -> np.ndarray:
        """(E, m, 2) constant gradient of each component on each element."""
        nodal = self.nodal_values[self.mesh.elements]
        return np.einsum("ekd,ekc->ecd", self.mesh.shape_gradients, nodal)


class SolutionDocument(BaseModel):
    """JSON form of a FieldSolution (mesh included)."""

    components: list[str]
    metadata: dict[str, Any] = {}
    mesh: MeshDocument
    nodal_values: list[list[float]]


def save_solution(solution: FieldSolution, path: str | Path) -> Path:
    """Write ``.json`` (mesh included) or ``.csv`` (node, x, y, components...)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix == ".csv":
        solution_frame(solution).to_csv(path, index=False)
    else:
        doc = SolutionDocument(
            components=solution.components,
            metadata=solution.metadata,
            mesh=MeshDocument.from_mesh(solution.mesh),
            nodal_values=solution.nodal_values.tolist(),
        )
        path.write_text(doc.model_dump_json())
    logger.info(f"Wrote {'/'.join(solution.components)} solution to {path}")
    return path


def solution_frame(solution: FieldSolution) -> pd.DataFrame:
    nodes = solution.mesh.nodes
    frame = pd.DataFrame({"node": np.arange(len(nodes)), "x": nodes[:, 0], "y": nodes[:, 1]})
    for k, name in enumerate(solution.components):
        frame[name] = solution.nodal_values[:, k]
    return frame


def load_solution(path: str | Path, mesh: Mesh | None = None) -> FieldSolution:
    """Read a solution written by :func:`save_solution`.

    CSV files carry no connectivity, so ``mesh`` is required for them.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Solution file not found: {path}")
    if path.suffix == ".csv":
        if mesh is None:
            raise ValueError("loading a CSV solution needs the mesh it was written from")
        frame = pd.read_csv(path, float_precision="round_trip")
        if len(frame) != mesh.n_nodes:
            raise ValueError(f"{path} has {len(frame)} rows for a {mesh.n_nodes}-node mesh")
        components = [c for c in frame.columns if c not in ("node", "x", "y")]
        frame = frame.sort_values("node")
        return FieldSolution(
            mesh, frame[components].to_numpy(), components, {"source": str(path)}
        )
    doc = SolutionDocument.model_validate_json(path.read_text())
    return FieldSolution(
        mesh or doc.mesh.to_mesh(name=path.stem),
        np.array(doc.nodal_values),
        doc.components,
        doc.metadata,
    )
