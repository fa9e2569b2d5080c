"""Mesh file formats.

Two formats are read:

- ``native-json``: ``{"nodes": [[x, y], ...], "elements": [[i, j, k], ...],
  "boundary": [[i, j, "tag"], ...]}``. ``boundary`` is optional; when absent
  every boundary edge is extracted and tagged ``free``.
- ``gmsh-v2-ascii``: nodes, 2-node line elements carrying physical groups
  named after boundary tags, and 3-node triangles (read via meshio).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal

import numpy as np
from loguru import logger
from pydantic import BaseModel, ValidationError

from gpinn.core.errors import MeshParseError
from gpinn.mesh.mesh import BOUNDARY_TAGS, Mesh, find_boundary_edges

MeshFormat = Literal["native-json", "gmsh-v2-ascii"]


class MeshDocument(BaseModel):
    """On-disk shape of the native JSON mesh format."""

    nodes: list[tuple[float, float]]
    elements: list[tuple[int, int, int]]
    boundary: list[tuple[int, int, str]] | None = None

    @classmethod
    def from_mesh(cls, mesh: Mesh) -> MeshDocument:
        return cls(
            nodes=[(float(x), float(y)) for x, y in mesh.nodes],
            elements=[tuple(int(i) for i in e) for e in mesh.elements],
            boundary=[
                (int(i), int(j), tag) for (i, j), tag in zip(mesh.boundary, mesh.boundary_tags)
            ],
        )

    def to_mesh(self, name: str = "mesh") -> Mesh:
        nodes = np.array(self.nodes, dtype=np.float64).reshape(-1, 2)
        elements = np.array(self.elements, dtype=np.int64).reshape(-1, 3)
        if self.boundary is None:
            boundary = find_boundary_edges(elements)
            tags: tuple[str, ...] = ("free",) * len(boundary)
        else:
            boundary = np.array([(i, j) for i, j, _ in self.boundary], dtype=np.int64)
            tags = tuple(tag for _, _, tag in self.boundary)
        return Mesh(nodes, elements, boundary.reshape(-1, 2), tags, name=name)


def _infer_format(path: Path) -> MeshFormat:
    if path.suffix == ".msh":
        return "gmsh-v2-ascii"
    return "native-json"


def load_mesh(path: str | Path, format: MeshFormat | None = None) -> Mesh:
    """Load and validate a mesh.

    Args:
        path: Mesh file.
        format: ``native-json`` or ``gmsh-v2-ascii``; inferred from the suffix
            (``.msh`` is Gmsh) when omitted.

    Returns:
        A validated Mesh with node/element order preserved from the file.

    Raises:
        FileNotFoundError: If the file does not exist.
        MeshParseError: If the file is malformed for its format.
        MeshValidationError: If the mesh violates an invariant.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Mesh file not found: {path}")
    fmt = format or _infer_format(path)
    if fmt == "native-json":
        mesh = _read_native(path)
    elif fmt == "gmsh-v2-ascii":
        mesh = _read_gmsh(path)
    else:
        raise ValueError(f"Unknown mesh format: {fmt}")
    mesh.validate()
    logger.info(
        f"Loaded mesh {path.name}: {mesh.n_nodes} nodes, {mesh.n_elements} elements, "
        f"{len(mesh.boundary)} boundary edges"
    )
    return mesh


def save_mesh(mesh: Mesh, path: str | Path) -> Path:
    """Write a mesh in the native JSON format."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(MeshDocument.from_mesh(mesh).model_dump_json(exclude_none=True))
    logger.debug(f"Wrote mesh to {path}")
    return path


def _read_native(path: Path) -> Mesh:
    try:
        doc = MeshDocument.model_validate(json.loads(path.read_text()))
    except (json.JSONDecodeError, ValidationError) as exc:
        raise MeshParseError(f"Malformed native-json mesh {path}: {exc}") from exc
    return doc.to_mesh(name=path.stem)


def _read_gmsh(path: Path) -> Mesh:
    import meshio

    head = path.read_text(errors="replace").splitlines()[:2]
    if len(head) < 2 or head[0].strip() != "$MeshFormat" or not head[1].startswith("2"):
        raise MeshParseError(f"{path} is not a Gmsh v2 ASCII file")
    if len(head[1].split()) < 2 or head[1].split()[1] != "0":
        raise MeshParseError(f"{path} is a binary Gmsh file; only ASCII is supported")
    try:
        raw = meshio.read(path, file_format="gmsh")
    except Exception as exc:  # meshio raises a variety of parse errors
        raise MeshParseError(f"Malformed Gmsh mesh {path}: {exc}") from exc

    cells = raw.cells_dict
    if "triangle" not in cells:
        raise MeshParseError(f"{path} contains no 3-node triangles")
    nodes = np.asarray(raw.points, dtype=np.float64)[:, :2]
    elements = np.asarray(cells["triangle"], dtype=np.int64)

    names = {int(v[0]): k for k, v in raw.field_data.items() if int(v[1]) == 1}
    lines = np.asarray(cells.get("line", np.zeros((0, 2))), dtype=np.int64).reshape(-1, 2)
    physical = raw.cell_data_dict.get("gmsh:physical", {}).get("line")
    tags = []
    for k in range(len(lines)):
        tag = names.get(int(physical[k])) if physical is not None else None
        if tag is not None and tag not in BOUNDARY_TAGS:
            raise MeshParseError(f"{path}: unknown boundary physical group '{tag}'")
        tags.append(tag or "free")
    return Mesh(nodes, elements, lines, tuple(tags), name=path.stem)
