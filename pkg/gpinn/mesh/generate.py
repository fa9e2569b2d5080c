"""Built-in domain generators.

Meshes are built structured-then-cut: a tensor-product grid whose lines pass
through every wall, window and crack coordinate is split into triangles,
cells inside wall slabs are dropped, and the crack is opened by giving the
elements below it their own copy of the crack-line nodes. Because every
feature lies on grid lines, no element ever crosses a wall or the crack.
"""

from __future__ import annotations

import math
from typing import Callable, Literal

import numpy as np
from loguru import logger

from gpinn.config import GeometryConfig, HouseGeometry, PlateGeometry
from gpinn.mesh.mesh import Mesh, edge_owners, find_boundary_edges

DomainKind = Literal["house", "crack_plate", "plate", "unit_square"]


# ---------------------------------------------------------------------------
# Grid lines
# ---------------------------------------------------------------------------


def graded_lines(
    a: float,
    b: float,
    h: float,
    anchors: list[float] | tuple[float, ...] = (),
    spacing: Callable[[np.ndarray], np.ndarray] | None = None,
) -> np.ndarray:
    """Sorted grid coordinates on [a, b] containing every anchor.

    Each interval between consecutive anchors is split so that the local gap
    never exceeds ``spacing(t)`` (default: constant ``h``). Points are placed by
    equidistributing the integral of ``1 / spacing``.
    """
    breaks = sorted({a, b, *(t for t in anchors if a < t < b)})
    out = [a]
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        if spacing is None:
            n = max(1, math.ceil((hi - lo) / h - 1e-9))
            pts = np.linspace(lo, hi, n + 1)
        else:
            t = np.linspace(lo, hi, 4001)
            density = 1.0 / spacing(t)
            cum = np.concatenate(
                [[0.0], np.cumsum(0.5 * (density[1:] + density[:-1]) * np.diff(t))]
            )
            n = max(1, math.ceil(cum[-1] - 1e-9))
            pts = np.interp(np.linspace(0.0, cum[-1], n + 1), cum, t)
            pts[0], pts[-1] = lo, hi
        out.extend(pts[1:].tolist())
    return np.array(out, dtype=np.float64)


def _tensor_triangulation(xs: np.ndarray, ys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and CCW triangles of the tensor grid; cell (i, j) -> elements 2c, 2c+1."""
    nx, ny = len(xs), len(ys)
    gx, gy = np.meshgrid(xs, ys)
    nodes = np.stack([gx.ravel(), gy.ravel()], axis=1)
    i, j = np.meshgrid(np.arange(nx - 1), np.arange(ny - 1))
    i, j = i.ravel(), j.ravel()
    a = j * nx + i
    b = a + 1
    c = a + nx + 1
    d = a + nx
    elements = np.empty((2 * len(a), 3), dtype=np.int64)
    elements[0::2] = np.stack([a, b, c], axis=1)
    elements[1::2] = np.stack([a, c, d], axis=1)
    return nodes, elements


def _compact(nodes: np.ndarray, elements: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Drop nodes no element uses, preserving order."""
    used = np.zeros(len(nodes), dtype=bool)
    used[elements.ravel()] = True
    remap = np.cumsum(used) - 1
    return nodes[used], remap[elements]


def structured_square(n: int, bounds: tuple[float, float, float, float] = (0, 1, 0, 1)) -> Mesh:
    """n x n structured triangulation of a rectangle, every boundary edge tagged dirichlet."""
    x0, x1, y0, y1 = bounds
    nodes, elements = _tensor_triangulation(
        np.linspace(x0, x1, n + 1), np.linspace(y0, y1, n + 1)
    )
    boundary = find_boundary_edges(elements)
    return Mesh(nodes, elements, boundary, ("dirichlet",) * len(boundary), name=f"square{n}")


# ---------------------------------------------------------------------------
# Domains
# ---------------------------------------------------------------------------


def generate_domain(config: GeometryConfig, kind: DomainKind | None = None) -> Mesh:
    """Mesh one of the built-in domains.

    Args:
        config: Geometry parameters and target element size ``h``.
        kind: Overrides ``config.kind`` when given.

    Returns:
        A validated, conforming, tagged Mesh.

    Raises:
        GeometryError: If the configuration is degenerate.
    """
    kind = kind or config.kind
    config = config.model_copy(update={"kind": kind})
    config.check()
    if kind == "unit_square":
        mesh = structured_square(max(1, math.ceil(1.0 / config.h - 1e-9))).with_name("unit_square")
    elif kind == "house":
        mesh = _house(config.house, config.h)
    elif kind in ("crack_plate", "plate"):
        mesh = _plate(config.plate, config.h, cracked=kind == "crack_plate")
    else:
        raise ValueError(f"Unknown domain kind: {kind}")
    mesh.validate()
    logger.info(
        f"Generated {kind} mesh: {mesh.n_nodes} nodes, {mesh.n_elements} elements (h={config.h})"
    )
    return mesh


def _house(house: HouseGeometry, h: float) -> Mesh:
    boxes = house.wall_boxes()
    x_anchors = [c for x0, x1, _, _ in boxes for c in (x0, x1)] + list(house.window)
    y_anchors = [c for _, _, y0, y1 in boxes for c in (y0, y1)]
    xs = graded_lines(0.0, house.side, h, x_anchors)
    ys = graded_lines(0.0, house.side, h, y_anchors)
    nodes, elements = _tensor_triangulation(xs, ys)

    centroids = nodes[elements].mean(axis=1)
    keep = np.ones(len(elements), dtype=bool)
    for x0, x1, y0, y1 in boxes:
        inside = (
            (centroids[:, 0] > x0) & (centroids[:, 0] < x1)
            & (centroids[:, 1] > y0) & (centroids[:, 1] < y1)
        )
        keep &= ~inside
    nodes, elements = _compact(nodes, elements[keep])

    boundary = find_boundary_edges(elements)
    mid = 0.5 * (nodes[boundary[:, 0]] + nodes[boundary[:, 1]])
    tol = 1e-9 * house.side
    a, b = house.window
    on_window = (
        (np.abs(mid[:, 1]) < tol)
        & (np.abs(nodes[boundary[:, 0], 1]) < tol)
        & (np.abs(nodes[boundary[:, 1], 1]) < tol)
        & (mid[:, 0] > a) & (mid[:, 0] < b)
    )
    tags = tuple("dirichlet" if w else "neumann" for w in on_window)
    return Mesh(nodes, elements, boundary, tags, name="house")


def _plate(plate: PlateGeometry, h: float, cracked: bool) -> Mesh:
    tx, ty = plate.crack_tip
    if cracked:
        h_tip = h / plate.tip_refinement
        radius = 4.0 * h

        def spacing_about(c: float) -> Callable[[np.ndarray], np.ndarray]:
            return lambda t: h_tip + (h - h_tip) * np.minimum(1.0, np.abs(t - c) / radius)

        xs = graded_lines(0.0, plate.width, h, [tx], spacing_about(tx))
        ys = graded_lines(0.0, plate.height, h, [ty], spacing_about(ty))
    else:
        xs = graded_lines(0.0, plate.width, h)
        ys = graded_lines(0.0, plate.height, h)
    nodes, elements = _tensor_triangulation(xs, ys)

    tol = 1e-9 * max(plate.width, plate.height)
    if cracked:
        nodes, elements = _open_crack(nodes, elements, plate, tol)

    boundary = find_boundary_edges(elements)
    p = nodes[boundary]
    centroids = nodes[elements].mean(axis=1)
    tags: list[str] = []
    owner_above = _owner_above(elements, boundary, centroids, ty)
    for k in range(len(boundary)):
        (xa, ya), (xb, yb) = p[k]
        if abs(ya - plate.height) < tol and abs(yb - plate.height) < tol:
            tags.append("neumann")
        elif abs(ya) < tol and abs(yb) < tol:
            tags.append("dirichlet")
        elif cracked and abs(ya - ty) < tol and abs(yb - ty) < tol:
            tags.append("crack_top" if owner_above[k] else "crack_bottom")
        else:
            tags.append("free")
    return Mesh(nodes, elements, boundary, tuple(tags), name="crack_plate" if cracked else "plate")


def _open_crack(
    nodes: np.ndarray, elements: np.ndarray, plate: PlateGeometry, tol: float
) -> tuple[np.ndarray, np.ndarray]:
    """Duplicate crack-line nodes (tip excluded) for elements below the crack."""
    tx, ty = plate.crack_tip
    on_line = np.abs(nodes[:, 1] - ty) < tol
    if plate.crack_mouth == "left":
        on_crack = on_line & (nodes[:, 0] < tx - tol)
    else:
        on_crack = on_line & (nodes[:, 0] > tx + tol)
    crack_nodes = np.flatnonzero(on_crack)
    dup = np.full(len(nodes), -1, dtype=np.int64)
    dup[crack_nodes] = len(nodes) + np.arange(len(crack_nodes))

    below = nodes[elements].mean(axis=1)[:, 1] < ty
    elements = elements.copy()
    sub = elements[below]
    swap = dup[sub] >= 0
    sub[swap] = dup[sub][swap]
    elements[below] = sub
    nodes = np.concatenate([nodes, nodes[crack_nodes]], axis=0)
    return nodes, elements


def _owner_above(
    elements: np.ndarray, boundary: np.ndarray, centroids: np.ndarray, ty: float
) -> np.ndarray:
    """For each boundary edge, whether its owning element lies above y = ty."""
    return centroids[edge_owners(elements, boundary), 1] > ty
