"""Point location on triangular meshes.

:class:`PointLocator` buckets elements into a uniform background grid of cell
size ``2h`` and answers batched queries with vectorized barycentric tests.
Points in no element (outside the hull, or inside a hole) snap to the nearest
element with clamped barycentric coordinates and are flagged ``extrapolated``.

Both the grid path and :func:`locate_points_bruteforce` resolve ties the same
way (lowest element index), so they return identical answers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
from loguru import logger

if TYPE_CHECKING:
    from gpinn.mesh.mesh import Mesh

INSIDE_TOL = 1e-12
# Elements at distances within this of the minimum count as tied.
DISTANCE_TIE_TOL = 1e-14
_QUERY_CHUNK = 20000


class Location(NamedTuple):
    """Result of locating a single point."""

    element: int
    barycentric: np.ndarray
    extrapolated: bool


@dataclass(frozen=True)
class Locations:
    """Result of locating a batch of points."""

    elements: np.ndarray
    barycentric: np.ndarray
    extrapolated: np.ndarray

    def __len__(self) -> int:
        return len(self.elements)

    def __getitem__(self, k: int) -> Location:
        return Location(
            int(self.elements[k]), self.barycentric[k].copy(), bool(self.extrapolated[k])
        )


def _barycentric(
    mesh: Mesh, points: np.ndarray, elems: np.ndarray
) -> np.ndarray:
    """Barycentric coordinates of points[k] with respect to element elems[k]."""
    v = mesh.nodes[mesh.elements[elems]]
    t = np.stack([v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]], axis=2)
    rhs = points - v[:, 0]
    det = t[:, 0, 0] * t[:, 1, 1] - t[:, 0, 1] * t[:, 1, 0]
    l1 = (t[:, 1, 1] * rhs[:, 0] - t[:, 0, 1] * rhs[:, 1]) / det
    l2 = (-t[:, 1, 0] * rhs[:, 0] + t[:, 0, 0] * rhs[:, 1]) / det
    return np.stack([1.0 - l1 - l2, l1, l2], axis=1)


def _closest_on_triangles(
    mesh: Mesh, point: np.ndarray, elems: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Distance from ``point`` to each element and the clamped barycentrics of the closest point."""
    v = mesh.nodes[mesh.elements[elems]]
    bary = _barycentric(mesh, np.broadcast_to(point, (len(elems), 2)), elems)
    inside = (bary >= -INSIDE_TOL).all(axis=1)

    best_d = np.full(len(elems), np.inf)
    best_b = np.zeros((len(elems), 3))
    for a_idx, b_idx in ((0, 1), (1, 2), (2, 0)):
        a, b = v[:, a_idx], v[:, b_idx]
        ab = b - a
        t = np.clip(np.einsum("ij,ij->i", point - a, ab) / np.einsum("ij,ij->i", ab, ab), 0, 1)
        d = np.linalg.norm(a + t[:, None] * ab - point, axis=1)
        better = d < best_d
        best_d = np.where(better, d, best_d)
        cand = np.zeros((len(elems), 3))
        cand[:, a_idx] = 1.0 - t
        cand[:, b_idx] = t
        best_b[better] = cand[better]
    best_d[inside] = 0.0
    best_b[inside] = bary[inside]
    return best_d, best_b


def _pick_nearest(
    mesh: Mesh, point: np.ndarray, candidates: np.ndarray
) -> tuple[int, np.ndarray]:
    candidates = np.unique(candidates)
    d, b = _closest_on_triangles(mesh, point, candidates)
    k = int(np.flatnonzero(d <= d.min() + DISTANCE_TIE_TOL)[0])
    return int(candidates[k]), b[k]


class PointLocator:
    """Uniform-grid spatial index over a mesh's elements."""

    def __init__(self, mesh: Mesh, cell_size: float | None = None) -> None:
        self.mesh = mesh
        xmin, xmax, ymin, ymax = mesh.bounds
        self.cell_size = float(cell_size or 2.0 * mesh.characteristic_length)
        self.origin = np.array([xmin, ymin])
        self.shape = (
            max(1, int(np.ceil((xmax - xmin) / self.cell_size)) + 1),
            max(1, int(np.ceil((ymax - ymin) / self.cell_size)) + 1),
        )

        pts = mesh.nodes[mesh.elements]
        pad = 1e-9 * max(xmax - xmin, ymax - ymin, 1.0)
        lo = self._cell_index(pts.min(axis=1) - pad)
        hi = self._cell_index(pts.max(axis=1) + pad)
        ncx = hi[:, 0] - lo[:, 0] + 1
        counts = ncx * (hi[:, 1] - lo[:, 1] + 1)
        elem = np.repeat(np.arange(mesh.n_elements), counts)
        local = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        cx = lo[elem, 0] + local % ncx[elem]
        cy = lo[elem, 1] + local // ncx[elem]
        cell = cy * self.shape[0] + cx
        order = np.lexsort((elem, cell))
        self._cell_elems = elem[order]
        self._cell_ptr = np.searchsorted(cell[order], np.arange(self.shape[0] * self.shape[1] + 1))
        self._boundary_a = mesh.nodes[mesh.boundary[:, 0]]
        self._boundary_b = mesh.nodes[mesh.boundary[:, 1]]

    def _cell_index(self, points: np.ndarray) -> np.ndarray:
        idx = np.floor((points - self.origin) / self.cell_size).astype(np.int64)
        idx[:, 0] = np.clip(idx[:, 0], 0, self.shape[0] - 1)
        idx[:, 1] = np.clip(idx[:, 1], 0, self.shape[1] - 1)
        return idx

    def _cells_elements(self, cells: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Flattened (owner position, element) candidate pairs for a list of cells."""
        start = self._cell_ptr[cells]
        counts = self._cell_ptr[cells + 1] - start
        owner = np.repeat(np.arange(len(cells)), counts)
        offset = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        return owner, self._cell_elems[start[owner] + offset]

    def locate(self, points: np.ndarray) -> Locations:
        """Locate a (P, 2) batch of points."""
        points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        elements = np.full(len(points), -1, dtype=np.int64)
        bary = np.zeros((len(points), 3))
        for s in range(0, len(points), _QUERY_CHUNK):
            chunk = points[s:s + _QUERY_CHUNK]
            idx = self._cell_index(chunk)
            cells = idx[:, 1] * self.shape[0] + idx[:, 0]
            owner, cand = self._cells_elements(cells)
            b = _barycentric(self.mesh, chunk[owner], cand)
            inside = np.flatnonzero((b >= -INSIDE_TOL).all(axis=1))
            # owner is sorted and candidates within a cell ascend by element,
            # so the first hit per point is its lowest-index containing element
            hit_points, first = np.unique(owner[inside], return_index=True)
            elements[s + hit_points] = cand[inside[first]]
            bary[s + hit_points] = b[inside[first]]

        extrapolated = elements < 0
        for k in np.flatnonzero(extrapolated):
            elements[k], bary[k] = self._nearest(points[k])
        return Locations(elements, bary, extrapolated)

    def _nearest(self, point: np.ndarray) -> tuple[int, np.ndarray]:
        # The closest point of the mesh to an outside point lies on a boundary
        # edge; every element within that distance is a candidate.
        ab = self._boundary_b - self._boundary_a
        t = np.clip(
            np.einsum("ij,ij->i", point - self._boundary_a, ab) / np.einsum("ij,ij->i", ab, ab),
            0.0,
            1.0,
        )
        radius = np.linalg.norm(self._boundary_a + t[:, None] * ab - point, axis=1).min()
        radius += 1e-9 * self.cell_size
        lo = self._cell_index((point - radius)[None, :])[0]
        hi = self._cell_index((point + radius)[None, :])[0]
        gx, gy = np.meshgrid(np.arange(lo[0], hi[0] + 1), np.arange(lo[1], hi[1] + 1))
        cells = (gy * self.shape[0] + gx).ravel()
        _, cand = self._cells_elements(cells)
        return _pick_nearest(self.mesh, point, cand)


def locate_points(mesh: Mesh, points: np.ndarray) -> Locations:
    """Locate a batch of points using the mesh's cached grid index."""
    locations = mesh.locator.locate(points)
    n_out = int(locations.extrapolated.sum())
    if n_out:
        logger.warning(
            f"{n_out} of {len(locations.extrapolated)} points lie outside mesh {mesh.name}; "
            "using the nearest element"
        )
    return locations


def locate_point(mesh: Mesh, x: np.ndarray | tuple[float, float]) -> Location:
    """Locate a single point.

    Returns:
        (element index, barycentric coordinates, extrapolated flag). Inside
        points have all barycentrics >= -1e-12 summing to 1; outside points
        snap to the nearest element with clamped coordinates.
    """
    return locate_points(mesh, np.asarray(x, dtype=np.float64).reshape(1, 2))[0]


def locate_points_bruteforce(mesh: Mesh, points: np.ndarray) -> Locations:
    """Exhaustive reference implementation of :func:`locate_points`."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    all_elems = np.arange(mesh.n_elements)
    elements = np.empty(len(points), dtype=np.int64)
    bary = np.empty((len(points), 3))
    extrapolated = np.zeros(len(points), dtype=bool)
    for k, p in enumerate(points):
        b = _barycentric(mesh, np.broadcast_to(p, (mesh.n_elements, 2)), all_elems)
        inside = np.flatnonzero((b >= -INSIDE_TOL).all(axis=1))
        if len(inside):
            elements[k] = inside[0]
            bary[k] = b[inside[0]]
        else:
            extrapolated[k] = True
            elements[k], bary[k] = _pick_nearest(mesh, p, all_elems)
    return Locations(elements, bary, extrapolated)
