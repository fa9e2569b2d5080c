"""Triangular mesh model.

A Mesh is an immutable bundle of numpy arrays: node coordinates, counter-
clockwise element triples and tagged boundary edges. Crack faces are
represented by duplicated node lines, so no element spans the crack and each
crack edge is a genuine boundary edge owned by exactly one element.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np

from gpinn.core.errors import MeshValidationError

if TYPE_CHECKING:
    from gpinn.mesh.locate import PointLocator

BOUNDARY_TAGS = ("dirichlet", "neumann", "crack_top", "crack_bottom", "free")

# Geometric comparisons (boundary detection, twin matching) use this tolerance
# relative to the mesh bounding box.
GEOMETRY_TOL = 1e-9


def signed_areas(nodes: np.ndarray, elements: np.ndarray) -> np.ndarray:
    """Signed area of every triangle (positive for counter-clockwise)."""
    p0 = nodes[elements[:, 0]]
    p1 = nodes[elements[:, 1]]
    p2 = nodes[elements[:, 2]]
    return 0.5 * (
        (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
        - (p2[:, 0] - p0[:, 0]) * (p1[:, 1] - p0[:, 1])
    )


def element_edges(elements: np.ndarray) -> np.ndarray:
    """All element edges as sorted (i, j) pairs, three per element, element-major."""
    e = np.asarray(elements, dtype=np.int64)
    edges = np.stack(
        [e[:, [0, 1]], e[:, [1, 2]], e[:, [2, 0]]], axis=1
    ).reshape(-1, 2)
    return np.sort(edges, axis=1)


def find_boundary_edges(elements: np.ndarray) -> np.ndarray:
    """Edges that belong to exactly one element, in first-appearance order."""
    edges = element_edges(elements)
    _, inverse, counts = np.unique(edges, axis=0, return_inverse=True, return_counts=True)
    single = counts[inverse.ravel()] == 1
    return edges[np.sort(np.flatnonzero(single))]


def edge_owners(elements: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Owning element of each edge, or -1 unless exactly one element has it."""
    all_edges = element_edges(elements)
    n = int(max(all_edges.max(initial=0), np.max(edges, initial=0))) + 1
    keys = all_edges[:, 0] * n + all_edges[:, 1]
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    query = np.sort(np.asarray(edges, dtype=np.int64).reshape(-1, 2), axis=1)
    qkeys = query[:, 0] * n + query[:, 1]
    lo = np.searchsorted(sorted_keys, qkeys, side="left")
    hi = np.searchsorted(sorted_keys, qkeys, side="right")
    owners = np.full(len(query), -1, dtype=np.int64)
    single = (hi - lo) == 1
    owners[single] = order[lo[single]] // 3
    return owners


@dataclass(frozen=True, eq=False)
class Mesh:
    """A 2D conforming triangular mesh with tagged boundary edges.

    Attributes:
        nodes: (N, 2) float64 coordinates.
        elements: (E, 3) int64 node indices, counter-clockwise.
        boundary: (B, 2) int64 node index pairs.
        boundary_tags: length-B tuple of tags from ``BOUNDARY_TAGS``.
    """

    nodes: np.ndarray
    elements: np.ndarray
    boundary: np.ndarray
    boundary_tags: tuple[str, ...]
    name: str = field(default="mesh", compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", np.ascontiguousarray(self.nodes, dtype=np.float64))
        object.__setattr__(
            self, "elements", np.ascontiguousarray(self.elements, dtype=np.int64).reshape(-1, 3)
        )
        object.__setattr__(
            self, "boundary", np.ascontiguousarray(self.boundary, dtype=np.int64).reshape(-1, 2)
        )
        object.__setattr__(self, "boundary_tags", tuple(str(t) for t in self.boundary_tags))
        for arr in (self.nodes, self.elements, self.boundary):
            arr.setflags(write=False)

    # ------------------------------------------------------------------
    # Sizes and element geometry
    # ------------------------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return int(self.nodes.shape[0])

    @property
    def n_elements(self) -> int:
        return int(self.elements.shape[0])

    @cached_property
    def areas(self) -> np.ndarray:
        return signed_areas(self.nodes, self.elements)

    @cached_property
    def centroids(self) -> np.ndarray:
        return self.nodes[self.elements].mean(axis=1)

    @property
    def area(self) -> float:
        return float(self.areas.sum())

    @cached_property
    def bounds(self) -> tuple[float, float, float, float]:
        """(xmin, xmax, ymin, ymax) of the node cloud."""
        lo = self.nodes.min(axis=0)
        hi = self.nodes.max(axis=0)
        return float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1])

    @cached_property
    def characteristic_length(self) -> float:
        """Mean element edge length."""
        edges = np.unique(element_edges(self.elements), axis=0)
        d = self.nodes[edges[:, 1]] - self.nodes[edges[:, 0]]
        return float(np.linalg.norm(d, axis=1).mean())

    @cached_property
    def shape_gradients(self) -> np.ndarray:
        """(E, 3, 2) gradients of the three linear shape functions per element."""
        p = self.nodes[self.elements]
        x, y = p[:, :, 0], p[:, :, 1]
        two_a = 2.0 * self.areas
        grads = np.empty((self.n_elements, 3, 2))
        grads[:, 0, 0] = y[:, 1] - y[:, 2]
        grads[:, 1, 0] = y[:, 2] - y[:, 0]
        grads[:, 2, 0] = y[:, 0] - y[:, 1]
        grads[:, 0, 1] = x[:, 2] - x[:, 1]
        grads[:, 1, 1] = x[:, 0] - x[:, 2]
        grads[:, 2, 1] = x[:, 1] - x[:, 0]
        return grads / two_a[:, None, None]

    @cached_property
    def element_neighbors(self) -> np.ndarray:
        """(E, 3) element across local edge (0-1, 1-2, 2-0), -1 where there is none."""
        edges = element_edges(self.elements)
        _, inverse = np.unique(edges, axis=0, return_inverse=True)
        inverse = inverse.ravel()
        order = np.argsort(inverse, kind="stable")
        grouped = inverse[order]
        pair = np.flatnonzero(grouped[1:] == grouped[:-1])
        neighbors = np.full(len(edges), -1, dtype=np.int64)
        first, second = order[pair], order[pair + 1]
        neighbors[first] = second // 3
        neighbors[second] = first // 3
        return neighbors.reshape(-1, 3)

    # ------------------------------------------------------------------
    # Boundary
    # ------------------------------------------------------------------

    @cached_property
    def boundary_owner(self) -> np.ndarray:
        """Owning element of each boundary edge (-1 if the edge is dangling)."""
        return edge_owners(self.elements, self.boundary)

    @cached_property
    def boundary_lengths(self) -> np.ndarray:
        d = self.nodes[self.boundary[:, 1]] - self.nodes[self.boundary[:, 0]]
        return np.linalg.norm(d, axis=1)

    @cached_property
    def boundary_normals(self) -> np.ndarray:
        """Outward unit normal of every boundary edge."""
        a = self.nodes[self.boundary[:, 0]]
        b = self.nodes[self.boundary[:, 1]]
        d = b - a
        n = np.stack([d[:, 1], -d[:, 0]], axis=1) / self.boundary_lengths[:, None]
        mid = 0.5 * (a + b)
        inward = self.centroids[self.boundary_owner] - mid
        flip = np.einsum("ij,ij->i", n, inward) > 0
        n[flip] *= -1.0
        return n

    def edges_with_tag(self, tag: str) -> np.ndarray:
        """Indices of boundary edges carrying ``tag``."""
        return np.array([k for k, t in enumerate(self.boundary_tags) if t == tag], dtype=np.int64)

    @property
    def tags(self) -> list[str]:
        """Tags present on this mesh, in canonical order."""
        present = set(self.boundary_tags)
        return [t for t in BOUNDARY_TAGS if t in present]

    def tag_nodes(self, tag: str) -> np.ndarray:
        """Sorted node indices touched by boundary edges with ``tag``.

        For crack tags the crack tip (shared by both flanks) is excluded, so the
        two face sets hold exactly the duplicated node lines.
        """
        nodes = np.unique(self.boundary[self.edges_with_tag(tag)])
        if tag in ("crack_top", "crack_bottom"):
            other = "crack_bottom" if tag == "crack_top" else "crack_top"
            shared = np.unique(self.boundary[self.edges_with_tag(other)])
            nodes = np.setdiff1d(nodes, shared)
        return nodes

    def crack_twins(self) -> np.ndarray:
        """(K, 2) pairs of (crack_top node, crack_bottom node) at equal coordinates."""
        top = self.tag_nodes("crack_top")
        bottom = self.tag_nodes("crack_bottom")
        if len(top) == 0 or len(bottom) == 0:
            return np.zeros((0, 2), dtype=np.int64)
        key = {tuple(np.round(self.nodes[i] / self._scale_tol, 0)): int(i) for i in bottom}
        pairs = []
        for i in top:
            j = key.get(tuple(np.round(self.nodes[i] / self._scale_tol, 0)))
            if j is not None:
                pairs.append((int(i), j))
        return np.array(pairs, dtype=np.int64).reshape(-1, 2)

    @property
    def _scale_tol(self) -> float:
        xmin, xmax, ymin, ymax = self.bounds
        return GEOMETRY_TOL * max(xmax - xmin, ymax - ymin, 1.0)

    @cached_property
    def locator(self) -> PointLocator:
        """Spatial index for point location (built on first use)."""
        from gpinn.mesh.locate import PointLocator

        return PointLocator(self)

    @cached_property
    def fingerprint(self) -> str:
        """SHA-256 over nodes and elements; keys the embedding cache."""
        import hashlib

        digest = hashlib.sha256()
        digest.update(np.ascontiguousarray(self.nodes).tobytes())
        digest.update(np.ascontiguousarray(self.elements).tobytes())
        return digest.hexdigest()

    # ------------------------------------------------------------------
    # Validation
    # ------------------------------------------------------------------

    def validate(self) -> Mesh:
        """Check every structural invariant; raise MeshValidationError on failure."""
        n = self.n_nodes
        if self.n_elements == 0:
            raise MeshValidationError("mesh has no elements")
        bad = np.flatnonzero((self.elements < 0).any(axis=1) | (self.elements >= n).any(axis=1))
        if len(bad):
            raise MeshValidationError(
                f"node index out of range at element {int(bad[0])}", element=int(bad[0])
            )
        nonpos = np.flatnonzero(self.areas <= 0.0)
        if len(nonpos):
            k = int(nonpos[0])
            kind = "negative" if self.areas[k] < 0 else "zero"
            raise MeshValidationError(f"{kind} element area at element {k}", element=k)
        if len(self.boundary_tags) != len(self.boundary):
            raise MeshValidationError("boundary edge and tag counts differ")
        unknown = sorted(set(self.boundary_tags) - set(BOUNDARY_TAGS))
        if unknown:
            raise MeshValidationError(f"unknown boundary tags: {unknown}")
        dangling = np.flatnonzero(self.boundary_owner < 0)
        if len(dangling):
            b = int(dangling[0])
            raise MeshValidationError(
                f"dangling boundary edge {b} ({int(self.boundary[b, 0])}, "
                f"{int(self.boundary[b, 1])}) does not belong to exactly one element"
            )
        # The flanks may only meet at a crack tip: one edge of each face.
        top_edges = self.boundary[self.edges_with_tag("crack_top")]
        bottom_edges = self.boundary[self.edges_with_tag("crack_bottom")]
        for node in np.intersect1d(np.unique(top_edges), np.unique(bottom_edges)):
            if (top_edges == node).sum() != 1 or (bottom_edges == node).sum() != 1:
                raise MeshValidationError(f"crack faces share node {int(node)}")
        return self

    def with_name(self, name: str) -> Mesh:
        return Mesh(self.nodes, self.elements, self.boundary, self.boundary_tags, name=name)
