"""Mesh-connectivity graphs and their combinatorial Laplacian.

Edges are unweighted: A is a symmetric 0/1 matrix with zero diagonal and
the degree vector is its row sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np
import scipy.sparse as sp
from loguru import logger
from scipy.sparse import csgraph

from gpinn.mesh.mesh import element_edges

if TYPE_CHECKING:
    from gpinn.mesh.mesh import Mesh


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph.

    Attributes:
        n_vertices: Vertex count.
        edges: (M, 2) int64 deduplicated pairs with ``i < j``, lexicographically sorted.
    """

    n_vertices: int
    edges: np.ndarray

    def __post_init__(self) -> None:
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if len(edges) and (edges.min() < 0 or edges.max() >= self.n_vertices):
            raise ValueError(f"edge endpoint out of range for {self.n_vertices} vertices")
        edges = np.sort(edges, axis=1)
        edges = edges[edges[:, 0] != edges[:, 1]]
        edges = np.unique(edges, axis=0)
        edges.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "n_vertices", int(self.n_vertices))

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Sparse symmetric 0/1 adjacency matrix."""
        i, j = self.edges[:, 0], self.edges[:, 1]
        rows = np.concatenate([i, j])
        cols = np.concatenate([j, i])
        data = np.ones(len(rows), dtype=np.float64)
        return sp.csr_matrix((data, (rows, cols)), shape=(self.n_vertices, self.n_vertices))

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n_vertices).astype(np.int64)

    @property
    def n_edges(self) -> int:
        return int(len(self.edges))

    @classmethod
    def from_edges(cls, n_vertices: int, edges: np.ndarray | list[tuple[int, int]]) -> Graph:
        return cls(n_vertices, np.asarray(edges, dtype=np.int64).reshape(-1, 2))


def graph_from_mesh(mesh: Mesh) -> Graph:
    """Vertices are mesh nodes; edges are the deduplicated element edges.

    Crack faces carry separate node copies, so no edge joins a crack_top
    node to its crack_bottom twin.
    """
    return Graph(mesh.n_nodes, element_edges(mesh.elements))


def path_graph(n: int) -> Graph:
    """P_n: vertices 0..n-1 joined in a chain."""
    v = np.arange(n - 1)
    return Graph(n, np.stack([v, v + 1], axis=1))


def grid_graph(rows: int, cols: int) -> Graph:
    """rows x cols lattice, vertex ``r * cols + c``."""
    idx = np.arange(rows * cols).reshape(rows, cols)
    horizontal = np.stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()], axis=1)
    vertical = np.stack([idx[:-1, :].ravel(), idx[1:, :].ravel()], axis=1)
    return Graph(rows * cols, np.concatenate([horizontal, vertical]))


def complete_graph(n: int) -> Graph:
    i, j = np.triu_indices(n, k=1)
    return Graph(n, np.stack([i, j], axis=1))


def laplacian(graph: Graph) -> sp.csr_matrix:
    """L = D - A as a sparse symmetric matrix."""
    return (sp.diags(graph.degrees.astype(np.float64)) - graph.adjacency).tocsr()


def connected_components(graph: Graph) -> tuple[int, np.ndarray]:
    """Component count and a per-vertex component label."""
    n, labels = csgraph.connected_components(graph.adjacency, directed=False)
    return int(n), labels


def _check_vertex(graph: Graph, v: int) -> int:
    if not 0 <= int(v) < graph.n_vertices:
        raise IndexError(f"vertex {v} out of range for {graph.n_vertices} vertices")
    return int(v)


def bfs_distances(graph: Graph, source: int) -> np.ndarray:
    """Hop count from ``source`` to every vertex (``inf`` if unreachable)."""
    source = _check_vertex(graph, source)
    return csgraph.shortest_path(
        graph.adjacency, method="D", directed=False, unweighted=True, indices=source
    )


def bfs_distance(graph: Graph, v: int, w: int) -> int | None:
    """Unweighted shortest-path length between v and w, or None if unreachable."""
    w = _check_vertex(graph, w)
    d = bfs_distances(graph, v)[w]
    return None if np.isinf(d) else int(d)


def rayleigh(graph: Graph, vec: np.ndarray) -> float:
    """Rayleigh quotient vec^T L vec / vec^T vec.

    Evaluated both as a quadratic form and as the edge sum
    ½ ΣΣ A_mn (vec_n - vec_m)²; the two must agree to 1e-12.
    """
    vec = np.asarray(vec, dtype=np.float64).ravel()
    if vec.shape != (graph.n_vertices,):
        raise ValueError(f"vector length {vec.size} != vertex count {graph.n_vertices}")
    norm2 = float(vec @ vec)
    if norm2 == 0.0:
        raise ValueError("Rayleigh quotient of the zero vector is undefined")
    quadratic = float(vec @ (laplacian(graph) @ vec)) / norm2
    diff = vec[graph.edges[:, 1]] - vec[graph.edges[:, 0]]
    edge_sum = float(diff @ diff) / norm2
    scale = max(1.0, abs(edge_sum))
    if abs(quadratic - edge_sum) > 1e-12 * scale:
        logger.warning(f"Rayleigh quotient forms disagree: {quadratic!r} vs {edge_sum!r}")
    return edge_sum
