"""Element and edge quadrature rules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gpinn.mesh.mesh import Mesh

# Barycentric points of the symmetric 3-point rule (exact for quadratics).
_DEGREE2_POINTS = np.array(
    [
        [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
        [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
        [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
    ]
)


@dataclass(frozen=True)
class QuadratureSet:
    """Quadrature points with positive weights summing to the covered measure.

    ``owner`` is the element index (domain sets) or boundary edge index
    (boundary sets). Boundary sets also carry the outward unit normal of the
    owning edge at every point.
    """

    points: np.ndarray
    weights: np.ndarray
    owner: np.ndarray
    normals: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def measure(self) -> float:
        return float(self.weights.sum())

    def integrate(self, values: np.ndarray) -> float:
        """Sum of ``weights * values`` over the set."""
        return float(np.dot(self.weights, np.asarray(values, dtype=np.float64)))

    @classmethod
    def empty(cls, with_normals: bool = False) -> QuadratureSet:
        return cls(
            np.zeros((0, 2)),
            np.zeros(0),
            np.zeros(0, dtype=np.int64),
            np.zeros((0, 2)) if with_normals else None,
        )


def domain_quadrature(mesh: Mesh, order: int = 3) -> QuadratureSet:
    """Centroid rule (order 1) or symmetric 3-point rule (order 3) over every element."""
    corners = mesh.nodes[mesh.elements]
    if order == 1:
        bary = np.full((1, 3), 1.0 / 3.0)
    elif order == 3:
        bary = _DEGREE2_POINTS
    else:
        raise ValueError(f"domain quadrature order must be 1 or 3, got {order}")
    points = np.einsum("qk,ekd->eqd", bary, corners).reshape(-1, 2)
    weights = np.repeat(mesh.areas / len(bary), len(bary))
    owner = np.repeat(np.arange(mesh.n_elements), len(bary))
    return QuadratureSet(points, weights, owner)


def boundary_quadrature(
    mesh: Mesh, order: int = 2, edges: np.ndarray | None = None
) -> QuadratureSet:
    """Gauss-Legendre rule with ``order`` points per boundary edge."""
    if order not in (1, 2):
        raise ValueError(f"boundary quadrature order must be 1 or 2, got {order}")
    edges = np.arange(len(mesh.boundary)) if edges is None else np.asarray(edges, dtype=np.int64)
    if len(edges) == 0:
        return QuadratureSet.empty(with_normals=True)
    xi, wi = np.polynomial.legendre.leggauss(order)
    t = 0.5 * (xi + 1.0)
    a = mesh.nodes[mesh.boundary[edges, 0]]
    b = mesh.nodes[mesh.boundary[edges, 1]]
    points = (a[:, None, :] + t[None, :, None] * (b - a)[:, None, :]).reshape(-1, 2)
    weights = (0.5 * wi[None, :] * mesh.boundary_lengths[edges, None]).ravel()
    owner = np.repeat(edges, order)
    normals = np.repeat(mesh.boundary_normals[edges], order, axis=0)
    return QuadratureSet(points, weights, owner, normals)


def quadrature(
    mesh: Mesh, domain_order: int = 3, boundary_order: int = 2
) -> tuple[QuadratureSet, dict[str, QuadratureSet]]:
    """Domain rule plus one boundary rule per tag present on the mesh.

    Returns:
        ``(domain, boundary)`` where ``boundary`` maps tag -> QuadratureSet.
    """
    domain = domain_quadrature(mesh, domain_order)
    boundary = {
        tag: boundary_quadrature(mesh, boundary_order, mesh.edges_with_tag(tag))
        for tag in mesh.tags
    }
    return domain, boundary
