"""Collocation sampling on meshes."""

from __future__ import annotations

from typing import Callable, Literal

import numpy as np
from loguru import logger

from gpinn.config import SamplingConfig
from gpinn.mesh.mesh import Mesh
from gpinn.mesh.quadrature import boundary_quadrature, quadrature
from gpinn.problems.base import CollocationBatch

SamplingStrategy = Literal["uniform_random", "quadrature"]
DataFunction = Callable[[np.ndarray], np.ndarray]


def sample_in_elements(
    mesh: Mesh, n: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """``n`` points uniform over the mesh area; returns (points, owning elements)."""
    areas = mesh.areas
    elements = rng.choice(mesh.n_elements, size=n, p=areas / areas.sum())
    r = rng.random((n, 2))
    flip = r.sum(axis=1) > 1.0
    r[flip] = 1.0 - r[flip]
    corners = mesh.nodes[mesh.elements[elements]]
    points = corners[:, 0] + r[:, :1] * (corners[:, 1] - corners[:, 0]) + r[:, 1:] * (
        corners[:, 2] - corners[:, 0]
    )
    return points, elements


def sample_on_edges(
    mesh: Mesh, edges: np.ndarray, n: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """``n`` points uniform in arc length over the given boundary edges, with normals."""
    lengths = mesh.boundary_lengths[edges]
    picks = edges[rng.choice(len(edges), size=n, p=lengths / lengths.sum())]
    t = rng.random(n)[:, None]
    a = mesh.nodes[mesh.boundary[picks, 0]]
    b = mesh.nodes[mesh.boundary[picks, 1]]
    return a + t * (b - a), mesh.boundary_normals[picks]


def sample_batch(
    mesh: Mesh,
    counts: SamplingConfig | tuple[int, int, int, int],
    seed: int,
    strategy: SamplingStrategy = "uniform_random",
    data: DataFunction | None = None,
) -> CollocationBatch:
    """Draw a collocation batch.

    Args:
        mesh: Domain.
        counts: ``(N_p, N_D, N_dbc, N_nbc)`` or a SamplingConfig.
        seed: Seed of the random draws; equal seeds give identical batches.
        strategy: ``uniform_random`` (area/length weighted) or ``quadrature``
            (mesh Gauss points; counts are ignored apart from N_D).
        data: Target function for data points, required when N_D > 0.

    Raises:
        ValueError: On invalid counts, when Dirichlet points are requested on a
            mesh without dirichlet edges, or when data points lack a target.
    """
    if isinstance(counts, SamplingConfig):
        domain_order, boundary_order = counts.domain_order, counts.boundary_order
        counts = (counts.n_interior, counts.n_data, counts.n_dirichlet, counts.n_neumann)
    else:
        domain_order, boundary_order = 3, 2
    n_p, n_d, n_dbc, n_nbc = (int(c) for c in counts)
    if min(n_p, n_d, n_dbc, n_nbc) < 0 or n_p < 1:
        raise ValueError(f"invalid collocation counts {counts}: need N_p >= 1, others >= 0")

    dirichlet_edges = mesh.edges_with_tag("dirichlet")
    neumann_edges = mesh.edges_with_tag("neumann")
    if n_dbc > 0 and len(dirichlet_edges) == 0:
        raise ValueError(
            f"{n_dbc} Dirichlet points requested but mesh {mesh.name} has no dirichlet edges"
        )
    if n_d > 0 and data is None:
        raise ValueError("data points requested without a target function")

    rng = np.random.default_rng(seed)

    if strategy == "quadrature":
        domain, boundary = quadrature(mesh, domain_order, boundary_order)
        dbc = boundary_quadrature(mesh, boundary_order, dirichlet_edges)
        nbc = boundary_quadrature(mesh, boundary_order, neumann_edges)
        batch = CollocationBatch(
            interior=domain.points,
            dirichlet=dbc.points,
            dirichlet_normals=dbc.normals,
            neumann=nbc.points,
            neumann_normals=nbc.normals,
            domain_quadrature=domain,
            boundary_quadrature=boundary,
            strategy="quadrature",
        )
    elif strategy == "uniform_random":
        interior, _ = sample_in_elements(mesh, n_p, rng)
        batch = CollocationBatch(interior=interior, strategy="uniform_random")
        if n_dbc > 0:
            batch.dirichlet, batch.dirichlet_normals = sample_on_edges(
                mesh, dirichlet_edges, n_dbc, rng
            )
        if n_nbc > 0 and len(neumann_edges):
            batch.neumann, batch.neumann_normals = sample_on_edges(mesh, neumann_edges, n_nbc, rng)
        elif n_nbc > 0:
            logger.debug(f"Mesh {mesh.name} has no neumann edges; skipping Neumann points")
    else:
        raise ValueError(f"Unknown sampling strategy: {strategy}")

    if n_d > 0:
        points, _ = sample_in_elements(mesh, n_d, rng)
        values = np.asarray(data(points), dtype=np.float64)
        batch.data_points = points
        batch.data_values = values.reshape(n_d, -1)
    return batch
