"""Steady heat conduction: Delta u = f with window and wall boundary data.

The source is a disc of constant signed strength s0; u = u_d on dirichlet
edges (the window) and du/dn = v_n on neumann edges (insulated walls by
default). A manufactured case replaces f and u_d with its analytic data.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
import torch

from gpinn.config import HeatSettings, HouseGeometry, LossWeights
from gpinn.embedding import EmbeddingField
from gpinn.nn.network import DTYPE, Network
from gpinn.problems.base import (
    BaseProblem,
    CollocationBatch,
    LossBreakdown,
    mean_square,
    spatial_derivatives,
)

if TYPE_CHECKING:
    from gpinn.mesh.mesh import Mesh
    from gpinn.reference.manufactured import ManufacturedCase
    from gpinn.reference.solution import FieldSolution


@dataclass(frozen=True)
class HeatProblemSpec:
    source_strength: float = 1.0
    source_center: tuple[float, float] = (0.1, 0.85)
    source_radius: float = 0.08
    dirichlet_value: float = 0.0
    neumann_value: float = 0.0
    manufactured: str | None = None

    @classmethod
    def from_settings(
        cls, settings: HeatSettings, house: HouseGeometry | None = None
    ) -> HeatProblemSpec:
        house = house or HouseGeometry()
        return cls(
            source_strength=settings.source_strength,
            source_center=tuple(house.source_center),
            source_radius=house.source_radius,
            dirichlet_value=settings.dirichlet_value,
            neumann_value=settings.neumann_value,
            manufactured=settings.manufactured,
        )

    @property
    def case(self) -> ManufacturedCase | None:
        if self.manufactured is None:
            return None
        from gpinn.reference.manufactured import manufactured_poisson

        return manufactured_poisson(self.manufactured)

    def source(self, points: np.ndarray) -> np.ndarray:
        """f at points: s0 inside the source disc (boundary included), 0 outside."""
        points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        case = self.case
        if case is not None:
            return case.source(points)
        d = np.linalg.norm(points - np.asarray(self.source_center), axis=1)
        return np.where(d <= self.source_radius, self.source_strength, 0.0)

    def dirichlet(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        case = self.case
        if case is not None:
            return case.dirichlet(points)
        return np.full(len(points), self.dirichlet_value)

    def neumann(self, points: np.ndarray) -> np.ndarray:
        return np.full(len(np.asarray(points).reshape(-1, 2)), self.neumann_value)


def _tensor(values: np.ndarray) -> torch.Tensor:
    return torch.as_tensor(np.asarray(values, dtype=np.float64), dtype=DTYPE)


def heat_residual(
    net: Network,
    field: EmbeddingField | None,
    x: np.ndarray,
    spec: HeatProblemSpec,
    z_gradient: np.ndarray | None = None,
) -> torch.Tensor:
    """Delta u(x) - f(x) at each point (P,)."""
    points = np.asarray(x, dtype=np.float64).reshape(-1, 2)
    derivs = spatial_derivatives(net, field, points, order=2, z_gradient=z_gradient)
    return derivs.laplacian[:, 0] - _tensor(spec.source(points))


def heat_loss(
    net: Network,
    field: EmbeddingField | None,
    batch: CollocationBatch,
    spec: HeatProblemSpec,
    weights: LossWeights | None = None,
) -> LossBreakdown:
    """Collocation loss: mean squared residual, data misfit and boundary misfits."""
    if batch.n_interior == 0:
        raise ValueError("heat loss needs at least one interior point")
    weights = weights or LossWeights()
    pde = mean_square(heat_residual(net, field, batch.interior, spec))

    data = torch.zeros((), dtype=DTYPE)
    if batch.n_data:
        u = spatial_derivatives(net, field, batch.data_points, order=0).value[:, 0]
        data = mean_square(u - _tensor(batch.data_values[:, 0]))

    bc = torch.zeros((), dtype=DTYPE)
    if batch.n_dirichlet:
        u = spatial_derivatives(net, field, batch.dirichlet, order=0).value[:, 0]
        bc = bc + mean_square(u - _tensor(spec.dirichlet(batch.dirichlet)))
    if batch.n_neumann:
        grad = spatial_derivatives(net, field, batch.neumann, order=1).gradient[:, 0, :]
        flux = (grad * _tensor(batch.neumann_normals)).sum(dim=1)
        bc = bc + mean_square(flux - _tensor(spec.neumann(batch.neumann)))
    return LossBreakdown(pde=pde, data=data, bc=bc, weights=weights)


class HeatProblem(BaseProblem):
    """Poisson heat problem with collocation loss."""

    default_strategy = "uniform_random"

    def __init__(self, spec: HeatProblemSpec | None = None) -> None:
        self.spec = spec or HeatProblemSpec()

    @property
    def name(self) -> str:
        return "heat"

    @property
    def components(self) -> list[str]:
        return ["u"]

    def loss(
        self,
        net: Network,
        field: EmbeddingField | None,
        batch: CollocationBatch,
        weights: LossWeights,
    ) -> LossBreakdown:
        return heat_loss(net, field, batch, self.spec, weights)

    def reference(self, mesh: Mesh) -> FieldSolution:
        from gpinn.reference.fem import solve_poisson_fem

        return solve_poisson_fem(mesh, self.spec)

    def exact(self, points: np.ndarray) -> np.ndarray | None:
        case = self.spec.case
        return None if case is None else case.exact(points)[:, None]
