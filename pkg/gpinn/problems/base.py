"""Base problem interface and shared loss plumbing.

A problem turns network evaluations on a CollocationBatch into a
LossBreakdown: total = w_pde * pde + w_data * data + w_ic * ic + w_bc * bc.
PINN runs feed the network raw coordinates; GPINN runs feed ``[x, y, z(x)]``.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np
import torch

from gpinn.config import LossWeights
from gpinn.embedding import EmbeddingField
from gpinn.mesh.locate import locate_points
from gpinn.mesh.quadrature import QuadratureSet
from gpinn.nn.network import DTYPE, Network, evaluate

if TYPE_CHECKING:
    from gpinn.mesh.mesh import Mesh
    from gpinn.reference.solution import FieldSolution


def _zero() -> torch.Tensor:
    return torch.zeros((), dtype=DTYPE)


@dataclass
class LossBreakdown:
    """The four weighted loss terms; ``ic`` stays zero for steady problems."""

    pde: torch.Tensor
    data: torch.Tensor = field(default_factory=_zero)
    ic: torch.Tensor = field(default_factory=_zero)
    bc: torch.Tensor = field(default_factory=_zero)
    weights: LossWeights = field(default_factory=LossWeights)

    @property
    def total(self) -> torch.Tensor:
        w = self.weights
        return w.pde * self.pde + w.data * self.data + w.ic * self.ic + w.bc * self.bc

    def record(self) -> dict[str, float]:
        return {
            "total": float(self.total.detach()),
            "pde": float(self.pde.detach()),
            "data": float(self.data.detach()),
            "ic": float(self.ic.detach()),
            "bc": float(self.bc.detach()),
        }


def _empty_points() -> np.ndarray:
    return np.zeros((0, 2))


@dataclass
class CollocationBatch:
    """Points at which the loss terms are evaluated.

    ``domain_quadrature`` and ``boundary_quadrature`` are only set by the
    quadrature strategy; the energy loss integrates with them.
    """

    interior: np.ndarray
    dirichlet: np.ndarray = field(default_factory=_empty_points)
    dirichlet_normals: np.ndarray = field(default_factory=_empty_points)
    neumann: np.ndarray = field(default_factory=_empty_points)
    neumann_normals: np.ndarray = field(default_factory=_empty_points)
    data_points: np.ndarray = field(default_factory=_empty_points)
    data_values: np.ndarray = field(default_factory=lambda: np.zeros((0, 1)))
    domain_quadrature: QuadratureSet | None = None
    boundary_quadrature: dict[str, QuadratureSet] = field(default_factory=dict)
    strategy: str = "uniform_random"

    @property
    def n_interior(self) -> int:
        return len(self.interior)

    @property
    def n_data(self) -> int:
        return len(self.data_points)

    @property
    def n_dirichlet(self) -> int:
        return len(self.dirichlet)

    @property
    def n_neumann(self) -> int:
        return len(self.neumann)


# ---------------------------------------------------------------------------
# Network inputs and spatial derivatives
# ---------------------------------------------------------------------------


@dataclass
class SpatialDerivatives:
    """Network output and its derivatives with respect to the physical coordinates.

    Attributes:
        value: (P, m).
        gradient: (P, m, 2) or None.
        hessian: (P, m, 2, 2) or None.
    """

    value: torch.Tensor
    gradient: torch.Tensor | None = None
    hessian: torch.Tensor | None = None

    @property
    def laplacian(self) -> torch.Tensor:
        assert self.hessian is not None
        return self.hessian[:, :, 0, 0] + self.hessian[:, :, 1, 1]


def network_inputs(
    field: EmbeddingField | None, points: np.ndarray
) -> tuple[np.ndarray, np.ndarray | None]:
    """Network inputs for ``points`` and, for GPINN, the located elements.

    PINN (``field is None``) uses the coordinates; GPINN appends z(x).
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if field is None:
        return points, None
    loc = locate_points(field.mesh, points)
    z = field.values_at(loc)
    return np.concatenate([points, z[:, None]], axis=1), loc.elements


def spatial_derivatives(
    net: Network,
    field: EmbeddingField | None,
    points: np.ndarray,
    order: int = 2,
    z_gradient: np.ndarray | None = None,
) -> SpatialDerivatives:
    """Derivatives of u(x, z(x)) with respect to x.

    In ``frozen`` mode (and for PINN) these are the partial derivatives in
    the spatial inputs, holding z fixed. In ``chain_rule`` mode

        du/dx_i = u_i + u_z z_i
        d2u/dx_i dx_j = u_ij + u_iz z_j + u_jz z_i + u_zz z_i z_j

    where the z-Hessian is dropped because z is piecewise linear.
    ``z_gradient`` overrides the embedding's gradient in chain-rule mode.
    """
    inputs, elements = network_inputs(field, points)
    bundle = evaluate(net, inputs, order)
    if order == 0:
        return SpatialDerivatives(bundle.value)

    chain = field is not None and field.differentiation_mode == "chain_rule"
    jac = bundle.jacobian
    grad = jac[:, :, :2]
    if chain:
        if z_gradient is None:
            z_gradient = field.gradients_at(elements)
        g = torch.as_tensor(np.asarray(z_gradient, dtype=np.float64), dtype=DTYPE)
        u_z = jac[:, :, 2:3]
        grad = grad + u_z * g[:, None, :]
    if order == 1:
        return SpatialDerivatives(bundle.value, grad)

    hess = bundle.hessian[:, :, :2, :2]
    if chain:
        u_iz = bundle.hessian[:, :, :2, 2]
        u_zz = bundle.hessian[:, :, 2, 2]
        gi = g[:, None, :, None]
        gj = g[:, None, None, :]
        hess = (
            hess
            + u_iz[:, :, :, None] * gj
            + u_iz[:, :, None, :] * gi
            + u_zz[:, :, None, None] * gi * gj
        )
    return SpatialDerivatives(bundle.value, grad, hess)


def mean_square(x: torch.Tensor) -> torch.Tensor:
    """Mean of squared entries summed over trailing axes; zero for an empty batch."""
    if x.shape[0] == 0:
        return _zero()
    return (x.reshape(x.shape[0], -1) ** 2).sum(dim=1).mean()


# ---------------------------------------------------------------------------
# Problem interface
# ---------------------------------------------------------------------------


class BaseProblem(ABC):
    """Abstract PDE problem.

    Subclasses bind a problem spec and implement the loss and the reference
    solve. They are pure: no I/O, no state beyond their problem settings.
    """

    #: Sampling strategy the loss expects.
    default_strategy: str = "uniform_random"

    @property
    @abstractmethod
    def name(self) -> str:
        """Registry name (``heat``, ``elasticity``)."""
        ...

    @property
    @abstractmethod
    def components(self) -> list[str]:
        """Output component names, in network output order."""
        ...

    @property
    def output_dim(self) -> int:
        return len(self.components)

    @abstractmethod
    def loss(
        self,
        net: Network,
        field: EmbeddingField | None,
        batch: CollocationBatch,
        weights: LossWeights,
    ) -> LossBreakdown:
        """Assemble the weighted loss terms on ``batch``."""
        ...

    @abstractmethod
    def reference(self, mesh: Mesh) -> FieldSolution:
        """Solve the problem with the built-in FEM reference solver."""
        ...

    def exact(self, points: np.ndarray) -> np.ndarray | None:
        """Analytic solution at points, when one is known."""
        return None
