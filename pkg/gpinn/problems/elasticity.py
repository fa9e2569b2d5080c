"""Linear elasticity of a (cracked) plate, trained with the energy method.

The pde term is the potential energy: strain energy over the domain minus
the work of the traction on neumann edges. Crack faces and free edges are
traction-free, which the energy functional satisfies naturally.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import TYPE_CHECKING, Literal

import numpy as np
import torch

from gpinn.config import ElasticitySettings, LossWeights
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
    from gpinn.reference.solution import FieldSolution


@dataclass(frozen=True)
class ElasticityProblemSpec:
    """Material, loading and support of the plate.

    ``dirichlet_mode``: ``clamped`` fixes both displacement components on
    dirichlet edges; ``roller`` fixes only u_y there plus u_x at ``anchor``
    (the dirichlet node closest to the lower-left corner).
    """

    youngs_modulus: float = 1.0
    poisson_ratio: float = 0.3
    model: Literal["plane_stress", "plane_strain"] = "plane_stress"
    traction: tuple[float, float] = (0.0, 1.0)
    dirichlet_displacement: tuple[float, float] = (0.0, 0.0)
    dirichlet_mode: Literal["clamped", "roller"] = "clamped"
    anchor: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.youngs_modulus <= 0:
            raise ValueError(f"Young's modulus must be positive, got {self.youngs_modulus}")
        if not 0.0 < self.poisson_ratio < 0.5:
            raise ValueError(f"Poisson ratio must lie in (0, 0.5), got {self.poisson_ratio}")

    @classmethod
    def from_settings(cls, settings: ElasticitySettings) -> ElasticityProblemSpec:
        return cls(
            youngs_modulus=settings.youngs_modulus,
            poisson_ratio=settings.poisson_ratio,
            model=settings.model,
            traction=tuple(settings.traction),
            dirichlet_displacement=tuple(settings.dirichlet_displacement),
            dirichlet_mode=settings.dirichlet_mode,
        )

    @property
    def lame(self) -> tuple[float, float]:
        """Effective (lambda, mu) of the 2D constitutive law."""
        e, nu = self.youngs_modulus, self.poisson_ratio
        mu = e / (2.0 * (1.0 + nu))
        if self.model == "plane_stress":
            lam = e * nu / (1.0 - nu**2)
        else:
            lam = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
        return lam, mu

    def voigt_matrix(self) -> np.ndarray:
        """3x3 stiffness acting on (eps_xx, eps_yy, 2 eps_xy)."""
        lam, mu = self.lame
        return np.array(
            [[lam + 2 * mu, lam, 0.0], [lam, lam + 2 * mu, 0.0], [0.0, 0.0, mu]]
        )

    def with_anchor(self, mesh: Mesh) -> ElasticityProblemSpec:
        return dataclasses.replace(self, anchor=tuple(mesh.nodes[roller_anchor(mesh)]))


def roller_anchor(mesh: Mesh) -> int:
    """Dirichlet node closest to the lower-left corner of the mesh."""
    nodes = mesh.tag_nodes("dirichlet")
    if len(nodes) == 0:
        raise ValueError(f"mesh {mesh.name} has no dirichlet edges")
    xmin, _, ymin, _ = mesh.bounds
    d = np.linalg.norm(mesh.nodes[nodes] - np.array([xmin, ymin]), axis=1)
    return int(nodes[np.argmin(d)])


def _tensor(values) -> torch.Tensor:
    return torch.as_tensor(np.asarray(values, dtype=np.float64), dtype=DTYPE)


def strain(
    net: Network, field: EmbeddingField | None, x: np.ndarray
) -> torch.Tensor:
    """(P, 2, 2) small strain 0.5 (grad u + grad u^T) over the spatial inputs."""
    grad = spatial_derivatives(net, field, x, order=1).gradient
    return 0.5 * (grad + grad.transpose(1, 2))


def stress(spec: ElasticityProblemSpec, eps):
    """sigma = lambda tr(eps) I + 2 mu eps (numpy arrays or torch tensors, (..., 2, 2))."""
    lam, mu = spec.lame
    if torch.is_tensor(eps):
        eye = torch.eye(2, dtype=eps.dtype)
    else:
        eps = np.asarray(eps, dtype=np.float64)
        eye = np.eye(2)
    tr = eps[..., 0, 0] + eps[..., 1, 1]
    return 2.0 * mu * eps + lam * tr[..., None, None] * eye


def energy_loss(
    net: Network,
    field: EmbeddingField | None,
    batch: CollocationBatch,
    spec: ElasticityProblemSpec,
    weights: LossWeights | None = None,
) -> LossBreakdown:
    """Potential-energy loss on a quadrature batch.

    pde  = sum_q w_q 0.5 sigma:eps - sum_b w_b t.u on the traction edges
    data = mean ||u - u*||^2 over data points
    bc   = mean ||u - u_bc||^2 on dirichlet points + mean ||sigma n - t||^2 on neumann points

    Raises:
        ValueError: If the batch carries no domain quadrature or no traction edges.
    """
    weights = weights or LossWeights()
    domain = batch.domain_quadrature
    traction_quad = batch.boundary_quadrature.get("neumann")
    if domain is None:
        raise ValueError("energy loss needs a quadrature batch (strategy='quadrature')")
    if traction_quad is None or len(traction_quad) == 0:
        raise ValueError("energy loss needs a traction (neumann) boundary")
    t_bar = _tensor(spec.traction)

    eps = strain(net, field, domain.points)
    sig = stress(spec, eps)
    density = 0.5 * (sig * eps).sum(dim=(1, 2))
    internal = (_tensor(domain.weights) * density).sum()
    u_b = spatial_derivatives(net, field, traction_quad.points, order=0).value
    external = (_tensor(traction_quad.weights) * (u_b @ t_bar)).sum()
    pde = internal - external

    data = torch.zeros((), dtype=DTYPE)
    if batch.n_data:
        u = spatial_derivatives(net, field, batch.data_points, order=0).value
        data = mean_square(u - _tensor(batch.data_values))

    bc = torch.zeros((), dtype=DTYPE)
    if batch.n_dirichlet:
        u = spatial_derivatives(net, field, batch.dirichlet, order=0).value
        target = _tensor(spec.dirichlet_displacement)
        if spec.dirichlet_mode == "clamped":
            bc = bc + mean_square(u - target)
        else:
            bc = bc + mean_square(u[:, 1] - target[1])
            if spec.anchor is not None:
                u_a = spatial_derivatives(net, field, np.array([spec.anchor]), order=0).value
                bc = bc + mean_square(u_a[:, 0] - target[0])
    if batch.n_neumann:
        sig_n = stress(spec, strain(net, field, batch.neumann))
        traction = (sig_n * _tensor(batch.neumann_normals)[:, None, :]).sum(dim=2)
        bc = bc + mean_square(traction - t_bar)
    return LossBreakdown(pde=pde, data=data, bc=bc, weights=weights)


class ElasticityProblem(BaseProblem):
    """Plate under tension, energy-method loss on mesh quadrature."""

    default_strategy = "quadrature"

    def __init__(self, spec: ElasticityProblemSpec | None = None) -> None:
        self.spec = spec or ElasticityProblemSpec()

    @property
    def name(self) -> str:
        return "elasticity"

    @property
    def components(self) -> list[str]:
        return ["u_x", "u_y"]

    def loss(
        self,
        net: Network,
        field: EmbeddingField | None,
        batch: CollocationBatch,
        weights: LossWeights,
    ) -> LossBreakdown:
        return energy_loss(net, field, batch, self.spec, weights)

    def reference(self, mesh: Mesh) -> FieldSolution:
        from gpinn.reference.fem import solve_elasticity_fem

        return solve_elasticity_fem(mesh, self.spec)
