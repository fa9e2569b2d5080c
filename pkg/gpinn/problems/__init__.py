"""PDE problems and their loss functions.

Usage:
    from gpinn.problems import problem_registry, sample_batch

    problem = problem_registry.create("heat")
    batch = sample_batch(mesh, (4096, 0, 512, 512), seed=0)
    breakdown = problem.loss(net, field, batch, weights)
"""

from gpinn.problems.base import (
    BaseProblem,
    CollocationBatch,
    LossBreakdown,
    SpatialDerivatives,
    network_inputs,
    spatial_derivatives,
)
from gpinn.problems.elasticity import (
    ElasticityProblem,
    ElasticityProblemSpec,
    energy_loss,
    roller_anchor,
    strain,
    stress,
)
from gpinn.problems.heat import HeatProblem, HeatProblemSpec, heat_loss, heat_residual
from gpinn.problems.registry import problem_registry
from gpinn.problems.sampling import sample_batch

__all__ = [
    "BaseProblem",
    "CollocationBatch",
    "ElasticityProblem",
    "ElasticityProblemSpec",
    "HeatProblem",
    "HeatProblemSpec",
    "LossBreakdown",
    "SpatialDerivatives",
    "energy_loss",
    "heat_loss",
    "heat_residual",
    "network_inputs",
    "problem_registry",
    "roller_anchor",
    "sample_batch",
    "spatial_derivatives",
    "strain",
    "stress",
]
