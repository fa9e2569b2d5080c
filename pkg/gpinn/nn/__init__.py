"""Network, exact input derivatives and optimizers."""

from gpinn.nn.network import (
    Checkpoint,
    EvalBundle,
    Network,
    ParameterSlot,
    evaluate,
    init_network,
    loss_gradient,
)
from gpinn.nn.optim import OptimizationResult, OptimizerState, optimize

__all__ = [
    "Checkpoint",
    "EvalBundle",
    "Network",
    "OptimizationResult",
    "OptimizerState",
    "ParameterSlot",
    "evaluate",
    "init_network",
    "loss_gradient",
    "optimize",
]
