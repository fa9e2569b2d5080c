"""Training loops: Adam, L-BFGS, or Adam followed by L-BFGS refinement.

A loss provider is called once per iteration (Adam) or once per function
evaluation (L-BFGS line search) with the iteration number and returns either
a scalar tensor or an object exposing ``total`` (tensor) and ``record()``
(dict of floats). Every iteration appends one row to the history.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Literal, Protocol, Union

import torch
from loguru import logger

from gpinn.config import OptimizerConfig
from gpinn.core.errors import NonFiniteLossError
from gpinn.nn.network import Network

Schedule = Literal["adam", "lbfgs", "adam_then_lbfgs"]


class LossLike(Protocol):
    total: torch.Tensor

    def record(self) -> dict[str, float]: ...


LossProvider = Callable[[int], Union[torch.Tensor, LossLike]]


@dataclass
class OptimizerState:
    """Snapshot of one optimizer phase."""

    method: Literal["adam", "lbfgs"]
    step: int
    learning_rate: float
    hyperparameters: dict[str, Any] = field(default_factory=dict)


@dataclass
class OptimizationResult:
    network: Network
    history: list[dict[str, Any]]
    stopped_reason: Literal["budget", "converged"]
    states: list[OptimizerState] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.history)

    @property
    def final_loss(self) -> float:
        return self.history[-1]["total"] if self.history else math.nan


def _unpack(loss: torch.Tensor | LossLike) -> tuple[torch.Tensor, dict[str, float]]:
    if torch.is_tensor(loss):
        return loss, {"total": float(loss.detach())}
    return loss.total, loss.record()


class _Stopper:
    """Converged once the best loss improves by less than ``tol`` over ``patience`` iterations."""

    def __init__(self, tol: float, patience: int) -> None:
        self.tol = tol
        self.patience = patience
        self.best: list[float] = []

    def update(self, total: float) -> bool:
        self.best.append(min(total, self.best[-1]) if self.best else total)
        if self.tol <= 0 or len(self.best) <= self.patience:
            return False
        return self.best[-self.patience - 1] - self.best[-1] < self.tol


def optimize(
    net: Network,
    loss_provider: LossProvider,
    config: OptimizerConfig | None = None,
    schedule: Schedule | None = None,
    log_every: int = 500,
) -> OptimizationResult:
    """Minimize the provided loss over the network parameters.

    Args:
        net: Network trained in place.
        loss_provider: ``iteration -> loss``.
        config: Budgets, learning rates and the convergence test.
        schedule: Phases to run; by default Adam then L-BFGS, skipping any
            phase with a zero budget.
        log_every: Progress logging period in iterations.

    Raises:
        NonFiniteLossError: If an iteration's loss is NaN or infinite.
    """
    config = config or OptimizerConfig()
    if schedule is None:
        schedule = "adam_then_lbfgs"
    phases = {"adam": ["adam"], "lbfgs": ["lbfgs"], "adam_then_lbfgs": ["adam", "lbfgs"]}[schedule]
    history: list[dict[str, Any]] = []
    states: list[OptimizerState] = []
    stopper = _Stopper(config.tol, config.patience)
    reason: Literal["budget", "converged"] = "budget"

    for phase in phases:
        budget = config.adam_iterations if phase == "adam" else config.lbfgs_iterations
        if budget < 1:
            continue
        logger.debug(f"Starting {phase} phase: {budget} iterations")
        runner = _run_adam if phase == "adam" else _run_lbfgs
        converged, state = runner(net, loss_provider, config, budget, history, stopper, log_every)
        states.append(state)
        if converged:
            reason = "converged"
            break

    if not history:
        raise ValueError("optimize needs an iteration budget >= 1")
    logger.info(
        f"Optimization finished after {len(history)} iterations ({reason}): "
        f"loss {history[-1]['total']:.6e}"
    )
    return OptimizationResult(net, history, reason, states)


def _append(
    history: list[dict[str, Any]], method: str, record: dict[str, float], log_every: int
) -> None:
    iteration = len(history)
    if not all(math.isfinite(v) for v in record.values()):
        raise NonFiniteLossError(iteration, record)
    history.append({"iteration": iteration, "optimizer": method, **record})
    if iteration % log_every == 0:
        terms = " ".join(f"{k}={v:.4e}" for k, v in record.items())
        logger.info(f"[{method}] iteration {iteration}: {terms}")


def _run_adam(net, loss_provider, config, budget, history, stopper, log_every):
    opt = torch.optim.Adam(
        net.parameters(), lr=config.learning_rate, betas=config.betas, eps=config.eps
    )
    converged = False
    for _ in range(budget):
        opt.zero_grad(set_to_none=True)
        total, record = _unpack(loss_provider(len(history)))
        _append(history, "adam", record, log_every)
        total.backward()
        opt.step()
        if stopper.update(record["total"]):
            converged = True
            break
    steps = [s.get("step", 0) for s in opt.state.values()]
    state = OptimizerState(
        "adam",
        int(max((int(s) for s in steps), default=0)),
        config.learning_rate,
        {"betas": tuple(config.betas), "eps": config.eps},
    )
    return converged, state


def _run_lbfgs(net, loss_provider, config, budget, history, stopper, log_every):
    opt = torch.optim.LBFGS(
        net.parameters(),
        lr=config.lbfgs_learning_rate,
        max_iter=1,
        history_size=config.lbfgs_memory,
        line_search_fn="strong_wolfe",
    )
    converged = False
    for _ in range(budget):
        first: dict[str, float] = {}
        iteration = len(history)

        def closure() -> torch.Tensor:
            opt.zero_grad(set_to_none=True)
            total, record = _unpack(loss_provider(iteration))
            if not first:
                first.update(record)
                _append(history, "lbfgs", record, log_every)
            total.backward()
            return total

        opt.step(closure)
        if stopper.update(first["total"]):
            converged = True
            break
    lbfgs_state = opt.state[next(iter(net.parameters()))]
    state = OptimizerState(
        "lbfgs",
        int(lbfgs_state.get("n_iter", 0)),
        config.lbfgs_learning_rate,
        {
            "memory": config.lbfgs_memory,
            "history_length": len(lbfgs_state.get("old_dirs", [])),
        },
    )
    return converged, state
