"""Fully connected tanh network with exact input derivatives.

Input Jacobians and Hessians come from torch autograd with
``create_graph=True``, so a loss built from them can itself be
differentiated with respect to the parameters. Everything runs in float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import torch
from loguru import logger
from pydantic import BaseModel
from torch import nn

DTYPE = torch.float64


class Checkpoint(BaseModel):
    """On-disk network: architecture, seed and the flat parameter vector."""

    layer_sizes: list[int]
    activation: str = "tanh"
    seed: int = 0
    parameters: list[float]


@dataclass(frozen=True)
class ParameterSlot:
    """Where one weight or bias tensor lives in the flat parameter vector."""

    name: str
    shape: tuple[int, ...]
    offset: int

    @property
    def size(self) -> int:
        return math.prod(self.shape)


class Network(nn.Module):
    """u_NN: ``layer_sizes[0]`` inputs, tanh hidden layers, linear output layer.

    Weights are Xavier-uniform (bound sqrt(6 / (n_in + n_out))) drawn from a
    generator seeded with ``seed``; biases start at zero.
    """

    def __init__(self, layer_sizes: Sequence[int], activation: str = "tanh", seed: int = 0) -> None:
        super().__init__()
        sizes = [int(s) for s in layer_sizes]
        if len(sizes) < 3:
            raise ValueError(f"network needs at least one hidden layer, got sizes {sizes}")
        if any(s < 1 for s in sizes):
            raise ValueError(f"layer widths must be >= 1, got {sizes}")
        if activation != "tanh":
            raise ValueError(f"Unsupported activation: {activation}")
        self.layer_sizes = sizes
        self.activation = activation
        self.seed = int(seed)
        self.layers = nn.ModuleList(
            nn.Linear(n_in, n_out, dtype=DTYPE) for n_in, n_out in zip(sizes[:-1], sizes[1:])
        )
        self.reset_parameters()

    def reset_parameters(self) -> None:
        gen = torch.Generator().manual_seed(self.seed)
        with torch.no_grad():
            for layer in self.layers:
                bound = math.sqrt(6.0 / (layer.in_features + layer.out_features))
                layer.weight.uniform_(-bound, bound, generator=gen)
                layer.bias.zero_()

    @property
    def input_dim(self) -> int:
        return self.layer_sizes[0]

    @property
    def output_dim(self) -> int:
        return self.layer_sizes[-1]

    @property
    def n_parameters(self) -> int:
        sizes = self.layer_sizes
        return sum((n_in + 1) * n_out for n_in, n_out in zip(sizes[:-1], sizes[1:]))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        for layer in self.layers[:-1]:
            x = torch.tanh(layer(x))
        return self.layers[-1](x)

    # ------------------------------------------------------------------
    # Flat parameter vector
    # ------------------------------------------------------------------

    def layout(self) -> list[ParameterSlot]:
        slots = []
        offset = 0
        for name, p in self.named_parameters():
            slots.append(ParameterSlot(name, tuple(p.shape), offset))
            offset += p.numel()
        return slots

    def parameter_vector(self) -> torch.Tensor:
        return nn.utils.parameters_to_vector(self.parameters()).detach().clone()

    def load_parameter_vector(self, vec: torch.Tensor | np.ndarray | Sequence[float]) -> None:
        vec = torch.as_tensor(np.asarray(vec, dtype=np.float64), dtype=DTYPE)
        if vec.numel() != self.n_parameters:
            raise ValueError(f"expected {self.n_parameters} parameters, got {vec.numel()}")
        with torch.no_grad():
            nn.utils.vector_to_parameters(vec, self.parameters())

    # ------------------------------------------------------------------
    # Checkpoints
    # ------------------------------------------------------------------

    def to_checkpoint(self) -> Checkpoint:
        return Checkpoint(
            layer_sizes=self.layer_sizes,
            activation=self.activation,
            seed=self.seed,
            parameters=self.parameter_vector().tolist(),
        )

    @classmethod
    def from_checkpoint(cls, checkpoint: Checkpoint) -> Network:
        net = cls(checkpoint.layer_sizes, checkpoint.activation, checkpoint.seed)
        net.load_parameter_vector(checkpoint.parameters)
        return net

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_checkpoint().model_dump_json())
        logger.debug(f"Saved checkpoint to {path}")
        return path

    @classmethod
    def load(cls, path: str | Path) -> Network:
        return cls.from_checkpoint(Checkpoint.model_validate_json(Path(path).read_text()))


def init_network(layer_sizes: Sequence[int], seed: int = 0) -> Network:
    """Build a reproducibly initialized tanh network."""
    return Network(layer_sizes, "tanh", seed)


# ---------------------------------------------------------------------------
# Derivatives
# ---------------------------------------------------------------------------


@dataclass
class EvalBundle:
    """Network output and its input derivatives at a batch of points.

    Attributes:
        value: (B, m).
        jacobian: (B, m, d) with ``jacobian[b, i, j] = du_i/dx_j``, or None for order 0.
        hessian: (B, m, d, d), symmetric in the last two axes, or None below order 2.
    """

    value: torch.Tensor
    jacobian: torch.Tensor | None = None
    hessian: torch.Tensor | None = None

    def laplacian(self, dims: Sequence[int] = (0, 1)) -> torch.Tensor:
        """(B, m) trace of the Hessian restricted to ``dims``."""
        if self.hessian is None:
            raise ValueError("laplacian needs an order-2 evaluation")
        idx = list(dims)
        return self.hessian[:, :, idx, idx].sum(dim=-1)


def as_input(x: torch.Tensor | np.ndarray | Sequence[float]) -> torch.Tensor:
    """Convert points to a (B, d) float64 tensor."""
    if torch.is_tensor(x):
        t = x.to(DTYPE)
    else:
        t = torch.as_tensor(np.asarray(x, dtype=np.float64))
    return t.reshape(1, -1) if t.dim() == 1 else t


def _grad(outputs: torch.Tensor, inputs: torch.Tensor) -> torch.Tensor:
    if not outputs.requires_grad:
        return torch.zeros_like(inputs)
    (g,) = torch.autograd.grad(outputs.sum(), inputs, create_graph=True, allow_unused=True)
    return torch.zeros_like(inputs) if g is None else g


def evaluate(net: Network, x: torch.Tensor | np.ndarray, order: int = 2) -> EvalBundle:
    """Evaluate ``net`` and its exact input derivatives up to ``order`` (0, 1 or 2).

    Batch rows are independent, so differentiating the batch sum of an
    output gives every row's derivative at once.
    """
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order}")
    x = as_input(x)
    if x.shape[-1] != net.input_dim:
        raise ValueError(f"input dimension {x.shape[-1]} != network input {net.input_dim}")
    if order == 0:
        return EvalBundle(net(x))

    x = x.detach().clone().requires_grad_(True)
    value = net(x)
    jac = torch.stack([_grad(value[:, i], x) for i in range(net.output_dim)], dim=1)
    if order == 1:
        return EvalBundle(value, jac)

    d = net.input_dim
    rows = [
        torch.stack([_grad(jac[:, i, j], x) for j in range(d)], dim=1)
        for i in range(net.output_dim)
    ]
    hess = torch.stack(rows, dim=1)
    hess = 0.5 * (hess + hess.transpose(-1, -2))
    return EvalBundle(value, jac, hess)


def loss_gradient(net: Network, loss: Callable[[Network], torch.Tensor]) -> torch.Tensor:
    """Exact gradient of a scalar loss with respect to the flat parameter vector."""
    value = loss(net)
    params = list(net.parameters())
    grads = torch.autograd.grad(value, params, allow_unused=True)
    return torch.cat(
        [(torch.zeros_like(p) if g is None else g).reshape(-1) for p, g in zip(params, grads)]
    ).detach()
