"""End-to-end experiments: PINN or GPINN training on one geometry.

Usage:
    from gpinn.training import run_experiment

    result = run_experiment({"problem": "heat", "mode": "gpinn", "kind": "house"})
    print(result.history[-1]["total"], result.artifacts.checkpoint)

The Fiedler embedding depends only on the mesh, so GPINN runs on the same
geometry share one cached eigensolve.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import torch
from loguru import logger

from gpinn.config import ExperimentConfig, load_config
from gpinn.core.errors import GpinnError, ProblemMismatchError
from gpinn.embedding import EmbeddingCache, EmbeddingDocument, EmbeddingField, embedding_for_mesh
from gpinn.mesh.generate import generate_domain
from gpinn.mesh.io import load_mesh
from gpinn.mesh.mesh import Mesh
from gpinn.nn.network import DTYPE, Network, init_network
from gpinn.nn.optim import optimize
from gpinn.problems.base import BaseProblem, CollocationBatch, network_inputs
from gpinn.problems.elasticity import ElasticityProblemSpec
from gpinn.problems.heat import HeatProblemSpec
from gpinn.problems.registry import problem_registry
from gpinn.problems.sampling import sample_batch
from gpinn.reference.metrics import ErrorReport, relative_error
from gpinn.reference.solution import FieldSolution
from gpinn.training.artifacts import RunArtifacts
from gpinn.training.seeds import derive_seed


def build_mesh(config: ExperimentConfig) -> Mesh:
    """Training mesh: the configured file, or a generated built-in domain."""
    if config.geometry.mesh_path:
        return load_mesh(config.geometry.mesh_path)
    return generate_domain(config.geometry)


def build_problem(config: ExperimentConfig, mesh: Mesh) -> BaseProblem:
    if config.problem == "heat":
        spec = HeatProblemSpec.from_settings(config.heat, config.geometry.house)
    else:
        spec = ElasticityProblemSpec.from_settings(config.elasticity)
        if spec.dirichlet_mode == "roller":
            spec = spec.with_anchor(mesh)
    return problem_registry.create(config.problem, spec=spec)


def build_network(config: ExperimentConfig) -> Network:
    seed = config.network.seed
    if seed is None:
        seed = derive_seed(config.seed, "network")
    sizes = [config.input_dim, *config.network.hidden, config.output_dim]
    return init_network(sizes, seed)


def predict(net: Network, field: EmbeddingField | None, points: np.ndarray) -> np.ndarray:
    """(P, m) network output at physical points (z appended for GPINN)."""
    inputs, _ = network_inputs(field, points)
    with torch.no_grad():
        return net(torch.as_tensor(inputs, dtype=DTYPE)).numpy().copy()


class BatchSchedule:
    """Collocation batches redrawn every ``resample_every`` iterations.

    Batch ``k`` covers iterations ``[k * period, (k + 1) * period)`` and is
    drawn with ``derive_seed(master, "batch", k)``. ``freeze()`` pins the
    current batch (used for L-BFGS, whose line search needs a fixed loss).
    """

    def __init__(self, config: ExperimentConfig, mesh: Mesh, problem: BaseProblem) -> None:
        self.config = config
        self.mesh = mesh
        self.problem = problem
        self.period = config.sampling.resample_every
        self._index: int | None = None
        self._batch: CollocationBatch | None = None
        self._frozen = False
        self._data = self._data_target() if config.sampling.n_data > 0 else None

    def _data_target(self):
        sample = self.problem.exact(self.mesh.nodes[:1])
        if sample is not None:
            return self.problem.exact
        logger.info("No analytic solution; data targets come from the FEM reference")
        return self.problem.reference(self.mesh).evaluate

    def batch(self, iteration: int) -> CollocationBatch:
        if self._frozen and self._index is not None:
            index = self._index
        else:
            index = iteration // self.period
        if index != self._index or self._batch is None:
            seed = derive_seed(self.config.seed, "batch", index)
            self._batch = sample_batch(
                self.mesh,
                self.config.sampling,
                seed,
                strategy=self.problem.default_strategy,
                data=self._data,
            )
            self._index = index
            logger.debug(f"Drew collocation batch {index} (seed {seed})")
        return self._batch

    def freeze(self) -> None:
        self._frozen = True


@dataclass
class ExperimentResult:
    """Outcome of :func:`run_experiment`."""

    config: ExperimentConfig
    mesh: Mesh
    problem: BaseProblem
    network: Network
    field: EmbeddingField | None
    history: list[dict[str, Any]]
    stopped_reason: str
    artifacts: RunArtifacts
    cache_hit: bool = False

    @property
    def checkpoint_paths(self) -> list[Path]:
        return [self.artifacts.checkpoint]

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return predict(self.network, self.field, points)


def run_experiment(
    config: ExperimentConfig | dict | str | Path, write: bool = True
) -> ExperimentResult:
    """Train one network as configured and write its run directory.

    Adam runs on batches resampled every ``sampling.resample_every``
    iterations; L-BFGS then refines on the last batch.
    """
    config = load_config(config)
    logger.info(f"Starting experiment {config.name}: {config.problem} / {config.mode}")
    try:
        mesh = build_mesh(config)
        problem = build_problem(config, mesh)
        field: EmbeddingField | None = None
        spectral = None
        cache_hit = False
        if config.mode == "gpinn":
            field, spectral, cache_hit = embedding_for_mesh(
                mesh, config.embedding, seed=derive_seed(config.seed, "eigensolver")
            )

        net = build_network(config)
        schedule = BatchSchedule(config, mesh, problem)

        def loss_provider(iteration: int):
            return problem.loss(net, field, schedule.batch(iteration), config.weights)

        log_every = config.logging.log_every
        history: list[dict[str, Any]] = []
        reason = "budget"
        if config.optimizer.adam_iterations > 0:
            adam = optimize(net, loss_provider, config.optimizer, "adam", log_every)
            history, reason = adam.history, adam.stopped_reason
        if config.optimizer.lbfgs_iterations > 0 and reason != "converged":
            schedule.freeze()
            lbfgs = optimize(net, loss_provider, config.optimizer, "lbfgs", log_every)
            offset = len(history)
            history = history + [
                {**row, "iteration": row["iteration"] + offset} for row in lbfgs.history
            ]
            reason = lbfgs.stopped_reason
    except GpinnError as exc:
        logger.error(f"Experiment {config.name} ({config.problem}/{config.mode}) failed: {exc}")
        raise

    artifacts = RunArtifacts(config.run_dir)
    if write:
        artifacts.prepare()
        artifacts.write_config(config)
        artifacts.write_mesh(mesh)
        artifacts.write_checkpoint(net)
        artifacts.write_history(history)
        if field is not None and spectral is not None:
            key = EmbeddingCache.key(mesh, config.embedding.tol)
            artifacts.write_embedding(EmbeddingDocument.from_field(key, spectral, field))
        logger.info(f"Wrote run artifacts to {artifacts.root}")
    return ExperimentResult(
        config, mesh, problem, net, field, history, reason, artifacts, cache_hit
    )


# ---------------------------------------------------------------------------
# Saved runs
# ---------------------------------------------------------------------------


@dataclass
class LoadedRun:
    """A trained run restored from its directory."""

    config: ExperimentConfig
    mesh: Mesh
    network: Network
    field: EmbeddingField | None
    artifacts: RunArtifacts

    @property
    def components(self) -> list[str]:
        return ["u"] if self.config.problem == "heat" else ["u_x", "u_y"]

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        return predict(self.network, self.field, points)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.evaluate(points)


def load_run(run_dir: str | Path) -> LoadedRun:
    """Restore config, mesh, network and (GPINN) embedding from a run directory.

    Raises:
        FileNotFoundError: If the directory lacks a config or checkpoint.
    """
    artifacts = RunArtifacts(Path(run_dir))
    for required in (artifacts.config, artifacts.checkpoint, artifacts.mesh):
        if not required.exists():
            raise FileNotFoundError(f"run directory {run_dir} is missing {required.name}")
    config = artifacts.read_config()
    mesh = artifacts.read_mesh()
    field = None
    if config.mode == "gpinn":
        document = artifacts.read_embedding()
        if document is None:
            raise FileNotFoundError(f"gpinn run {run_dir} is missing embedding.json")
        field = document.to_field(mesh, config.embedding.differentiation_mode)
    return LoadedRun(config, mesh, artifacts.read_checkpoint(), field, artifacts)


# ---------------------------------------------------------------------------
# Comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComparisonReport:
    """Error reports of two runs against one reference, on the same points."""

    a: ErrorReport
    b: ErrorReport
    labels: tuple[str, str] = ("a", "b")

    @property
    def difference(self) -> np.ndarray:
        """Per-point ``RE_a - RE_b`` (positive where run b is more accurate)."""
        return self.a.re - self.b.re

    def frame(self) -> pd.DataFrame:
        la, lb = self.labels
        points = self.a.points
        return pd.DataFrame(
            {
                "x": points[:, 0],
                "y": points[:, 1],
                f"re_{la}": self.a.re,
                f"re_{lb}": self.b.re,
                "difference": self.difference,
            }
        )

    def summary(self) -> dict[str, dict[str, float]]:
        la, lb = self.labels
        return {
            la: {"max": self.a.max, "mean": self.a.mean, "l2": self.a.l2},
            lb: {"max": self.b.max, "mean": self.b.mean, "l2": self.b.l2},
        }


def compare_runs(
    run_a: LoadedRun | ExperimentResult,
    run_b: LoadedRun | ExperimentResult,
    reference: FieldSolution,
    points: np.ndarray,
    descriptor: str = "points",
) -> ComparisonReport:
    """Side-by-side relative errors of two runs.

    Raises:
        ProblemMismatchError: If the runs solve different problems, or the
            reference has a different component count.
    """
    if run_a.config.problem != run_b.config.problem:
        raise ProblemMismatchError(
            f"cannot compare a {run_a.config.problem} run with a {run_b.config.problem} run"
        )
    if reference.n_components != run_a.config.output_dim:
        raise ProblemMismatchError(
            f"reference has {reference.n_components} components, "
            f"runs predict {run_a.config.output_dim}"
        )
    report_a = relative_error(run_a.evaluate, reference, points, descriptor, reference.components)
    report_b = relative_error(run_b.evaluate, reference, points, descriptor, reference.components)
    labels = (run_a.config.mode, run_b.config.mode)
    if labels[0] == labels[1]:
        labels = ("a", "b")
    logger.info(
        f"Compared runs on {descriptor}: {labels[0]} mean RE {report_a.mean:.3e}, "
        f"{labels[1]} mean RE {report_b.mean:.3e}"
    )
    return ComparisonReport(report_a, report_b, labels)
