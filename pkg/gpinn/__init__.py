"""gpinn - physics-informed neural networks with a graph-spectral input coordinate.

A GPINN feeds the network ``[x, y, z(x)]`` where z is the Fiedler vector of
the mesh-connectivity graph, interpolated over the mesh. Points on opposite
sides of a wall or crack get very different z, which lets the network
represent fields that jump across thin obstacles.

Quick start (config-driven):
    $ pip install gpinn
    $ gpinn init              # generates gpinn.yaml
    $ gpinn train --config gpinn.yaml

Quick start (programmatic):
    from gpinn import run_experiment

    result = run_experiment({"problem": "heat", "mode": "gpinn", "kind": "house", "h": 0.05})
    print(result.history[-1])
"""

__version__ = "0.1.0"

# Core
from gpinn.config import ExperimentConfig, load_config
from gpinn.core.errors import (
    DegenerateSpectrumWarning,
    DisconnectedGraphError,
    GpinnError,
    NoConvergenceError,
    NonFiniteLossError,
    SingularSystemError,
)

# Geometry and embedding
from gpinn.mesh import Mesh, generate_domain, load_mesh, save_mesh
from gpinn.graph import Graph, fiedler, graph_from_mesh
from gpinn.embedding import EmbeddingField, augment, build_embedding, eval_z, grad_z

# Networks and problems
from gpinn.nn import Network, evaluate, optimize
from gpinn.problems import problem_registry, sample_batch

# Reference and experiments
from gpinn.reference import FieldSolution, relative_error
from gpinn.training import compare_runs, load_run, run_experiment

__all__ = [
    # Core
    "ExperimentConfig",
    "load_config",
    "GpinnError",
    "DegenerateSpectrumWarning",
    "DisconnectedGraphError",
    "NoConvergenceError",
    "NonFiniteLossError",
    "SingularSystemError",
    # Geometry and embedding
    "Mesh",
    "generate_domain",
    "load_mesh",
    "save_mesh",
    "Graph",
    "fiedler",
    "graph_from_mesh",
    "EmbeddingField",
    "augment",
    "build_embedding",
    "eval_z",
    "grad_z",
    # Networks and problems
    "Network",
    "evaluate",
    "optimize",
    "problem_registry",
    "sample_batch",
    # Reference and experiments
    "FieldSolution",
    "relative_error",
    "compare_runs",
    "load_run",
    "run_experiment",
]
