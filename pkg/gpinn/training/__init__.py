"""Experiment orchestration, run directories and seed derivation."""

from gpinn.training.artifacts import HISTORY_COLUMNS, RunArtifacts
from gpinn.training.experiment import (
    BatchSchedule,
    ComparisonReport,
    ExperimentResult,
    LoadedRun,
    build_mesh,
    build_network,
    build_problem,
    compare_runs,
    load_run,
    predict,
    run_experiment,
)
from gpinn.training.seeds import PURPOSES, derive_seed

__all__ = [
    "HISTORY_COLUMNS",
    "PURPOSES",
    "BatchSchedule",
    "ComparisonReport",
    "ExperimentResult",
    "LoadedRun",
    "RunArtifacts",
    "build_mesh",
    "build_network",
    "build_problem",
    "compare_runs",
    "load_run",
    "predict",
    "run_experiment",
    "derive_seed",
]
