"""Run directory layout and the files written into it.

    <run_dir>/
        config.yaml       resolved ExperimentConfig
        mesh.json         training mesh (native format)
        checkpoint.json   trained network
        history.csv       one row per iteration: iteration, optimizer, total, pde, data, ic, bc
        embedding.json    GPINN runs only
        fields/           CSV exports (grid samples, error fields)
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any

import pandas as pd
from loguru import logger

from gpinn.config import ExperimentConfig
from gpinn.embedding import EmbeddingDocument
from gpinn.mesh.io import load_mesh, save_mesh
from gpinn.mesh.mesh import Mesh
from gpinn.nn.network import Network

HISTORY_COLUMNS = ["iteration", "optimizer", "total", "pde", "data", "ic", "bc"]


@dataclass(frozen=True)
class RunArtifacts:
    """Paths of one run directory."""

    root: Path

    @property
    def config(self) -> Path:
        return self.root / "config.yaml"

    @property
    def mesh(self) -> Path:
        return self.root / "mesh.json"

    @property
    def checkpoint(self) -> Path:
        return self.root / "checkpoint.json"

    @property
    def history(self) -> Path:
        return self.root / "history.csv"

    @property
    def embedding(self) -> Path:
        return self.root / "embedding.json"

    @property
    def fields(self) -> Path:
        return self.root / "fields"

    def prepare(self) -> RunArtifacts:
        self.fields.mkdir(parents=True, exist_ok=True)
        return self

    def field_path(self, name: str) -> Path:
        return self.fields / f"{name}.csv"

    # ------------------------------------------------------------------
    # Writers
    # ------------------------------------------------------------------

    def write_config(self, config: ExperimentConfig) -> Path:
        self.config.write_text(config.to_yaml())
        return self.config

    def write_mesh(self, mesh: Mesh) -> Path:
        return save_mesh(mesh, self.mesh)

    def write_checkpoint(self, net: Network) -> Path:
        return net.save(self.checkpoint)

    def write_history(self, history: list[dict[str, Any]]) -> Path:
        frame = pd.DataFrame(history, columns=HISTORY_COLUMNS)
        frame.to_csv(self.history, index=False)
        logger.debug(f"Wrote {len(frame)} history rows to {self.history}")
        return self.history

    def write_embedding(self, document: EmbeddingDocument) -> Path:
        self.embedding.write_text(document.model_dump_json())
        return self.embedding

    def write_frame(self, name: str, frame: pd.DataFrame) -> Path:
        path = self.field_path(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False)
        logger.info(f"Wrote {name} ({len(frame)} rows) to {path}")
        return path

    # ------------------------------------------------------------------
    # Readers
    # ------------------------------------------------------------------

    def read_config(self) -> ExperimentConfig:
        return ExperimentConfig.from_yaml(self.config)

    def read_mesh(self) -> Mesh:
        return load_mesh(self.mesh)

    def read_checkpoint(self) -> Network:
        return Network.load(self.checkpoint)

    def read_history(self) -> pd.DataFrame:
        return pd.read_csv(self.history, float_precision="round_trip")

    def read_embedding(self) -> EmbeddingDocument | None:
        if not self.embedding.exists():
            return None
        return EmbeddingDocument.model_validate_json(self.embedding.read_text())
