"""Graph embedding: the Fiedler vector as an extra input coordinate z(x).

The nodal Fiedler vector is rescaled to [-1, 1] and extended to the whole
plane by linear finite-element interpolation (clamped to the nearest element
outside the mesh). Across a crack the duplicated nodes make z two-valued.

Usage:
    from gpinn.embedding import build_embedding, eval_z
    from gpinn.graph import fiedler, graph_from_mesh

    field = build_embedding(mesh, fiedler(graph_from_mesh(mesh)))
    z = eval_z(field, points)
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
from loguru import logger
from pydantic import BaseModel, ValidationError

from gpinn.config import EmbeddingConfig, cache_dir
from gpinn.graph.graph import graph_from_mesh
from gpinn.graph.spectral import SpectralPair, fiedler
from gpinn.mesh.locate import Locations, locate_points
from gpinn.mesh.mesh import Mesh

DifferentiationMode = Literal["frozen", "chain_rule"]


class Normalization(BaseModel):
    """Affine map ``node_values = scale * fiedler + offset``."""

    scale: float
    offset: float


@dataclass(frozen=True, eq=False)
class EmbeddingField:
    """Continuous extra coordinate over a mesh.

    Attributes:
        mesh: The mesh the values live on.
        node_values: (N,) normalized nodal values.
        normalization: The affine map that produced ``node_values``.
        differentiation_mode: ``frozen`` treats z as an independent input
            when differentiating; ``chain_rule`` adds the terms through z(x).
    """

    mesh: Mesh
    node_values: np.ndarray
    normalization: Normalization
    differentiation_mode: DifferentiationMode = "frozen"

    def __post_init__(self) -> None:
        values = np.asarray(self.node_values, dtype=np.float64).ravel()
        if values.shape != (self.mesh.n_nodes,):
            raise ValueError(
                f"embedding has {values.size} node values for {self.mesh.n_nodes} nodes"
            )
        values.setflags(write=False)
        object.__setattr__(self, "node_values", values)

    @property
    def d_z(self) -> int:
        return 1

    @classmethod
    def from_node_values(
        cls, mesh: Mesh, values: np.ndarray, mode: DifferentiationMode = "frozen"
    ) -> EmbeddingField:
        """Wrap arbitrary nodal values (identity normalization)."""
        identity = Normalization(scale=1.0, offset=0.0)
        return cls(mesh, np.array(values, dtype=np.float64), identity, mode)

    def with_mode(self, mode: DifferentiationMode) -> EmbeddingField:
        return EmbeddingField(self.mesh, self.node_values, self.normalization, mode)

    def values_at(self, locations: Locations) -> np.ndarray:
        """Interpolate at already-located points."""
        nodal = self.node_values[self.mesh.elements[locations.elements]]
        return np.einsum("pk,pk->p", locations.barycentric, nodal)

    def gradients_at(self, elements: np.ndarray) -> np.ndarray:
        """Piecewise-constant gradient of the interpolant on each given element."""
        grads = self.mesh.shape_gradients[elements]
        nodal = self.node_values[self.mesh.elements[elements]]
        return np.einsum("pkd,pk->pd", grads, nodal)

    def export(self) -> dict:
        return {
            "node_values": self.node_values.tolist(),
            "normalization": self.normalization.model_dump(),
        }


def normalize_fiedler(vec: np.ndarray) -> tuple[np.ndarray, Normalization]:
    """Affinely map ``vec`` onto [-1, 1] with both endpoints attained."""
    vec = np.asarray(vec, dtype=np.float64)
    lo, hi = float(vec.min()), float(vec.max())
    if not hi > lo:
        raise ValueError("cannot normalize a constant Fiedler vector (zero range)")
    scale = 2.0 / (hi - lo)
    offset = -1.0 - scale * lo
    values = np.clip(scale * vec + offset, -1.0, 1.0)
    values[np.argmin(vec)] = -1.0
    values[np.argmax(vec)] = 1.0
    return values, Normalization(scale=scale, offset=offset)


def build_embedding(
    mesh: Mesh, spectral: SpectralPair, mode: DifferentiationMode = "frozen"
) -> EmbeddingField:
    """Rescale the Fiedler vector of ``graph_from_mesh(mesh)`` into an EmbeddingField."""
    if len(spectral.fiedler) != mesh.n_nodes:
        raise ValueError(
            f"Fiedler vector length {len(spectral.fiedler)} != node count {mesh.n_nodes}"
        )
    values, norm = normalize_fiedler(spectral.fiedler)
    return EmbeddingField(mesh, values, norm, mode)


def _as_points(x: np.ndarray | tuple[float, float]) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    return arr.reshape(-1, 2), arr.ndim == 1


def eval_z(field: EmbeddingField, x: np.ndarray | tuple[float, float]) -> np.ndarray | float:
    """z at one point (returns a float) or a (P, 2) batch (returns (P,))."""
    points, single = _as_points(x)
    z = field.values_at(locate_points(field.mesh, points))
    return float(z[0]) if single else z


def grad_z(field: EmbeddingField, x: np.ndarray | tuple[float, float]) -> np.ndarray:
    """Gradient of z on the element that contains (or is nearest to) each point."""
    points, single = _as_points(x)
    g = field.gradients_at(locate_points(field.mesh, points).elements)
    return g[0] if single else g


def augment(field: EmbeddingField, x: np.ndarray | tuple[float, float]) -> np.ndarray:
    """Input vectors ``[x1, x2, z(x)]``, row order preserved."""
    points, single = _as_points(x)
    z = field.values_at(locate_points(field.mesh, points))
    out = np.concatenate([points, z[:, None]], axis=1)
    return out[0] if single else out


# ---------------------------------------------------------------------------
# Cache
# ---------------------------------------------------------------------------


class EmbeddingDocument(BaseModel):
    """On-disk form of a cached embedding (also written into run directories)."""

    key: str
    lambda2: float
    lambda3: float | None = None
    fiedler: list[float]
    node_values: list[float]
    normalization: Normalization

    @classmethod
    def from_field(
        cls, key: str, spectral: SpectralPair, field: EmbeddingField
    ) -> EmbeddingDocument:
        return cls(
            key=key,
            lambda2=spectral.lambda2,
            lambda3=spectral.lambda3,
            fiedler=spectral.fiedler.tolist(),
            node_values=field.node_values.tolist(),
            normalization=field.normalization,
        )

    def to_field(self, mesh: Mesh, mode: DifferentiationMode = "frozen") -> EmbeddingField:
        return EmbeddingField(mesh, np.array(self.node_values), self.normalization, mode)

    def to_spectral(self) -> SpectralPair:
        return SpectralPair(self.lambda2, np.array(self.fiedler), self.lambda3)


class EmbeddingCache:
    """Directory of embeddings keyed by mesh fingerprint and solver tolerance.

    The embedding depends only on the mesh topology, so one solve serves every
    run on the same geometry.
    """

    def __init__(self, directory: str | Path | None = None) -> None:
        self.directory = cache_dir(directory)

    @staticmethod
    def key(mesh: Mesh, tol: float) -> str:
        return hashlib.sha256(f"{mesh.fingerprint}:{tol!r}".encode()).hexdigest()

    def path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, key: str) -> EmbeddingDocument | None:
        path = self.path(key)
        if not path.exists():
            return None
        try:
            return EmbeddingDocument.model_validate_json(path.read_text())
        except ValidationError as exc:
            logger.warning(f"Ignoring corrupt embedding cache entry {path}: {exc}")
            return None

    def put(self, doc: EmbeddingDocument) -> Path:
        path = self.path(doc.key)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(doc.model_dump_json())
        tmp.replace(path)
        return path


def embedding_for_mesh(
    mesh: Mesh,
    config: EmbeddingConfig | None = None,
    seed: int = 0,
) -> tuple[EmbeddingField, SpectralPair, bool]:
    """Build (or reuse from the cache) the embedding of ``mesh``.

    Returns:
        ``(field, spectral, cache_hit)``.
    """
    config = config or EmbeddingConfig()
    cache = EmbeddingCache(config.cache_dir) if config.cache else None
    key = EmbeddingCache.key(mesh, config.tol)

    if cache is not None:
        doc = cache.get(key)
        if doc is not None and len(doc.node_values) == mesh.n_nodes:
            logger.info(f"Embedding cache hit: {key}")
            return doc.to_field(mesh, config.differentiation_mode), doc.to_spectral(), True
        logger.info(f"Embedding cache miss: {key}")

    spectral = fiedler(
        graph_from_mesh(mesh),
        tol=config.tol,
        method=config.method,
        max_iterations=config.max_iterations,
        seed=seed,
    )
    field = build_embedding(mesh, spectral, config.differentiation_mode)
    logger.info(
        f"Built embedding for {mesh.name}: lambda2={spectral.lambda2:.6g} "
        f"({spectral.iterations} iterations)"
    )
    if cache is not None:
        cache.put(EmbeddingDocument.from_field(key, spectral, field))
    return field, spectral, False
