"""Fiedler pair of a graph Laplacian.

The default solver is a deflated block inverse iteration: a block of three
vectors orthogonal to the constant kernel is repeatedly multiplied by L^+
(conjugate-gradient solves, which stay in the range of L for right-hand
sides orthogonal to 1) and rotated by a Rayleigh-Ritz step. The lowest Ritz
pair converges to (lambda2, u2); the next one gives lambda3 for the
degeneracy check. A dense eigendecomposition is kept as the oracle for small
graphs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from loguru import logger
from scipy.sparse.linalg import cg

from gpinn.core.errors import DegenerateSpectrumWarning, DisconnectedGraphError, NoConvergenceError
from gpinn.graph.graph import Graph, connected_components, laplacian

FiedlerMethod = Literal["inverse_iteration", "dense"]

DENSE_LIMIT = 2000
BLOCK_SIZE = 3
# Entries within this relative distance of the largest magnitude are tied for
# the sign convention; the lowest index wins.
SIGN_TIE_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class SpectralPair:
    """Smallest non-zero Laplacian eigenvalue and its unit, sign-fixed eigenvector."""

    lambda2: float
    fiedler: np.ndarray
    lambda3: float | None = None
    iterations: int = 0
    residual: float = 0.0

    @property
    def degenerate(self) -> bool:
        return self.lambda3 is not None and self.lambda3 - self.lambda2 < 1e-10


def fix_sign(vec: np.ndarray) -> np.ndarray:
    """Flip ``vec`` so its largest-magnitude entry (lowest index among ties) is positive."""
    mag = np.abs(vec)
    top = mag.max()
    k = int(np.flatnonzero(mag >= top * (1.0 - SIGN_TIE_RTOL))[0])
    return -vec if vec[k] < 0 else vec


def _finish(vec: np.ndarray) -> np.ndarray:
    vec = vec - vec.mean()
    vec = vec / np.linalg.norm(vec)
    return fix_sign(vec)


def dense_spectrum(graph: Graph) -> tuple[np.ndarray, np.ndarray]:
    """All Laplacian eigenvalues (ascending) and orthonormal eigenvectors (columns)."""
    if graph.n_vertices > DENSE_LIMIT:
        raise ValueError(
            f"dense eigendecomposition is limited to {DENSE_LIMIT} vertices, "
            f"graph has {graph.n_vertices}"
        )
    return scipy.linalg.eigh(laplacian(graph).toarray())


def fiedler(
    graph: Graph,
    tol: float = 1e-10,
    method: FiedlerMethod = "inverse_iteration",
    max_iterations: int = 10000,
    seed: int = 0,
) -> SpectralPair:
    """Compute the Fiedler pair (lambda2, u2).

    Args:
        graph: A connected graph with at least two vertices.
        tol: Target for ``||L u2 - lambda2 u2||_inf`` and the degeneracy gap.
        method: ``inverse_iteration`` (sparse, default) or ``dense`` (oracle).
        max_iterations: Outer iteration cap for inverse iteration.
        seed: Seed of the random starting block.

    Returns:
        SpectralPair with a unit-norm, mean-zero vector whose largest-magnitude
        entry is positive.

    Raises:
        DisconnectedGraphError: If the graph has more than one component.
        NoConvergenceError: If inverse iteration hits ``max_iterations``.
    """
    if graph.n_vertices < 2:
        raise ValueError("Fiedler vector needs at least two vertices")
    n_components, _ = connected_components(graph)
    if n_components > 1:
        raise DisconnectedGraphError(n_components)

    if method == "dense" or graph.n_vertices <= BLOCK_SIZE + 1:
        pair = _fiedler_dense(graph)
    elif method == "inverse_iteration":
        pair = _fiedler_inverse_iteration(graph, tol, max_iterations, seed)
    else:
        raise ValueError(f"Unknown Fiedler method: {method}")

    if pair.lambda3 is not None and pair.lambda3 - pair.lambda2 < tol:
        msg = (
            f"lambda2 = {pair.lambda2:.6g} is numerically repeated "
            f"(lambda3 - lambda2 = {pair.lambda3 - pair.lambda2:.3e}); the embedding is not unique"
        )
        logger.warning(msg)
        warnings.warn(msg, DegenerateSpectrumWarning, stacklevel=2)
    logger.debug(
        f"Fiedler pair: lambda2={pair.lambda2:.10g} after {pair.iterations} iterations "
        f"(residual {pair.residual:.2e})"
    )
    return pair


def _fiedler_dense(graph: Graph) -> SpectralPair:
    values, vectors = dense_spectrum(graph)
    vec = _finish(vectors[:, 1])
    lap = laplacian(graph)
    lam = float(values[1])
    residual = float(np.abs(lap @ vec - lam * vec).max())
    lambda3 = float(values[2]) if len(values) > 2 else None
    return SpectralPair(lam, vec, lambda3, iterations=0, residual=residual)


def _fiedler_inverse_iteration(
    graph: Graph, tol: float, max_iterations: int, seed: int
) -> SpectralPair:
    n = graph.n_vertices
    lap = laplacian(graph)
    precond = sp.diags(1.0 / graph.degrees.astype(np.float64))
    k = min(BLOCK_SIZE, n - 1)

    rng = np.random.default_rng(seed)
    block = rng.standard_normal((n, k))
    block -= block.mean(axis=0)
    block, _ = np.linalg.qr(block)
    ritz = np.ones(k)
    cg_rtol = min(1e-12, 1e-2 * tol)

    residual = np.inf
    for it in range(1, max_iterations + 1):
        solved = np.empty_like(block)
        for j in range(k):
            x, info = cg(
                lap, block[:, j], x0=block[:, j] / max(ritz[j], 1e-300),
                rtol=cg_rtol, atol=0.0, M=precond,
            )
            if info < 0:
                raise ValueError(f"conjugate gradient breakdown (info={info})")
            solved[:, j] = x
        solved -= solved.mean(axis=0)
        basis, _ = np.linalg.qr(solved)
        projected = basis.T @ (lap @ basis)
        ritz, rotation = scipy.linalg.eigh(0.5 * (projected + projected.T))
        block = basis @ rotation

        vec = block[:, 0]
        residual = float(np.abs(lap @ vec - ritz[0] * vec).max())
        if it % 50 == 0:
            logger.debug(f"inverse iteration {it}: lambda2~{ritz[0]:.10g}, residual {residual:.2e}")
        if residual < tol:
            fied = _finish(vec)
            lam = float(fied @ (lap @ fied))
            lambda3 = float(ritz[1]) if k > 1 else None
            return SpectralPair(lam, fied, lambda3, iterations=it, residual=residual)

    raise NoConvergenceError(
        "Fiedler inverse iteration did not converge", iterations=max_iterations, residual=residual
    )
