"""Mesh-connectivity graphs, Laplacian spectra and graph heat diffusion."""

from gpinn.graph.graph import (
    Graph,
    bfs_distance,
    bfs_distances,
    complete_graph,
    connected_components,
    graph_from_mesh,
    grid_graph,
    laplacian,
    path_graph,
    rayleigh,
)
from gpinn.graph.heat import GraphHeatState, HotColdReport, heat_evolve, hot_cold_report
from gpinn.graph.spectral import SpectralPair, dense_spectrum, fiedler, fix_sign

__all__ = [
    "Graph",
    "GraphHeatState",
    "HotColdReport",
    "SpectralPair",
    "bfs_distance",
    "bfs_distances",
    "complete_graph",
    "connected_components",
    "dense_spectrum",
    "fiedler",
    "fix_sign",
    "graph_from_mesh",
    "grid_graph",
    "heat_evolve",
    "hot_cold_report",
    "laplacian",
    "path_graph",
    "rayleigh",
]
