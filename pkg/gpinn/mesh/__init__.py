"""Triangular meshes: loading, generation, point location and quadrature.

Usage:
    from gpinn.mesh import generate_domain, locate_points, quadrature
    from gpinn.config import GeometryConfig

    mesh = generate_domain(GeometryConfig(kind="house", h=0.02))
    loc = locate_points(mesh, [[0.1, 0.85]])
    domain, boundary = quadrature(mesh, domain_order=3, boundary_order=2)
"""

from gpinn.mesh.generate import generate_domain, structured_square
from gpinn.mesh.io import load_mesh, save_mesh
from gpinn.mesh.locate import (
    Location,
    Locations,
    PointLocator,
    locate_point,
    locate_points,
    locate_points_bruteforce,
)
from gpinn.mesh.mesh import BOUNDARY_TAGS, Mesh
from gpinn.mesh.quadrature import QuadratureSet, boundary_quadrature, domain_quadrature, quadrature

__all__ = [
    "BOUNDARY_TAGS",
    "Location",
    "Locations",
    "Mesh",
    "PointLocator",
    "QuadratureSet",
    "boundary_quadrature",
    "domain_quadrature",
    "generate_domain",
    "load_mesh",
    "locate_point",
    "locate_points",
    "locate_points_bruteforce",
    "quadrature",
    "save_mesh",
    "structured_square",
]
