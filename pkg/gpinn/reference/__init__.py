"""Reference solutions and error metrics.

Usage:
    from gpinn.reference import relative_error, solve_poisson_fem

    reference = solve_poisson_fem(mesh, spec)
    report = relative_error(candidate, reference, points)
    print(report.max, report.mean)
"""

from gpinn.reference.fem import (
    elastic_energy,
    recover_stress,
    solve_elasticity_fem,
    solve_poisson_fem,
    stiffness_matrix,
)
from gpinn.reference.manufactured import ManufacturedCase, available_cases, manufactured_poisson
from gpinn.reference.metrics import (
    ErrorReport,
    evaluation_points,
    parse_grid,
    regular_grid,
    relative_error,
    relative_l2,
)
from gpinn.reference.solution import FieldSolution, load_solution, save_solution, solution_frame

__all__ = [
    "ErrorReport",
    "FieldSolution",
    "ManufacturedCase",
    "available_cases",
    "elastic_energy",
    "evaluation_points",
    "load_solution",
    "manufactured_poisson",
    "parse_grid",
    "recover_stress",
    "regular_grid",
    "relative_error",
    "relative_l2",
    "save_solution",
    "solution_frame",
    "solve_elasticity_fem",
    "solve_poisson_fem",
    "stiffness_matrix",
]
