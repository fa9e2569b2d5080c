"""Linear-triangle finite element reference solvers.

Poisson (Delta u = f): find u with u = u_d on dirichlet nodes and

    sum_e int grad u . grad v = -int f v + int_{neumann} v_n v

for all v vanishing on dirichlet nodes. Elasticity uses constant-strain
triangles with traction loads on neumann edges. Dirichlet conditions are
imposed by elimination and the reduced SPD systems are solved with a
sparse direct solver.
"""

from __future__ import annotations

import warnings
from datetime import datetime, timezone

import numpy as np
import scipy.sparse as sp
from loguru import logger
from scipy.sparse.linalg import MatrixRankWarning, spsolve

from gpinn.core.errors import NoConvergenceError, SingularSystemError
from gpinn.mesh.mesh import Mesh
from gpinn.mesh.quadrature import boundary_quadrature, domain_quadrature
from gpinn.problems.elasticity import ElasticityProblemSpec, roller_anchor, stress
from gpinn.problems.heat import HeatProblemSpec
from gpinn.reference.solution import FieldSolution

RESIDUAL_TOL = 1e-10

# Linear shape functions at the symmetric 3-point rule's barycentric points.
_SHAPE_AT_POINTS = np.array(
    [
        [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
        [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
        [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
    ]
)


def _metadata(solver: str, mesh: Mesh) -> dict:
    return {
        "solver": solver,
        "h": mesh.characteristic_length,
        "nodes": mesh.n_nodes,
        "elements": mesh.n_elements,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def _scatter(rows: np.ndarray, cols: np.ndarray, data: np.ndarray, n: int) -> sp.csr_matrix:
    return sp.coo_matrix((data.ravel(), (rows.ravel(), cols.ravel())), shape=(n, n)).tocsr()


def _solve_reduced(
    matrix: sp.csr_matrix, rhs: np.ndarray, fixed: np.ndarray, fixed_values: np.ndarray
) -> np.ndarray:
    """Solve ``matrix u = rhs`` with ``u[fixed] = fixed_values`` by elimination."""
    n = matrix.shape[0]
    free = np.setdiff1d(np.arange(n), fixed)
    u = np.zeros(n)
    u[fixed] = fixed_values
    if len(free) == 0:
        return u
    k_ff = matrix[free][:, free].tocsc()
    b = rhs[free] - matrix[free][:, fixed] @ u[fixed]
    with warnings.catch_warnings():
        warnings.simplefilter("error", MatrixRankWarning)
        try:
            x = spsolve(k_ff, b)
        except MatrixRankWarning as exc:
            raise SingularSystemError(f"reduced stiffness matrix is singular: {exc}") from exc
    if not np.isfinite(x).all():
        raise SingularSystemError("reduced stiffness matrix is singular (non-finite solution)")
    residual = float(np.linalg.norm(k_ff @ x - b))
    scale = max(1.0, float(np.linalg.norm(b)))
    logger.debug(f"Direct solve: {len(free)} unknowns, residual {residual:.2e}")
    if residual > RESIDUAL_TOL * scale:
        raise NoConvergenceError("sparse direct solve missed the residual target", 1, residual)
    u[free] = x
    return u


# ---------------------------------------------------------------------------
# Poisson
# ---------------------------------------------------------------------------


def stiffness_matrix(mesh: Mesh) -> sp.csr_matrix:
    """Scalar P1 stiffness matrix K_ij = int grad phi_i . grad phi_j."""
    g = mesh.shape_gradients
    local = mesh.areas[:, None, None] * np.einsum("eid,ejd->eij", g, g)
    rows = np.repeat(mesh.elements[:, :, None], 3, axis=2)
    cols = np.repeat(mesh.elements[:, None, :], 3, axis=1)
    return _scatter(rows, cols, local, mesh.n_nodes)


def load_vector(mesh: Mesh, f) -> np.ndarray:
    """F_i = int f phi_i with the 3-point rule."""
    quad = domain_quadrature(mesh, order=3)
    fq = np.asarray(f(quad.points), dtype=np.float64).reshape(mesh.n_elements, 3)
    wq = quad.weights.reshape(mesh.n_elements, 3)
    local = np.einsum("eq,eq,qi->ei", wq, fq, _SHAPE_AT_POINTS)
    return np.bincount(mesh.elements.ravel(), weights=local.ravel(), minlength=mesh.n_nodes)


def edge_load(mesh: Mesh, edges: np.ndarray, g) -> np.ndarray:
    """G_i = int g phi_i over boundary edges (2-point Gauss-Legendre)."""
    out = np.zeros(mesh.n_nodes)
    if len(edges) == 0:
        return out
    quad = boundary_quadrature(mesh, 2, edges)
    gq = np.asarray(g(quad.points), dtype=np.float64).reshape(len(edges), 2)
    wq = quad.weights.reshape(len(edges), 2)
    t = 0.5 * (np.polynomial.legendre.leggauss(2)[0] + 1.0)
    phi_b = np.stack([1.0 - t, t], axis=1)
    local = np.einsum("bq,bq,qi->bi", wq, gq, phi_b)
    np.add.at(out, mesh.boundary[edges].ravel(), local.ravel())
    return out


def solve_poisson_fem(mesh: Mesh, spec: HeatProblemSpec) -> FieldSolution:
    """Galerkin P1 solution of Delta u = f with the problem's boundary data.

    Raises:
        SingularSystemError: If the mesh has no dirichlet edge.
    """
    dirichlet_nodes = mesh.tag_nodes("dirichlet")
    if len(dirichlet_nodes) == 0:
        raise SingularSystemError(
            f"mesh {mesh.name} has no dirichlet edge; Poisson problem is singular"
        )
    matrix = stiffness_matrix(mesh)
    rhs = -load_vector(mesh, spec.source) + edge_load(
        mesh, mesh.edges_with_tag("neumann"), spec.neumann
    )
    u = _solve_reduced(matrix, rhs, dirichlet_nodes, spec.dirichlet(mesh.nodes[dirichlet_nodes]))
    logger.info(f"Solved Poisson reference on {mesh.name}: {mesh.n_nodes} nodes")
    return FieldSolution(mesh, u[:, None], ["u"], _metadata("p1-fem", mesh))


# ---------------------------------------------------------------------------
# Elasticity
# ---------------------------------------------------------------------------


def strain_displacement(mesh: Mesh) -> np.ndarray:
    """(E, 3, 6) B matrices mapping element dofs to (eps_xx, eps_yy, 2 eps_xy)."""
    g = mesh.shape_gradients
    b = np.zeros((mesh.n_elements, 3, 6))
    b[:, 0, 0::2] = g[:, :, 0]
    b[:, 1, 1::2] = g[:, :, 1]
    b[:, 2, 0::2] = g[:, :, 1]
    b[:, 2, 1::2] = g[:, :, 0]
    return b


def _element_dofs(mesh: Mesh) -> np.ndarray:
    dofs = np.empty((mesh.n_elements, 6), dtype=np.int64)
    dofs[:, 0::2] = 2 * mesh.elements
    dofs[:, 1::2] = 2 * mesh.elements + 1
    return dofs


def elasticity_stiffness(mesh: Mesh, spec: ElasticityProblemSpec) -> sp.csr_matrix:
    b = strain_displacement(mesh)
    d = spec.voigt_matrix()
    local = mesh.areas[:, None, None] * np.einsum("eki,kl,elj->eij", b, d, b)
    dofs = _element_dofs(mesh)
    rows = np.repeat(dofs[:, :, None], 6, axis=2)
    cols = np.repeat(dofs[:, None, :], 6, axis=1)
    return _scatter(rows, cols, local, 2 * mesh.n_nodes)


def _constraints(mesh: Mesh, spec: ElasticityProblemSpec) -> tuple[np.ndarray, np.ndarray]:
    nodes = mesh.tag_nodes("dirichlet")
    ux, uy = spec.dirichlet_displacement
    if spec.dirichlet_mode == "clamped":
        dofs = np.concatenate([2 * nodes, 2 * nodes + 1])
        values = np.concatenate([np.full(len(nodes), ux), np.full(len(nodes), uy)])
    else:
        anchor = roller_anchor(mesh) if len(nodes) else None
        dofs = 2 * nodes + 1
        values = np.full(len(nodes), uy)
        if anchor is not None:
            dofs = np.append(dofs, 2 * anchor)
            values = np.append(values, ux)
    order = np.argsort(dofs)
    return dofs[order], values[order]


def _check_rigid_modes(mesh: Mesh, fixed: np.ndarray) -> None:
    """The constrained dofs must pin both translations and the rotation."""
    xc, yc = mesh.nodes.mean(axis=0)
    modes = np.zeros((2 * mesh.n_nodes, 3))
    modes[0::2, 0] = 1.0
    modes[1::2, 1] = 1.0
    modes[0::2, 2] = -(mesh.nodes[:, 1] - yc)
    modes[1::2, 2] = mesh.nodes[:, 0] - xc
    rank = np.linalg.matrix_rank(modes[fixed]) if len(fixed) else 0
    if rank < 3:
        raise SingularSystemError(
            f"Dirichlet constraints leave {3 - rank} rigid-body mode(s) unconstrained"
        )


def solve_elasticity_fem(mesh: Mesh, spec: ElasticityProblemSpec) -> FieldSolution:
    """Constant-strain-triangle solution of the plate problem.

    Raises:
        SingularSystemError: If the constraints allow rigid-body motion.
    """
    fixed, values = _constraints(mesh, spec)
    _check_rigid_modes(mesh, fixed)
    matrix = elasticity_stiffness(mesh, spec)
    rhs = np.zeros(2 * mesh.n_nodes)
    edges = mesh.edges_with_tag("neumann")
    for comp in range(2):
        t = spec.traction[comp]
        rhs[comp::2] = edge_load(mesh, edges, lambda p, t=t: np.full(len(p), t))
    u = _solve_reduced(matrix, rhs, fixed, values)
    logger.info(f"Solved elasticity reference on {mesh.name}: {mesh.n_nodes} nodes")
    return FieldSolution(
        mesh, u.reshape(-1, 2), ["u_x", "u_y"], _metadata(f"cst-fem-{spec.model}", mesh)
    )


def recover_stress(
    solution: FieldSolution, spec: ElasticityProblemSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Element stresses (E, 2, 2) and their area-weighted nodal averages (N, 2, 2)."""
    mesh = solution.mesh
    grad = solution.element_gradients()
    eps = 0.5 * (grad + grad.transpose(0, 2, 1))
    sig = stress(spec, eps)
    weights = np.repeat(mesh.areas, 3)
    nodal = np.zeros((mesh.n_nodes, 2, 2))
    np.add.at(nodal, mesh.elements.ravel(), weights[:, None, None] * np.repeat(sig, 3, axis=0))
    total = np.bincount(mesh.elements.ravel(), weights=weights, minlength=mesh.n_nodes)
    nodal /= np.maximum(total, 1e-300)[:, None, None]
    return sig, nodal


def elastic_energy(solution: FieldSolution, spec: ElasticityProblemSpec) -> dict[str, float]:
    """Strain energy, traction work and potential energy of a displacement field."""
    mesh = solution.mesh
    sig, _ = recover_stress(solution, spec)
    grad = solution.element_gradients()
    eps = 0.5 * (grad + grad.transpose(0, 2, 1))
    internal = float((mesh.areas * 0.5 * (sig * eps).sum(axis=(1, 2))).sum())
    edges = mesh.edges_with_tag("neumann")
    u_edges = solution.nodal_values[mesh.boundary[edges]].mean(axis=1)
    external = float((mesh.boundary_lengths[edges] * (u_edges @ np.asarray(spec.traction))).sum())
    return {"internal": internal, "external": external, "potential": internal - external}
