"""Tests for the finite-element reference solvers, solution files and error metrics."""

import numpy as np
import pandas as pd
import pytest

from gpinn.config import GeometryConfig
from gpinn.core.errors import SingularSystemError
from gpinn.mesh import Mesh, domain_quadrature, generate_domain, locate_points, structured_square
from gpinn.problems import ElasticityProblemSpec, HeatProblemSpec
from gpinn.reference import (
    FieldSolution,
    available_cases,
    elastic_energy,
    evaluation_points,
    load_solution,
    manufactured_poisson,
    parse_grid,
    recover_stress,
    regular_grid,
    relative_error,
    relative_l2,
    save_solution,
    solve_elasticity_fem,
    solve_poisson_fem,
)


def _retag(mesh: Mesh, old: str, new: str) -> Mesh:
    tags = tuple(new if t == old else t for t in mesh.boundary_tags)
    return Mesh(mesh.nodes, mesh.elements, mesh.boundary, tags, mesh.name)


# ==========================================================================
# Manufactured solutions
# ==========================================================================


class TestManufactured:

    def test_cases(self):
        assert available_cases() == ["bubble", "sines"]
        with pytest.raises(KeyError, match="Available"):
            manufactured_poisson("cosines")

    def test_sines_values(self):
        case = manufactured_poisson("sines")
        centre = np.array([[0.5, 0.5]])
        assert case.exact(centre)[0] == pytest.approx(1.0)
        assert case.source(centre)[0] == pytest.approx(-2 * np.pi**2)
        assert case.gradient(centre)[0] == pytest.approx([0.0, 0.0], abs=1e-15)

    def test_bubble_source_matches_laplacian(self):
        case = manufactured_poisson("bubble")
        p = np.array([[0.3, 0.7]])
        h = 1e-4
        shifts = np.array([[h, 0.0], [-h, 0.0], [0.0, h], [0.0, -h]])
        fd = (case.exact(p + shifts).sum() - 4 * case.exact(p)[0]) / h**2
        assert case.source(p)[0] == pytest.approx(fd, rel=1e-6)


# ==========================================================================
# Poisson
# ==========================================================================


class TestPoissonFem:

    def test_no_source_gives_zero(self, house_mesh):
        solution = solve_poisson_fem(house_mesh, HeatProblemSpec(source_strength=0.0))
        assert np.abs(solution.nodal_values).max() < 1e-14
        assert solution.components == ["u"]
        assert solution.metadata["solver"] == "p1-fem"

    def test_constant_window_value_fills_domain(self, house_mesh):
        spec = HeatProblemSpec(source_strength=0.0, dirichlet_value=0.3)
        solution = solve_poisson_fem(house_mesh, spec)
        assert solution.nodal_values == pytest.approx(0.3, abs=1e-10)

    def test_source_room_is_lowest(self, house_mesh):
        # Delta u = f with f >= 0 pulls u below the window value
        solution = solve_poisson_fem(house_mesh, HeatProblemSpec(source_strength=1.0))
        u = solution.nodal_values[:, 0]
        window = house_mesh.tag_nodes("dirichlet")
        assert u[window] == pytest.approx(0.0, abs=1e-14)
        assert u.mean() < 0.0
        coldest = house_mesh.nodes[np.argmin(u)]
        assert coldest[0] < 0.33 and coldest[1] > 0.6

    def test_manufactured_convergence(self):
        spec = HeatProblemSpec(manufactured="sines")
        exact = manufactured_poisson("sines").exact
        errors = []
        for n in (8, 16, 32):
            mesh = structured_square(n)
            solution = solve_poisson_fem(mesh, spec)
            points = domain_quadrature(mesh).points
            errors.append(relative_l2(solution, exact, points))
        orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
        assert (orders >= 1.9).all()
        assert errors[-1] < 1e-2

    def test_no_dirichlet_edge_is_singular(self, square4):
        mesh = _retag(square4, "dirichlet", "neumann")
        with pytest.raises(SingularSystemError, match="no dirichlet"):
            solve_poisson_fem(mesh, HeatProblemSpec())


# ==========================================================================
# Elasticity
# ==========================================================================


class TestElasticityFem:

    ROLLER = ElasticityProblemSpec(traction=(0.0, 1.0), dirichlet_mode="roller")

    def test_patch_uniform_tension(self, plate_mesh):
        solution = solve_elasticity_fem(plate_mesh, self.ROLLER)
        element_stress, nodal_stress = recover_stress(solution, self.ROLLER)
        assert element_stress[:, 1, 1] == pytest.approx(1.0, abs=1e-10)
        assert element_stress[:, 0, 0] == pytest.approx(0.0, abs=1e-10)
        assert element_stress[:, 0, 1] == pytest.approx(0.0, abs=1e-10)
        assert nodal_stress[:, 1, 1] == pytest.approx(1.0, abs=1e-10)

    def test_patch_displacement(self, plate_mesh):
        spec = self.ROLLER
        solution = solve_elasticity_fem(plate_mesh, spec)
        x, y = plate_mesh.nodes[:, 0], plate_mesh.nodes[:, 1]
        nu, e = spec.poisson_ratio, spec.youngs_modulus
        assert solution.nodal_values[:, 0] == pytest.approx(-nu * x / e, abs=1e-10)
        assert solution.nodal_values[:, 1] == pytest.approx(y / e, abs=1e-10)
        assert solution.components == ["u_x", "u_y"]
        assert solution.metadata["solver"] == "cst-fem-plane_stress"

    def test_patch_energy(self, plate_mesh):
        solution = solve_elasticity_fem(plate_mesh, self.ROLLER)
        energy = elastic_energy(solution, self.ROLLER)
        assert energy["internal"] == pytest.approx(0.5, abs=1e-10)
        assert energy["external"] == pytest.approx(1.0, abs=1e-10)
        assert energy["potential"] == pytest.approx(-0.5, abs=1e-10)

    def test_zero_load_gives_zero(self, plate_mesh):
        solution = solve_elasticity_fem(plate_mesh, ElasticityProblemSpec(traction=(0.0, 0.0)))
        assert np.abs(solution.nodal_values).max() < 1e-14

    def test_rigid_motion_is_singular(self, plate_mesh):
        mesh = _retag(plate_mesh, "dirichlet", "free")
        with pytest.raises(SingularSystemError, match="rigid-body"):
            solve_elasticity_fem(mesh, ElasticityProblemSpec())

    def test_crack_opens_under_tension(self, crack_mesh):
        solution = solve_elasticity_fem(crack_mesh, ElasticityProblemSpec())
        u_y = solution.nodal_values[:, 1]
        top = u_y[crack_mesh.tag_nodes("crack_top")].mean()
        bottom = u_y[crack_mesh.tag_nodes("crack_bottom")].mean()
        assert top > bottom

    def test_stress_concentrates_at_tip(self, crack_mesh):
        spec = ElasticityProblemSpec()
        element_stress, _ = recover_stress(solve_elasticity_fem(crack_mesh, spec), spec)
        centroids = crack_mesh.nodes[crack_mesh.elements].mean(axis=1)
        near_tip = np.linalg.norm(centroids - np.array([0.5, 0.5]), axis=1) < 0.05
        assert near_tip.any()
        assert element_stress[near_tip, 1, 1].max() > 3.0

    def test_displacement_scales_with_traction(self, crack_mesh):
        one = solve_elasticity_fem(crack_mesh, ElasticityProblemSpec(traction=(0.0, 1.0)))
        two = solve_elasticity_fem(crack_mesh, ElasticityProblemSpec(traction=(0.0, 2.0)))
        assert np.allclose(two.nodal_values, 2.0 * one.nodal_values, rtol=1e-10, atol=1e-14)

    def test_strain_energy_is_half_the_work(self, crack_mesh):
        spec = ElasticityProblemSpec()
        energy = elastic_energy(solve_elasticity_fem(crack_mesh, spec), spec)
        assert energy["external"] > 0.0
        assert energy["internal"] == pytest.approx(0.5 * energy["external"], rel=0.02)
        assert energy["potential"] == pytest.approx(-0.5 * energy["external"], rel=0.02)

    def test_potential_decreases_under_refinement(self):
        # meshes are nested, so the Galerkin potential can only go down
        spec = ElasticityProblemSpec()
        potentials = []
        for h in (0.25, 0.125, 0.0625):
            mesh = generate_domain(GeometryConfig(kind="plate", h=h))
            potentials.append(elastic_energy(solve_elasticity_fem(mesh, spec), spec)["potential"])
        assert potentials[0] > potentials[1] > potentials[2]


# ==========================================================================
# Relative error
# ==========================================================================


def _bump(p):
    return np.sin(np.pi * p[:, 0]) * np.sin(np.pi * p[:, 1])


class TestRelativeError:

    POINTS = regular_grid((0, 1, 0, 1), 11, 11)

    def test_identical_fields(self):
        report = relative_error(_bump, _bump, self.POINTS)
        assert report.max == 0.0
        assert list(report.values) == ["u"]

    def test_constant_offset(self):
        report = relative_error(lambda p: _bump(p) + 0.1, _bump, self.POINTS)
        assert report.re == pytest.approx(0.1)
        assert report.mean == pytest.approx(0.1)
        assert report.l2 == pytest.approx(0.1)

    def test_zero_candidate(self):
        report = relative_error(lambda p: np.zeros(len(p)), _bump, self.POINTS)
        assert report.max == pytest.approx(1.0)
        assert report.points[np.argmax(report.re)] == pytest.approx([0.5, 0.5])

    def test_scale_invariance(self):
        candidate = lambda p: _bump(p) + 0.05 * p[:, 0]  # noqa: E731
        a = relative_error(candidate, _bump, self.POINTS)
        b = relative_error(lambda p: 7.0 * candidate(p), lambda p: 7.0 * _bump(p), self.POINTS)
        assert b.re == pytest.approx(a.re, rel=1e-12)

    def test_zero_reference_rejected(self):
        with pytest.raises(ValueError, match="zero"):
            relative_error(_bump, lambda p: np.zeros(len(p)), self.POINTS)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError, match="shape"):
            relative_error(lambda p: np.zeros((len(p), 2)), _bump, self.POINTS)

    def test_vector_components(self):
        reference = lambda p: np.stack([_bump(p), np.zeros(len(p))], axis=1)  # noqa: E731
        candidate = lambda p: reference(p) + np.array([0.0, 0.2])  # noqa: E731
        report = relative_error(
            candidate, reference, self.POINTS, components=["u_x", "u_y"]
        )
        assert set(report.values) == {"u_x", "u_y", "norm"}
        assert report.primary == "norm"
        assert report.values["u_x"].max() == 0.0
        # vanishing component falls back to the vector scale
        assert report.values["u_y"] == pytest.approx(0.2)
        assert report.values["norm"] == pytest.approx(0.2)
        assert list(report.frame().columns) == ["x", "y", "re_u_x", "re_u_y", "re_norm"]

    def test_summary(self):
        report = relative_error(lambda p: _bump(p) + 0.1, _bump, self.POINTS, "grid:11x11")
        assert report.descriptor == "grid:11x11"
        assert report.summary()["u"]["max"] == pytest.approx(0.1)


# ==========================================================================
# Solutions and evaluation points
# ==========================================================================


class TestFieldSolution:

    def test_linear_field_interpolates_exactly(self, house_mesh):
        values = 2.0 * house_mesh.nodes[:, 0] + 3.0 * house_mesh.nodes[:, 1]
        solution = FieldSolution(house_mesh, values)
        rng = np.random.default_rng(11)
        points = rng.uniform(0.0, 1.0, size=(3000, 2))
        points = points[~locate_points(house_mesh, points).extrapolated][:1000]
        assert len(points) == 1000
        points = np.concatenate([points, domain_quadrature(house_mesh, 3).points])
        expected = 2.0 * points[:, 0] + 3.0 * points[:, 1]
        assert solution(points)[:, 0] == pytest.approx(expected, abs=1e-12)

    def test_rejects_wrong_shape(self, square4):
        with pytest.raises(ValueError):
            FieldSolution(square4, np.zeros((square4.n_nodes, 2)), ["u"])

    def test_rejects_non_finite(self, square4):
        values = np.zeros(square4.n_nodes)
        values[3] = np.nan
        with pytest.raises(ValueError, match="non-finite"):
            FieldSolution(square4, values)

    def test_json_file(self, tmp_path, plate_mesh):
        solution = solve_elasticity_fem(plate_mesh, ElasticityProblemSpec())
        loaded = load_solution(save_solution(solution, tmp_path / "plate.json"))
        assert loaded.components == ["u_x", "u_y"]
        assert np.array_equal(loaded.nodal_values, solution.nodal_values)
        assert loaded.metadata["solver"] == "cst-fem-plane_stress"
        assert loaded.mesh.n_elements == plate_mesh.n_elements

    def test_csv_file(self, tmp_path, square4):
        solution = solve_poisson_fem(square4, HeatProblemSpec(manufactured="bubble"))
        path = save_solution(solution, tmp_path / "u.csv")
        assert list(pd.read_csv(path).columns) == ["node", "x", "y", "u"]
        with pytest.raises(ValueError, match="mesh"):
            load_solution(path)
        loaded = load_solution(path, square4)
        assert loaded.nodal_values == pytest.approx(solution.nodal_values, abs=1e-15)

    @pytest.mark.parametrize("suffix", [".json", ".csv"])
    def test_rewrite_is_byte_identical(self, tmp_path, crack_mesh, suffix):
        solution = solve_elasticity_fem(crack_mesh, ElasticityProblemSpec())
        first = save_solution(solution, tmp_path / f"a{suffix}")
        mesh = crack_mesh if suffix == ".csv" else None
        second = save_solution(load_solution(first, mesh), tmp_path / f"b{suffix}")
        assert second.read_bytes() == first.read_bytes()

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_solution(tmp_path / "nope.json")


class TestEvaluationPoints:

    def test_parse_grid(self):
        assert parse_grid("64x32") == (64, 32)
        for bad in ("1x5", "64", "axb", "64x"):
            with pytest.raises(ValueError):
                parse_grid(bad)

    def test_regular_grid_ordering(self):
        grid = regular_grid((0, 1, 0, 2), 3, 2)
        assert grid.tolist() == [
            [0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [0.0, 2.0], [0.5, 2.0], [1.0, 2.0]
        ]

    def test_grid_drops_points_outside_mesh(self, house_mesh):
        points, descriptor = evaluation_points("grid:40x40", house_mesh)
        assert descriptor == "grid:40x40"
        assert 0 < len(points) < 1600
        in_left_wall = (np.abs(points[:, 0] - 0.33) < 0.015) & (points[:, 1] < 0.65)
        assert not in_left_wall.any()

    def test_grid_keeps_full_square(self, square4):
        points, _ = evaluation_points("grid:5x5", square4)
        assert len(points) == 25

    def test_file_points(self, tmp_path, square4):
        path = tmp_path / "pts.csv"
        pd.DataFrame({"x": [0.1, 0.2], "y": [0.3, 0.4], "label": ["a", "b"]}).to_csv(
            path, index=False
        )
        points, descriptor = evaluation_points(f"file:{path}", square4)
        assert points.tolist() == [[0.1, 0.3], [0.2, 0.4]]
        assert descriptor == f"file:{path}"

    def test_file_errors(self, tmp_path, square4):
        with pytest.raises(FileNotFoundError):
            evaluation_points(f"file:{tmp_path / 'missing.csv'}", square4)
        path = tmp_path / "bad.csv"
        pd.DataFrame({"x": [0.1]}).to_csv(path, index=False)
        with pytest.raises(ValueError, match="lacks columns"):
            evaluation_points(f"file:{path}", square4)
        with pytest.raises(ValueError):
            evaluation_points("random:100", square4)
