"""Tests for seeds, run directories and end-to-end PINN/GPINN experiments."""

import numpy as np
import pytest

from gpinn.config import load_config
from gpinn.core.errors import GeometryError, ProblemMismatchError
from gpinn.mesh import domain_quadrature, generate_domain
from gpinn.problems import strain, stress
from gpinn.reference import FieldSolution, evaluation_points, recover_stress, solve_poisson_fem
from gpinn.training import (
    HISTORY_COLUMNS,
    BatchSchedule,
    build_mesh,
    build_network,
    build_problem,
    compare_runs,
    derive_seed,
    load_run,
    run_experiment,
)


def _tiny(tmp_path, **overrides):
    config = {
        "name": "tiny",
        "problem": "heat",
        "mode": "pinn",
        "kind": "unit_square",
        "h": 0.25,
        "heat": {"manufactured": "sines"},
        "network": {"hidden": [8]},
        "optimizer": {"adam_iterations": 20, "lbfgs_iterations": 5, "learning_rate": 1e-2},
        "sampling": {
            "n_interior": 64, "n_dirichlet": 16, "n_neumann": 0, "resample_every": 10
        },
        "logging": {"log_every": 10},
        "output_dir": str(tmp_path),
    }
    config.update(overrides)
    return config


def _tiny_house(tmp_path, mode="gpinn", **overrides):
    house = {
        "name": "house",
        "mode": mode,
        "kind": "house",
        "h": 0.1,
        "heat": {},
        "sampling": {
            "n_interior": 64, "n_dirichlet": 16, "n_neumann": 16, "resample_every": 10
        },
    }
    house.update(overrides)
    return _tiny(tmp_path, **house)


# ==========================================================================
# Seeds
# ==========================================================================


class TestSeeds:

    def test_deterministic(self):
        assert derive_seed(0, "network") == derive_seed(0, "network")

    def test_purposes_and_indices_differ(self):
        seeds = {
            derive_seed(0, "network"),
            derive_seed(0, "batch"),
            derive_seed(0, "eigensolver"),
            derive_seed(0, "batch", 1),
            derive_seed(1, "batch"),
        }
        assert len(seeds) == 5

    def test_range(self):
        assert 0 <= derive_seed(123, "batch", 7) < 2**32

    def test_unknown_purpose(self):
        with pytest.raises(KeyError, match="Available"):
            derive_seed(0, "dropout")

    def test_negative(self):
        with pytest.raises(ValueError):
            derive_seed(-1, "network")


# ==========================================================================
# Builders and batch schedule
# ==========================================================================


class TestBuilders:

    def test_network_shape_follows_mode(self, tmp_path):
        pinn = build_network(load_config(_tiny(tmp_path)))
        gpinn = build_network(load_config(_tiny(tmp_path, mode="gpinn")))
        assert pinn.layer_sizes == [2, 8, 1]
        assert gpinn.layer_sizes == [3, 8, 1]
        assert pinn.seed == derive_seed(0, "network")

    def test_explicit_network_seed(self, tmp_path):
        config = load_config(_tiny(tmp_path, network={"hidden": [8], "seed": 11}))
        assert build_network(config).seed == 11

    def test_roller_problem_gets_anchor(self, tmp_path):
        config = load_config(
            _tiny(
                tmp_path,
                problem="elasticity",
                kind="plate",
                h=0.5,
                heat={},
                elasticity={"dirichlet_mode": "roller"},
            )
        )
        problem = build_problem(config, build_mesh(config))
        assert problem.spec.anchor == (0.0, 0.0)


class TestBatchSchedule:

    def _schedule(self, tmp_path):
        config = load_config(_tiny(tmp_path))
        mesh = build_mesh(config)
        return BatchSchedule(config, mesh, build_problem(config, mesh))

    def test_batch_held_for_period(self, tmp_path):
        schedule = self._schedule(tmp_path)
        first = schedule.batch(0)
        assert schedule.batch(9) is first
        assert not np.array_equal(schedule.batch(10).interior, first.interior)

    def test_batches_reproducible(self, tmp_path):
        a = self._schedule(tmp_path).batch(25)
        b = self._schedule(tmp_path).batch(20)
        assert np.array_equal(a.interior, b.interior)

    def test_freeze(self, tmp_path):
        schedule = self._schedule(tmp_path)
        batch = schedule.batch(3)
        schedule.freeze()
        assert schedule.batch(500) is batch

    def test_data_targets_from_exact_solution(self, tmp_path):
        config = load_config(
            _tiny(
                tmp_path,
                sampling={"n_interior": 16, "n_data": 8, "n_dirichlet": 4, "n_neumann": 0},
            )
        )
        mesh = build_mesh(config)
        problem = build_problem(config, mesh)
        batch = BatchSchedule(config, mesh, problem).batch(0)
        assert batch.data_values[:, 0] == pytest.approx(problem.exact(batch.data_points)[:, 0])


# ==========================================================================
# Experiments
# ==========================================================================


class TestRunExperiment:

    def test_pinn_run_writes_artifacts(self, tmp_path):
        result = run_experiment(_tiny(tmp_path))
        artifacts = result.artifacts
        assert artifacts.root == tmp_path / "tiny-heat-pinn"
        for path in (artifacts.config, artifacts.mesh, artifacts.checkpoint, artifacts.history):
            assert path.exists()
        assert not artifacts.embedding.exists()
        assert result.stopped_reason == "budget"
        assert result.field is None

        history = artifacts.read_history()
        assert list(history.columns) == HISTORY_COLUMNS
        assert history["iteration"].tolist() == list(range(25))
        assert history["optimizer"].tolist() == ["adam"] * 20 + ["lbfgs"] * 5

    def test_training_lowers_loss(self, tmp_path):
        result = run_experiment(_tiny(tmp_path))
        assert result.history[-1]["total"] < result.history[0]["total"]

    @pytest.mark.parametrize("make", [_tiny, _tiny_house])
    def test_same_seed_same_network(self, tmp_path, make):
        a = run_experiment(make(tmp_path / "a"))
        b = run_experiment(make(tmp_path / "b"))
        assert a.network.parameter_vector().equal(b.network.parameter_vector())
        assert a.artifacts.checkpoint.read_text() == b.artifacts.checkpoint.read_text()
        assert a.history == b.history
        assert a.artifacts.history.read_bytes() == b.artifacts.history.read_bytes()

    def test_different_seed_different_network(self, tmp_path):
        a = run_experiment(_tiny(tmp_path / "a"), write=False)
        b = run_experiment(_tiny(tmp_path / "b", seed=1), write=False)
        assert not a.network.parameter_vector().equal(b.network.parameter_vector())

    def test_write_false(self, tmp_path):
        result = run_experiment(_tiny(tmp_path), write=False)
        assert not result.artifacts.root.exists()

    def test_gpinn_run_reuses_embedding(self, tmp_path):
        first = run_experiment(_tiny_house(tmp_path / "a"))
        second = run_experiment(_tiny_house(tmp_path / "b"))
        assert first.cache_hit is False
        assert second.cache_hit is True
        assert first.artifacts.embedding.exists()
        assert np.array_equal(first.field.node_values, second.field.node_values)
        assert first.network.layer_sizes[0] == 3

    def test_geometry_failure_is_logged(self, tmp_path, log_messages):
        bad = _tiny_house(tmp_path, geometry={"house": {"source_center": [0.3, 0.5]}})
        with pytest.raises(GeometryError):
            run_experiment(bad)
        assert any("failed" in message for message in log_messages)

    def test_elasticity_run(self, tmp_path):
        config = _tiny(
            tmp_path,
            problem="elasticity",
            kind="plate",
            h=0.5,
            heat={},
            optimizer={"adam_iterations": 3, "lbfgs_iterations": 0},
            sampling={"n_interior": 1, "n_dirichlet": 1, "n_neumann": 1},
        )
        result = run_experiment(config)
        assert len(result.history) == 3
        assert result.evaluate(np.array([[0.5, 0.5]])).shape == (1, 2)


class TestSavedRuns:

    def test_load_run_matches_result(self, tmp_path):
        result = run_experiment(_tiny_house(tmp_path))
        loaded = load_run(result.artifacts.root)
        points = np.array([[0.1, 0.1], [0.5, 0.9], [0.9, 0.2]])
        assert loaded(points) == pytest.approx(result.evaluate(points), abs=1e-14)
        assert loaded.components == ["u"]
        assert loaded.config == result.config

    def test_load_run_missing_files(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="config.yaml"):
            load_run(tmp_path)
        result = run_experiment(_tiny_house(tmp_path))
        result.artifacts.embedding.unlink()
        with pytest.raises(FileNotFoundError, match="embedding"):
            load_run(result.artifacts.root)

    def test_compare_identical_runs(self, tmp_path):
        result = run_experiment(_tiny_house(tmp_path))
        run = load_run(result.artifacts.root)
        reference = solve_poisson_fem(run.mesh, result.problem.spec)
        points, descriptor = evaluation_points("grid:16x16", run.mesh)
        report = compare_runs(run, run, reference, points, descriptor)
        assert report.labels == ("a", "b")
        assert np.all(report.difference == 0.0)
        assert list(report.frame().columns) == ["x", "y", "re_a", "re_b", "difference"]

    def test_compare_pinn_and_gpinn(self, tmp_path):
        pinn = run_experiment(_tiny_house(tmp_path, mode="pinn"))
        gpinn = run_experiment(_tiny_house(tmp_path, mode="gpinn"))
        reference = solve_poisson_fem(pinn.mesh, pinn.problem.spec)
        points, _ = evaluation_points("grid:16x16", pinn.mesh)
        report = compare_runs(pinn, gpinn, reference, points)
        assert report.labels == ("pinn", "gpinn")
        assert set(report.summary()) == {"pinn", "gpinn"}
        assert report.difference == pytest.approx(report.a.re - report.b.re)

    def test_compare_rejects_component_mismatch(self, tmp_path):
        result = run_experiment(_tiny(tmp_path))
        vector = FieldSolution(
            result.mesh, np.ones((result.mesh.n_nodes, 2)), ["u_x", "u_y"]
        )
        with pytest.raises(ProblemMismatchError):
            compare_runs(result, result, vector, result.mesh.nodes)

    def test_compare_rejects_problem_mismatch(self, tmp_path):
        heat = run_experiment(_tiny(tmp_path), write=False)
        plate = run_experiment(
            _tiny(
                tmp_path,
                problem="elasticity",
                kind="plate",
                h=0.5,
                heat={},
                optimizer={"adam_iterations": 1, "lbfgs_iterations": 0},
            ),
            write=False,
        )
        reference = FieldSolution(heat.mesh, np.ones(heat.mesh.n_nodes))
        with pytest.raises(ProblemMismatchError, match="cannot compare"):
            compare_runs(heat, plate, reference, heat.mesh.nodes)


# ==========================================================================
# Reproductions (slow)
# ==========================================================================


def _distance_to_walls(points: np.ndarray, house) -> np.ndarray:
    """Euclidean distance from each point to the nearest wall slab."""
    best = np.full(len(points), np.inf)
    for x0, x1, y0, y1 in house.wall_boxes():
        dx = np.maximum.reduce([x0 - points[:, 0], np.zeros(len(points)), points[:, 0] - x1])
        dy = np.maximum.reduce([y0 - points[:, 1], np.zeros(len(points)), points[:, 1] - y1])
        best = np.minimum(best, np.hypot(dx, dy))
    return best


@pytest.mark.slow
class TestReproductions:

    def test_manufactured_pinn_accuracy(self, tmp_path):
        config = _tiny(
            tmp_path,
            h=1.0 / 32,
            network={"hidden": [32, 32]},
            optimizer={"adam_iterations": 3000, "lbfgs_iterations": 500, "learning_rate": 1e-3},
            sampling={"n_interior": 1024, "n_dirichlet": 256, "n_neumann": 0,
                      "resample_every": 500},
        )
        result = run_experiment(config)
        points, _ = evaluation_points("grid:64x64", result.mesh)
        exact = result.problem.exact
        u = result.evaluate(points)
        error = np.linalg.norm(u - exact(points)) / np.linalg.norm(exact(points))
        assert error < 1e-2

    def test_house_gpinn_beats_pinn(self, tmp_path):
        h = 0.02
        settings = dict(
            h=h,
            network={"hidden": [32, 32, 32]},
            optimizer={"adam_iterations": 5000, "lbfgs_iterations": 500, "learning_rate": 1e-3},
            sampling={"n_interior": 2048, "n_dirichlet": 256, "n_neumann": 512,
                      "resample_every": 500},
        )
        pinn = run_experiment(_tiny_house(tmp_path, mode="pinn", **settings))
        gpinn = run_experiment(_tiny_house(tmp_path, mode="gpinn", **settings))

        geometry = pinn.config.geometry
        fine = generate_domain(geometry.model_copy(update={"h": pinn.config.reference.h}))
        reference = pinn.problem.reference(fine)
        points, descriptor = evaluation_points("grid:128x128", fine)
        report = compare_runs(pinn, gpinn, reference, points, descriptor)
        assert report.b.mean < report.a.mean
        assert report.b.max < report.a.max

        worst = points[report.a.re >= np.quantile(report.a.re, 0.9)]
        near_wall = _distance_to_walls(worst, geometry.house) <= 2 * h
        assert near_wall.mean() >= 0.5

    def test_plate_gpinn_reproduces_uniform_stress(self, tmp_path):
        config = _tiny(
            tmp_path,
            problem="elasticity",
            mode="gpinn",
            kind="plate",
            h=0.05,
            heat={},
            elasticity={"dirichlet_mode": "roller", "traction": [0.0, 1.0]},
            network={"hidden": [32, 32]},
            optimizer={"adam_iterations": 3000, "lbfgs_iterations": 500, "learning_rate": 1e-3},
            sampling={"n_interior": 1, "n_dirichlet": 128, "n_neumann": 0,
                      "resample_every": 500},
        )
        result = run_experiment(config)
        spec = result.problem.spec
        elements, _ = recover_stress(result.problem.reference(result.mesh), spec)
        assert elements[:, 1, 1] == pytest.approx(1.0, abs=1e-8)

        points = domain_quadrature(result.mesh).points
        sigma = stress(spec, strain(result.network, result.field, points)).detach().numpy()
        misfit = np.linalg.norm(sigma[:, 1, 1] - 1.0) / np.sqrt(len(points))
        assert misfit < 0.05

    def test_crack_gpinn_beats_pinn(self, tmp_path):
        settings = dict(
            problem="elasticity",
            kind="crack_plate",
            h=0.05,
            heat={},
            network={"hidden": [32, 32, 32]},
            optimizer={"adam_iterations": 5000, "lbfgs_iterations": 500, "learning_rate": 1e-3},
            sampling={"n_interior": 1, "n_dirichlet": 128, "n_neumann": 0,
                      "resample_every": 500},
        )
        pinn = run_experiment(_tiny(tmp_path, name="crack", mode="pinn", **settings))
        gpinn = run_experiment(_tiny(tmp_path, name="crack", mode="gpinn", **settings))

        mesh = gpinn.mesh
        twins = mesh.crack_twins()
        z = gpinn.field.node_values
        assert np.abs(z[twins[:, 0]] - z[twins[:, 1]]).min() > 0.0

        geometry = pinn.config.geometry
        fine = generate_domain(geometry.model_copy(update={"h": 1.0 / 128}))
        reference = pinn.problem.reference(fine)
        points, descriptor = evaluation_points("grid:128x128", fine)
        report = compare_runs(pinn, gpinn, reference, points, descriptor)
        for component in ("u_x", "u_y"):
            assert report.b.values[component].mean() < report.a.values[component].mean()
