"""Tests for the gpinn command-line interface."""

import pandas as pd
import pytest

from gpinn.cli import build_parser, dispatch, main
from gpinn.config import HouseGeometry, load_config
from gpinn.mesh import load_mesh, save_mesh, structured_square
from gpinn.problems.heat import HeatProblemSpec
from gpinn.reference import load_solution, save_solution, solve_poisson_fem


def _write_config(tmp_path, mode="pinn"):
    config = load_config({
        "name": "cli",
        "mode": mode,
        "kind": "unit_square",
        "h": 0.25,
        "heat": {"manufactured": "sines"},
        "network": {"hidden": [8]},
        "optimizer": {"adam_iterations": 5, "lbfgs_iterations": 2},
        "sampling": {"n_interior": 32, "n_dirichlet": 8, "n_neumann": 0},
        "reference": {"h": 0.125, "eval_grid": 16},
        "output_dir": str(tmp_path / "runs"),
    })
    path = tmp_path / f"{mode}.yaml"
    path.write_text(config.to_yaml())
    return path


def _train(tmp_path, mode="pinn"):
    result = dispatch(["train", "--config", str(_write_config(tmp_path, mode))])
    assert result.ok, result.summary
    return result.paths[0]


class TestParser:

    def test_help_exits_zero(self):
        assert dispatch(["--help"]).exit_code == 0
        assert dispatch(["train", "--help"]).exit_code == 0

    def test_no_command(self):
        result = dispatch([])
        assert result.exit_code == 1
        assert "mesh-gen" in result.summary

    def test_unknown_flag(self):
        result = dispatch(["mesh-gen", "--out", "m.json", "--colour", "red"])
        assert result.exit_code == 1
        assert "usage:" in result.summary

    def test_missing_required(self):
        result = dispatch(["embed"])
        assert result.exit_code == 1
        assert "--mesh" in result.summary

    def test_bad_choice(self):
        assert dispatch(["mesh-gen", "--kind", "torus", "--out", "m.json"]).exit_code == 1

    def test_subcommands(self):
        parser = build_parser()
        args = parser.parse_args(["evaluate", "--run", "a", "b"])
        assert args.run == ["a", "b"]
        assert args.points is None


class TestInit:

    def test_init_writes_default(self, tmp_path):
        out = tmp_path / "gpinn.yaml"
        result = dispatch(["init", "--output", str(out)])
        assert result.ok
        assert load_config(out).geometry.kind == "house"

    def test_init_refuses_overwrite(self, tmp_path):
        out = tmp_path / "gpinn.yaml"
        out.write_text("name: mine\n")
        result = dispatch(["init", "--output", str(out)])
        assert result.exit_code == 1
        assert "--force" in result.summary
        assert out.read_text() == "name: mine\n"
        assert dispatch(["init", "--output", str(out), "--force"]).ok


class TestMeshAndEmbed:

    def test_mesh_gen(self, tmp_path):
        out = tmp_path / "square.json"
        result = dispatch(["mesh-gen", "--kind", "unit_square", "--h", "0.25", "--out", str(out)])
        assert result.ok
        mesh = load_mesh(out)
        assert mesh.n_nodes == 25
        assert result.paths == [out]

    def test_mesh_gen_from_config(self, tmp_path):
        out = tmp_path / "m.json"
        config = _write_config(tmp_path)
        assert dispatch(["mesh-gen", "--config", str(config), "--out", str(out)]).ok
        assert load_mesh(out).n_nodes == 25

    def test_mesh_gen_geometry_error(self, tmp_path):
        result = dispatch(["mesh-gen", "--kind", "house", "--h", "-1", "--out", "m.json"])
        assert result.exit_code == 1
        assert result.summary.startswith("error:")

    def test_mesh_gen_house_overrides(self, tmp_path):
        out = tmp_path / "house.json"
        result = dispatch([
            "mesh-gen", "--kind", "house", "--h", "0.1", "--wall-thickness", "0.03",
            "--source-center", "0.12", "0.8", "--out", str(out),
        ])
        assert result.ok, result.summary
        house = HouseGeometry(wall_thickness=0.03)
        walls = sum((x1 - x0) * (y1 - y0) for x0, x1, y0, y1 in house.wall_boxes())
        assert load_mesh(out).area == pytest.approx(1.0 - walls, rel=1e-12)

    def test_mesh_gen_crack_tip_override(self, tmp_path):
        out = tmp_path / "crack.json"
        result = dispatch([
            "mesh-gen", "--kind", "crack_plate", "--h", "0.1", "--crack-tip", "0.3", "0.5",
            "--out", str(out),
        ])
        assert result.ok, result.summary
        mesh = load_mesh(out)
        for tag in ("crack_top", "crack_bottom"):
            edges = mesh.edges_with_tag(tag)
            assert mesh.boundary_lengths[edges].sum() == pytest.approx(0.3)

    def test_mesh_gen_wall_override(self, tmp_path):
        out = tmp_path / "house.json"
        args = ["mesh-gen", "--kind", "house", "--h", "0.1", "--out", str(out)]
        assert dispatch([*args, "--left-wall", "0.3", "0.0", "0.6"]).ok
        mesh = load_mesh(out)
        wall = HouseGeometry(left_wall={"x": 0.3, "y_start": 0.0, "y_end": 0.6}).wall_boxes()[0]
        x0, x1, y0, y1 = wall
        c = mesh.centroids
        assert not ((c[:, 0] > x0) & (c[:, 0] < x1) & (c[:, 1] > y0) & (c[:, 1] < y1)).any()

    def test_mesh_gen_bad_override(self, tmp_path):
        result = dispatch([
            "mesh-gen", "--kind", "house", "--source-radius", "0.5", "--out", "m.json",
        ])
        assert result.exit_code == 1
        assert "Source disc" in result.summary

    def test_embed_no_convergence_exits_two(self, tmp_path):
        mesh_path = tmp_path / "house.json"
        assert dispatch(["mesh-gen", "--kind", "house", "--h", "0.1", "--out", str(mesh_path)]).ok
        result = dispatch([
            "embed", "--mesh", str(mesh_path), "--tol", "1e-300", "--max-iterations", "2",
            "--no-cache",
        ])
        assert result.exit_code == 2
        assert result.summary.startswith("numerical failure:")

    def test_embed_missing_mesh(self, tmp_path):
        result = dispatch(["embed", "--mesh", str(tmp_path / "missing.json")])
        assert result.exit_code == 1
        assert "not found" in result.summary

    def test_embed_writes_and_caches(self, tmp_path):
        mesh_path = tmp_path / "house.json"
        assert dispatch(["mesh-gen", "--kind", "house", "--h", "0.1", "--out", str(mesh_path)]).ok
        out = tmp_path / "embedding.json"
        first = dispatch(["embed", "--mesh", str(mesh_path), "--out", str(out)])
        assert first.ok
        assert "(eigensolve)" in first.summary
        assert out.exists()
        second = dispatch(["embed", "--mesh", str(mesh_path)])
        assert "(cache)" in second.summary
        assert first.summary.split()[2] == second.summary.split()[2]


class TestTrainEvaluateExport:

    def test_train(self, tmp_path):
        run_dir = _train(tmp_path)
        assert run_dir.name == "cli-heat-pinn"
        assert (run_dir / "checkpoint.json").exists()
        assert len(pd.read_csv(run_dir / "history.csv")) == 7

    def test_train_missing_config(self, tmp_path):
        result = dispatch(["train", "--config", str(tmp_path / "nope.yaml")])
        assert result.exit_code == 1
        assert "not found" in result.summary

    def test_evaluate_single_run(self, tmp_path):
        run_dir = _train(tmp_path)
        result = dispatch(["evaluate", "--run", str(run_dir)])
        assert result.ok, result.summary
        assert result.summary.startswith("RE on grid:16x16")
        frame = pd.read_csv(result.paths[0])
        assert list(frame.columns) == ["x", "y", "re_u"]
        assert len(frame) == 256
        assert (run_dir / "fields" / "reference.json").exists()

    def test_evaluate_two_runs(self, tmp_path):
        pinn = _train(tmp_path, "pinn")
        gpinn = _train(tmp_path, "gpinn")
        out = tmp_path / "cmp.csv"
        result = dispatch(
            ["evaluate", "--run", str(pinn), str(gpinn), "--points", "grid:8x8", "--out", str(out)]
        )
        assert result.ok, result.summary
        frame = pd.read_csv(out)
        assert list(frame.columns) == ["x", "y", "re_pinn", "re_gpinn", "difference"]
        assert len(frame) == 64

    def test_evaluate_too_many_runs(self, tmp_path):
        result = dispatch(["evaluate", "--run", "a", "b", "c"])
        assert result.exit_code == 1

    def test_export_run(self, tmp_path):
        run_dir = _train(tmp_path, "gpinn")
        result = dispatch(["export", "--run", str(run_dir), "--grid", "128x128"])
        assert result.ok
        frame = pd.read_csv(result.paths[0])
        assert len(frame) == 16384
        assert list(frame.columns) == ["x", "y", "u", "z"]
        assert frame["z"].between(-1.0, 1.0).all()

    def test_export_needs_one_source(self, tmp_path):
        assert dispatch(["export"]).exit_code == 1
        assert dispatch(["export", "--run", "a", "--solution", "b"]).exit_code == 1

    def test_export_bad_grid(self, tmp_path):
        run_dir = _train(tmp_path)
        result = dispatch(["export", "--run", str(run_dir), "--grid", "1x1"])
        assert result.exit_code == 1


    def test_export_solution_round_trip(self, tmp_path):
        mesh = structured_square(8)
        mesh_path = save_mesh(mesh, tmp_path / "square.json")
        solution = solve_poisson_fem(mesh, HeatProblemSpec(manufactured="sines"))
        first = save_solution(solution, tmp_path / "u.csv")
        second = save_solution(load_solution(first, mesh), tmp_path / "u2.csv")
        assert second.read_bytes() == first.read_bytes()

        grids = []
        for source in (first, second):
            out = tmp_path / f"{source.stem}-grid.csv"
            result = dispatch([
                "export", "--solution", str(source), "--mesh", str(mesh_path),
                "--grid", "9x9", "--out", str(out),
            ])
            assert result.ok, result.summary
            grids.append(out.read_bytes())
        assert grids[0] == grids[1]

        frame = pd.read_csv(tmp_path / "u-grid.csv", float_precision="round_trip")
        assert list(frame.columns) == ["x", "y", "u"]
        frame.to_csv(tmp_path / "again.csv", index=False)
        assert (tmp_path / "again.csv").read_bytes() == grids[0]


class TestMain:

    def test_main_exit_code(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["init", "--output", str(tmp_path / "g.yaml")])
        assert excinfo.value.code == 0
        assert "Configuration written" in capsys.readouterr().out

    def test_main_failure_goes_to_stderr(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["embed", "--mesh", str(tmp_path / "missing.json")])
        assert excinfo.value.code == 1
        assert "not found" in capsys.readouterr().err
