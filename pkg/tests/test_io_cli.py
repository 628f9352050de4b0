import json
import os
import subprocess
import sys

import numpy as np
import pytest

from hybridmatch import cli
from hybridmatch import io as hio
from hybridmatch.curves import PolygonalCurve
from hybridmatch.datasets import icosphere
from hybridmatch.surfaces import TriangleMesh


def small_config(tmp_path, metric_kind="h1_rot_scale_invariant", iters=3):
    """A fast registration config over tiny synthetic shapes."""
    t = np.linspace(0, 2 * np.pi, 14, endpoint=False)
    template = [PolygonalCurve(np.stack([np.cos(t), np.sin(t)], axis=1))]
    target = [PolygonalCurve(np.stack([1.15 * np.cos(t) + 0.2,
                                       1.1 * np.sin(t)], axis=1))]
    hio.write_curves(tmp_path / "template.curves", template)
    hio.write_curves(tmp_path / "target.curves", target)
    config = {
        "template": "template.curves",
        "target": "target.curves",
        "kernel": {"scale": 0.8, "smoothness": 3},
        "metric": {"kind": metric_kind, "weight": 10.0},
        "varifold": {"width": 0.7, "normal_weight": 1.0},
        "timesteps": 4,
        "optimizer": {"max_iterations": iters},
        "grid": {"enabled": True, "resolution": 4, "samples_per_cell": 3,
                 "margin": 0.1},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    return path


class TestCurveFiles:
    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        curves = [PolygonalCurve(rng.normal(size=(9, 2)) * np.pi, closed=False),
                  PolygonalCurve(rng.normal(size=(5, 2)) + 10.0)]
        path = tmp_path / "shapes.curves"
        hio.write_curves(path, curves)
        back = hio.read_curves(path)
        assert len(back) == 2
        for orig, loaded in zip(curves, back):
            assert loaded.closed == orig.closed
            assert np.array_equal(loaded.vertices, orig.vertices)

    def test_read_without_validation(self, tmp_path):
        path = tmp_path / "degenerate.curves"
        path.write_text(json.dumps(
            {"curves": [{"closed": False, "vertices": [[0, 0], [0, 0]]}]}))
        with pytest.raises(ValueError):
            hio.read_curves(path)
        loaded = hio.read_curves(path, validate=False)
        assert loaded[0][0] is False


class TestOffFiles:
    def test_round_trip_exact(self, tmp_path):
        mesh = icosphere(1, radius=1.234567891234567)
        path = tmp_path / "mesh.off"
        hio.write_off(path, mesh)
        back = hio.read_off(path)
        assert np.array_equal(back.vertices, mesh.vertices)
        assert np.array_equal(back.triangles, mesh.triangles)

    def test_rejects_non_off(self, tmp_path):
        path = tmp_path / "bad.off"
        path.write_text("PLY\n0 0 0\n")
        with pytest.raises(ValueError):
            hio.read_off(path)

    def test_rejects_quads(self, tmp_path):
        path = tmp_path / "quads.off"
        path.write_text("OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n")
        with pytest.raises(ValueError):
            hio.read_off(path)


class TestEnergyCsv:
    def test_round_trip(self, tmp_path):
        rows = [{"iter": 0, "kinetic": 0.0, "endpoint": 12.5, "total": 12.5,
                 "grad_norm": 3.25},
                {"iter": 1, "kinetic": 1.0 / 3.0, "endpoint": np.pi,
                 "total": 1.0 / 3.0 + np.pi, "grad_norm": 1e-7}]
        path = tmp_path / "energy.csv"
        hio.write_energy_csv(path, rows)
        back = hio.read_energy_csv(path)
        assert back == rows
        header = path.read_text().splitlines()[0]
        assert header == "iter,kinetic,endpoint,total,grad_norm"


class TestConfig:
    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError):
            hio.resolve_config({"kernel_size": 1.0})
        with pytest.raises(ValueError):
            hio.resolve_config({"kernel": {"width": 1.0}})

    def test_defaults_filled(self):
        cfg = hio.resolve_config({"kernel": {"scale": 2.0}})
        assert cfg["kernel"]["smoothness"] == 3
        assert cfg["lambda"] == 1.0
        assert cfg["optimizer"]["backend"] == "precond"
        assert cfg["timesteps"] == 10


class TestRunExperiment:
    def test_artifacts_written(self, tmp_path):
        config = hio.load_config(small_config(tmp_path))
        summary = hio.run_experiment(config, out_dir=str(tmp_path / "out"))
        out = tmp_path / "out"
        frames = sorted(os.listdir(out / "frames"))
        assert frames == [f"frame_{k:04d}.curves" for k in range(5)]
        grids = sorted(os.listdir(out / "grid"))
        assert grids == [f"grid_{k:04d}.curves" for k in range(5)]
        assert (out / "energy.csv").exists()
        result = json.loads((out / "result.json").read_text())
        assert result["frame_count"] == 5
        assert result["status"] in ("converged", "max_iterations")
        assert result["final_distance"] <= result["initial_distance"]
        assert result["config"]["optimizer"]["max_iterations"] == 3
        assert result["config"]["lambda"] == 1.0  # defaults echoed
        assert len(result["times"]) == 5
        assert "edge_length_cv" in result
        assert summary["backend"] in ("compiled", "numpy")

    def test_deterministic_energy_csv(self, tmp_path):
        config = hio.load_config(small_config(tmp_path))
        hio.run_experiment(dict(config), out_dir=str(tmp_path / "out1"))
        hio.run_experiment(dict(config), out_dir=str(tmp_path / "out2"))
        csv1 = (tmp_path / "out1" / "energy.csv").read_bytes()
        csv2 = (tmp_path / "out2" / "energy.csv").read_bytes()
        assert csv1 == csv2
        f1 = (tmp_path / "out1" / "frames" / "frame_0004.curves").read_bytes()
        f2 = (tmp_path / "out2" / "frames" / "frame_0004.curves").read_bytes()
        assert f1 == f2

    def test_requires_shapes_or_experiment(self):
        with pytest.raises(ValueError):
            hio.run_experiment({"kernel": {"scale": 1.0}})

    def test_mesh_experiment_writes_off_frames(self, tmp_path):
        template, target = (icosphere(0, 1.0),
                            icosphere(0, 1.15))
        hio.write_off(tmp_path / "template.off", template)
        hio.write_off(tmp_path / "target.off", target)
        config = hio.resolve_config({
            "template": str(tmp_path / "template.off"),
            "target": str(tmp_path / "target.off"),
            "kernel": {"scale": 0.5},
            "metric": {"kind": "surface_h1", "weight": 2.0},
            "varifold": {"width": 0.5},
            "timesteps": 2,
            "optimizer": {"max_iterations": 2},
        }, base_dir=str(tmp_path))
        summary = hio.run_experiment(config, out_dir=str(tmp_path / "out"))
        frames = sorted(os.listdir(tmp_path / "out" / "frames"))
        assert frames == [f"frame_{k:04d}.off" for k in range(3)]
        assert summary["grid_frame_count"] == 0
        assert summary["min_component_separation"][0] is None


class TestCli:
    def test_synth_writes_shapes_and_configs(self, tmp_path):
        rc = cli.main(["synth", "cardioids", "--out", str(tmp_path)])
        assert rc == 0
        assert (tmp_path / "template.curves").exists()
        assert (tmp_path / "target.curves").exists()
        plain = json.loads((tmp_path / "cardioids_plain.json").read_text())
        hybrid = json.loads((tmp_path / "cardioids_hybrid.json").read_text())
        assert plain["metric"]["kind"] == "none"
        assert hybrid["metric"]["kind"] == "h1_rot_scale_invariant"
        # the configs differ only in the metric block
        plain.pop("metric"), hybrid.pop("metric")
        assert plain == hybrid

    def test_register_from_config(self, tmp_path):
        cfg = small_config(tmp_path, iters=2)
        rc = cli.main(["register", "--config", str(cfg), "--out",
                       str(tmp_path / "res")])
        assert rc == 0
        assert (tmp_path / "res" / "result.json").exists()

    def test_register_backend_override(self, tmp_path):
        cfg = small_config(tmp_path, iters=2)
        rc = cli.main(["register", "--config", str(cfg), "--out",
                       str(tmp_path / "res"), "--backend", "lbfgs"])
        assert rc == 0
        result = json.loads((tmp_path / "res" / "result.json").read_text())
        assert result["config"]["optimizer"]["backend"] == "lbfgs"

    def test_register_template_target_override(self, tmp_path):
        cfg = small_config(tmp_path, iters=1)
        other = tmp_path / "other"
        other.mkdir()
        t = np.linspace(0, 2 * np.pi, 10, endpoint=False)
        hio.write_curves(other / "t.curves",
                         [PolygonalCurve(np.stack([np.cos(t), np.sin(t)], 1))])
        rc = cli.main(["register", "--config", str(cfg),
                       "--template", str(other / "t.curves"),
                       "--target", str(other / "t.curves"),
                       "--out", str(tmp_path / "res2")])
        assert rc == 0
        result = json.loads((tmp_path / "res2" / "result.json").read_text())
        assert result["status"] == "converged"
        assert result["final_distance"] == 0.0

    def test_eval_norm(self, tmp_path):
        t = np.linspace(0, 2 * np.pi, 12, endpoint=False)
        curve = PolygonalCurve(np.stack([np.cos(t), np.sin(t)], axis=1))
        hio.write_curves(tmp_path / "shape.curves", [curve])
        field = {"field": curve.vertices.tolist()}  # scaling field
        (tmp_path / "field.json").write_text(json.dumps(field))
        rc = cli.main(["eval-norm", "--shape", str(tmp_path / "shape.curves"),
                       "--field", str(tmp_path / "field.json"),
                       "--kind", "h1_rot_scale_invariant"])
        assert rc == 0

    def test_flow_grid(self, tmp_path):
        cfg = small_config(tmp_path, iters=2)
        cli.main(["register", "--config", str(cfg), "--out", str(tmp_path / "res")])
        rc = cli.main(["flow-grid", "--result", str(tmp_path / "res"),
                       "--resolution", "3"])
        assert rc == 0
        grids = sorted(os.listdir(tmp_path / "res" / "grid"))
        assert grids and grids[0] == "grid_0000.curves"
        doc = hio.read_curves(tmp_path / "res" / "grid" / "grid_0000.curves",
                              validate=False)
        assert len(doc) == 8  # 4 + 4 lines at resolution 3

    def test_console_entry_point(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "hybridmatch.cli", "synth", "rays",
             "--out", str(tmp_path)],
            capture_output=True, text=True)
        assert proc.returncode == 0
        assert (tmp_path / "rays_hybrid.json").exists()
