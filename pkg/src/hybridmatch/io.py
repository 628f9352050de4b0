"""File formats, experiment configuration and the registration pipeline.

Shape files: ``.curves`` is a JSON document ``{"curves": [{"closed": bool,
"vertices": [[x, y], ...]}, ...]}``; meshes use OFF text files.  Floats are
serialized with 17 significant digits so write-then-read round-trips
exactly.  ``run_experiment`` drives a full registration from a JSON config
and writes frames, flowed grids, the energy log and a result summary.
"""

import copy
import csv
import json
import os

import numpy as np

from . import datasets
from .curves import CurveMetricSpec, PolygonalCurve
from .kernels import GaussianKernelSpec, KernelSpec
from .solver import (GeodesicResult, HybridProblem, OptimizerSettings, ShapeState,
                     component_separation, flow_points, register)
from .surfaces import SurfaceMetricSpec, TriangleMesh
from .varifold import (VarifoldAtoms, VarifoldSpec, atoms_from_curve,
                       concatenate_atoms, mesh_atom_arrays)
from ._backend import backend_name


def _fmt(x):
    return format(float(x), ".17g")


def write_curves(path, curves):
    """Write PolygonalCurves (or (closed, vertices) pairs) as a .curves doc."""
    docs = []
    for c in curves:
        closed, verts = (c.closed, c.vertices) if isinstance(c, PolygonalCurve) else c
        docs.append({"closed": bool(closed),
                     "vertices": [[float(v) for v in row] for row in np.asarray(verts)]})
    with open(path, "w") as f:
        json.dump({"curves": docs}, f)
        f.write("\n")


def read_curves(path, validate=True):
    with open(path) as f:
        doc = json.load(f)
    out = []
    for c in doc["curves"]:
        verts = np.asarray(c["vertices"], dtype=float)
        if validate:
            out.append(PolygonalCurve(verts, closed=bool(c["closed"])))
        else:
            out.append((bool(c["closed"]), verts))
    return out


def write_off(path, mesh):
    verts = mesh.vertices if isinstance(mesh, TriangleMesh) else mesh[0]
    tris = mesh.triangles if isinstance(mesh, TriangleMesh) else mesh[1]
    with open(path, "w") as f:
        f.write("OFF\n")
        f.write(f"{len(verts)} {len(tris)} 0\n")
        for v in verts:
            f.write(" ".join(_fmt(x) for x in v) + "\n")
        for t in tris:
            f.write("3 " + " ".join(str(int(i)) for i in t) + "\n")


def read_off(path):
    with open(path) as f:
        tokens = []
        for line in f:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if tokens[0] != "OFF":
        raise ValueError(f"{path}: not an OFF file")
    nv, nf = int(tokens[1]), int(tokens[2])
    pos = 4
    verts = np.array(tokens[pos:pos + 3 * nv], dtype=float).reshape(nv, 3)
    pos += 3 * nv
    tris = []
    for _ in range(nf):
        k = int(tokens[pos])
        if k != 3:
            raise ValueError(f"{path}: only triangle faces supported")
        tris.append([int(t) for t in tokens[pos + 1:pos + 4]])
        pos += k + 1
    return TriangleMesh(verts, np.array(tris, dtype=np.int64))


ENERGY_COLUMNS = ("iter", "kinetic", "endpoint", "total", "grad_norm")


def write_energy_csv(path, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(ENERGY_COLUMNS)
        for row in rows:
            w.writerow([row["iter"]] + [_fmt(row[k]) for k in ENERGY_COLUMNS[1:]])


def read_energy_csv(path):
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        rows = [{k: (int(r[k]) if k == "iter" else float(r[k]))
                 for k in ENERGY_COLUMNS} for r in reader]
    return rows


DEFAULT_CONFIG = {
    "experiment": None,
    "template": None,
    "target": None,
    "groups": None,  # [{"template": [ids], "target": [ids]}, ...]; None = pooled
    "kernel": {"scale": 1.0, "smoothness": 3},
    "lambda": 1.0,
    "metric": {"kind": "none", "weight": 300.0, "alpha": 0.0},
    "varifold": {"width": 2.0, "normal_weight": 1.0},
    "timesteps": 10,
    "optimizer": {"backend": "precond", "max_iterations": 500,
                  "grad_tolerance": 1e-6, "initial_step": 1.0, "shrink": 0.5,
                  "slope_factor": 1e-4, "max_backtracks": 60, "step_growth": 4.0},
    "grid": {"enabled": True, "resolution": 12, "samples_per_cell": 6, "margin": 0.15},
    "output": "result",
}


def resolve_config(config, base_dir="."):
    """Overlay a partial config on the defaults; paths stay as given."""
    full = copy.deepcopy(DEFAULT_CONFIG)
    for key, val in config.items():
        if key not in full:
            raise ValueError(f"unknown config key {key!r}")
        if isinstance(full[key], dict) and isinstance(val, dict):
            for k2, v2 in val.items():
                if k2 not in full[key]:
                    raise ValueError(f"unknown config key {key}.{k2}")
                full[key][k2] = v2
        else:
            full[key] = val
    full["_base_dir"] = base_dir
    return full


def load_config(path):
    with open(path) as f:
        return resolve_config(json.load(f), base_dir=os.path.dirname(os.path.abspath(path)))


def _load_shape_file(path, base_dir):
    if not os.path.isabs(path):
        path = os.path.join(base_dir, path)
    if path.endswith(".off"):
        return read_off(path)
    return read_curves(path)


def _make_metric(cfg, kind_space):
    kind = cfg["kind"]
    if kind == "none":
        return None
    if kind_space == "mesh":
        if kind != "surface_h1":
            raise ValueError(f"metric kind {kind!r} is not a surface metric")
        return SurfaceMetricSpec(weight=cfg["weight"])
    return CurveMetricSpec(kind=kind, alpha=cfg.get("alpha", 0.0), weight=cfg["weight"])


def _target_atoms(target, groups, template_ncomp):
    """Build per-group (template component ids, pooled target atoms)."""
    if isinstance(target, ShapeState):
        pass
    else:
        target = ShapeState(target)
    if target.kind == "curves":
        per_comp = [atoms_from_curve(c) for c in target.curves]
    else:
        per_comp = [VarifoldAtoms(*mesh_atom_arrays(target.vertices, tris))
                    for tris in target.component_triangles]
    if groups is None:
        groups = [{"template": list(range(template_ncomp)),
                   "target": list(range(len(per_comp)))}]
    out = []
    for g in groups:
        atoms = concatenate_atoms([per_comp[i] for i in g["target"]])
        out.append((tuple(g["template"]), atoms))
    return out


def build_problem(template, target, config):
    """HybridProblem from loaded shapes and a resolved config dict."""
    state = template if isinstance(template, ShapeState) else ShapeState(template)
    kernel = KernelSpec(scale=config["kernel"]["scale"],
                        smoothness=config["kernel"]["smoothness"])
    vspec = VarifoldSpec(GaussianKernelSpec(config["varifold"]["width"]),
                         normal_weight=config["varifold"]["normal_weight"])
    metric = _make_metric(config["metric"], state.kind)
    opt = OptimizerSettings(**config["optimizer"])
    groups = _target_atoms(target, config["groups"], state.n_components)
    return HybridProblem(template=state, target_groups=groups, kernel=kernel,
                         varifold=vspec, lam=config["lambda"], metric=metric,
                         timesteps=config["timesteps"], optimizer=opt)


def synthesize(name):
    """(template shapes, target shapes, groups or None) for a named experiment."""
    if name == "cardioids":
        template, target = datasets.gen_cardioids()
        return template, target, None
    if name == "nested_ellipses":
        template, target, pairing = datasets.gen_nested_ellipses()
        groups = [{"template": [a], "target": [b]} for a, b in pairing]
        return template, target, groups
    if name == "rays":
        template, target = datasets.gen_rays()
        return template, target, None
    if name == "half_circles":
        template, target, _ = datasets.gen_half_circles()
        return template, target, None
    if name == "ellipsoids":
        template, target = datasets.gen_ellipsoid_triplet()
        groups = [{"template": [i], "target": [i]} for i in range(3)]
        return template, target, groups
    raise ValueError(f"unknown experiment {name!r}")


def _curve_structure(state):
    return [(c.closed, state.slices[i]) for i, c in enumerate(state.curves)]


def _edge_cv(state, vertices):
    lens = []
    for closed, sl in _curve_structure(state):
        pts = vertices[sl]
        ring = np.vstack([pts, pts[:1]]) if closed else pts
        lens.append(np.linalg.norm(np.diff(ring, axis=0), axis=1))
    lens = np.concatenate(lens)
    return float(lens.std() / lens.mean())


def _write_frames(out_dir, state, frames):
    frame_dir = os.path.join(out_dir, "frames")
    os.makedirs(frame_dir, exist_ok=True)
    for k, q in enumerate(frames):
        if state.kind == "curves":
            curves = [(closed, q[sl]) for closed, sl in _curve_structure(state)]
            write_curves(os.path.join(frame_dir, f"frame_{k:04d}.curves"), curves)
        else:
            write_off(os.path.join(frame_dir, f"frame_{k:04d}.off"),
                      (q, state.mesh.triangles))


def _write_grids(out_dir, state, problem, result, grid_cfg):
    if state.kind != "curves" or not grid_cfg["enabled"]:
        return 0
    all_pts = np.concatenate([problem.template.vertices] +
                             [a.centers for _, a in problem.target_groups])
    lo, hi = all_pts.min(axis=0), all_pts.max(axis=0)
    pad = grid_cfg["margin"] * (hi - lo).max()
    lines = datasets.grid_polylines((lo - pad, hi + pad),
                                    resolution=grid_cfg["resolution"],
                                    samples_per_cell=grid_cfg["samples_per_cell"])
    sizes = [len(l) for l in lines]
    flowed = flow_points(np.concatenate(lines), result, problem)
    grid_dir = os.path.join(out_dir, "grid")
    os.makedirs(grid_dir, exist_ok=True)
    for k, pts in enumerate(flowed):
        chunks, start = [], 0
        for n in sizes:
            chunks.append((False, pts[start:start + n]))
            start += n
        write_curves(os.path.join(grid_dir, f"grid_{k:04d}.curves"), chunks)
    return len(flowed)


def run_experiment(config, out_dir=None):
    """Run a registration from a resolved config; writes artifacts and
    returns the result summary dict."""
    config = resolve_config(config) if "_base_dir" not in config else config
    base_dir = config.get("_base_dir", ".")
    if config["experiment"] and not (config["template"] and config["target"]):
        template, target, groups = synthesize(config["experiment"])
        if config["groups"] is None:
            config = dict(config, groups=groups)
    else:
        if not (config["template"] and config["target"]):
            raise ValueError("config needs either an experiment name or shape files")
        template = _load_shape_file(config["template"], base_dir)
        target = _load_shape_file(config["target"], base_dir)
    problem = build_problem(template, target, config)
    result = register(problem)

    out_dir = out_dir or config["output"]
    if not os.path.isabs(out_dir):
        out_dir = os.path.join(base_dir, out_dir)
    os.makedirs(out_dir, exist_ok=True)
    state = problem.template
    _write_frames(out_dir, state, result.frames)
    grid_frames = _write_grids(out_dir, state, problem, result, config["grid"])
    write_energy_csv(os.path.join(out_dir, "energy.csv"), result.energy_log)

    separation = component_separation(result.frames, state)
    summary = {
        "status": result.status,
        "iterations": result.iterations,
        "initial_distance": result.initial_distance,
        "final_distance": result.final_distance,
        "frame_count": len(result.frames),
        "grid_frame_count": grid_frames,
        "backend": backend_name(),
        "min_component_separation": [None if not np.isfinite(s) else float(s)
                                     for s in separation],
        "times": [k * problem.step for k in range(problem.timesteps + 1)],
        "config": {k: v for k, v in config.items() if not k.startswith("_")},
    }
    if state.kind == "curves":
        summary["edge_length_cv"] = {
            "initial": _edge_cv(state, result.frames[0]),
            "final": _edge_cv(state, result.frames[-1]),
        }
    with open(os.path.join(out_dir, "result.json"), "w") as f:
        json.dump(summary, f, indent=2)
        f.write("\n")
    return summary
