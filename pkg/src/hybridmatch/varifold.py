"""Orientation-blind varifold discrepancy between shapes.

A shape is summarized by atoms (center, unit normal, mass): one atom per
curve edge (midpoint, rotated tangent, length) or per mesh triangle
(centroid, triangle normal, area).  The inner product between atom sets is
a Gaussian kernel on centers times ``1 + c (n_i . n_j)^2`` times the masses;
the squared alignment makes the discrepancy blind to orientation flips.
"""

from dataclasses import dataclass

import numpy as np

from . import _backend
from .curves import PolygonalCurve, edge_indices, edge_vectors, rot90
from .kernels import GaussianKernelSpec
from .surfaces import TriangleMesh, triangle_cross


@dataclass(frozen=True)
class VarifoldSpec:
    """Gaussian center kernel plus the weight on squared normal alignment."""

    kernel: GaussianKernelSpec
    normal_weight: float = 1.0

    def __post_init__(self):
        if self.normal_weight < 0:
            raise ValueError("normal_weight must be nonnegative")


@dataclass
class VarifoldAtoms:
    """(center, unit normal, mass) triples discretizing a shape."""

    centers: np.ndarray
    unit_normals: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        self.centers = np.ascontiguousarray(self.centers, dtype=float)
        self.unit_normals = np.ascontiguousarray(self.unit_normals, dtype=float)
        self.masses = np.ascontiguousarray(self.masses, dtype=float)
        if not (len(self.centers) == len(self.unit_normals) == len(self.masses)):
            raise ValueError("atom fields must have equal length")
        if self.centers.shape != self.unit_normals.shape:
            raise ValueError("centers and normals must have the same shape")
        if np.any(self.masses <= 0):
            raise ValueError("atom masses must be positive")
        norms = np.linalg.norm(self.unit_normals, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise ValueError("normals must be unit vectors")

    @property
    def dim(self):
        return self.centers.shape[1]

    def __len__(self):
        return len(self.centers)


def concatenate_atoms(parts):
    return VarifoldAtoms(
        np.concatenate([p.centers for p in parts]),
        np.concatenate([p.unit_normals for p in parts]),
        np.concatenate([p.masses for p in parts]),
    )


def curve_atom_arrays(vertices, closed):
    i, j = edge_indices(len(vertices), closed)
    lens, diff = edge_vectors(vertices, closed)
    centers = 0.5 * (vertices[i] + vertices[j])
    normals = rot90(diff / lens[:, None])
    return centers, normals, lens


def atoms_from_curve(q):
    """One atom per edge: midpoint, rotated unit tangent, edge length."""
    if isinstance(q, PolygonalCurve):
        vertices, closed = q.vertices, q.closed
    else:
        raise TypeError("expected a PolygonalCurve")
    if vertices.shape[1] != 2:
        raise ValueError("curve varifolds are defined for 2D curves")
    return VarifoldAtoms(*curve_atom_arrays(vertices, closed))


def mesh_atom_arrays(vertices, triangles):
    centers = vertices[triangles].mean(axis=1)
    cross = triangle_cross(vertices, triangles)
    norm = np.linalg.norm(cross, axis=1)
    if np.any(norm == 0.0):
        raise ValueError("degenerate triangle")
    return centers, cross / norm[:, None], 0.5 * norm


def atoms_from_mesh(mesh):
    """One atom per triangle: centroid, unit normal, area."""
    return VarifoldAtoms(*mesh_atom_arrays(mesh.vertices, mesh.triangles))


def _spec_args(spec):
    tau = spec.kernel.width
    return 1.0 / (2.0 * tau * tau), spec.normal_weight


def varifold_inner(a, b, spec):
    """Kernel inner product between two atom sets; symmetric."""
    if a.dim != b.dim:
        raise ValueError("atom sets have different ambient dimensions")
    inv2t2, cw = _spec_args(spec)
    return _backend.varifold_inner(
        a.centers, a.unit_normals, a.masses, b.centers, b.unit_normals, b.masses,
        inv2t2, cw)


def varifold_distance(a, b, spec):
    """<a,a> - 2<a,b> + <b,b>; zero when the atom sets coincide."""
    return varifold_inner(a, a, spec) - 2.0 * varifold_inner(a, b, spec) \
        + varifold_inner(b, b, spec)


def _distance_atom_gradient(a, b, spec):
    """Gradient of varifold_distance wrt the first atom set's fields."""
    inv2t2, cw = _spec_args(spec)
    g_self = _backend.varifold_grad_first(
        a.centers, a.unit_normals, a.masses, a.centers, a.unit_normals, a.masses,
        inv2t2, cw)
    g_cross = _backend.varifold_grad_first(
        a.centers, a.unit_normals, a.masses, b.centers, b.unit_normals, b.masses,
        inv2t2, cw)
    return tuple(2.0 * (s - c) for s, c in zip(g_self, g_cross))


def curve_atom_gradient_to_vertices(vertices, closed, g_centers, g_normals, g_masses):
    """Chain atom-field gradients through (midpoint, normal, length)."""
    n, d = vertices.shape
    i, j = edge_indices(n, closed)
    lens, diff = edge_vectors(vertices, closed)
    tans = diff / lens[:, None]
    # d(center)/d(endpoints) = I/2 each
    out = np.zeros((n, d))
    np.add.at(out, i, 0.5 * g_centers)
    np.add.at(out, j, 0.5 * g_centers)
    # normal = rot90(tangent): pull back through the projected rotation
    proj = np.eye(d) - np.einsum("ei,ej->eij", tans, tans)
    g_edge = -np.einsum("eij,ej->ei", proj, rot90(g_normals)) / lens[:, None]
    # mass = length
    g_edge += g_masses[:, None] * tans
    np.add.at(out, j, g_edge)
    np.add.at(out, i, -g_edge)
    return out


def mesh_atom_gradient_to_vertices(vertices, triangles, g_centers, g_normals, g_masses):
    """Chain atom-field gradients through (centroid, unit normal, area)."""
    cross = triangle_cross(vertices, triangles)
    norm = np.linalg.norm(cross, axis=1)
    unit = cross / norm[:, None]
    # cotangent on the raw cross product from both the unit normal and the area
    g_cross = (g_normals - unit * np.einsum("ij,ij->i", g_normals, unit)[:, None]) \
        / norm[:, None] + 0.5 * g_masses[:, None] * unit
    p0 = vertices[triangles[:, 0]]
    u = vertices[triangles[:, 1]] - p0
    v = vertices[triangles[:, 2]] - p0
    gu = np.cross(v, g_cross)
    gv = np.cross(g_cross, u)
    out = np.zeros_like(vertices)
    np.add.at(out, triangles[:, 0], g_centers / 3.0 - gu - gv)
    np.add.at(out, triangles[:, 1], g_centers / 3.0 + gu)
    np.add.at(out, triangles[:, 2], g_centers / 3.0 + gv)
    return out


def varifold_gradient(shape, target_atoms, spec):
    """Exact gradient of D(atoms(shape), target) wrt the shape's vertices."""
    if isinstance(shape, PolygonalCurve):
        atoms = atoms_from_curve(shape)
        gc, gn, gw = _distance_atom_gradient(atoms, target_atoms, spec)
        return curve_atom_gradient_to_vertices(shape.vertices, shape.closed, gc, gn, gw)
    if isinstance(shape, TriangleMesh):
        atoms = atoms_from_mesh(shape)
        gc, gn, gw = _distance_atom_gradient(atoms, target_atoms, spec)
        return mesh_atom_gradient_to_vertices(shape.vertices, shape.triangles, gc, gn, gw)
    raise TypeError("shape must be a PolygonalCurve or TriangleMesh")
