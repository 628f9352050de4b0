"""Triangulated surfaces and the intrinsic first-order seminorm
(tangential-gradient energy) as a sparse quadratic form.

The discretization is the standard piecewise-linear finite-element stiffness
matrix with cotangent weights, applied componentwise to vector fields.  With
edges e_i opposite vertex i (e_0 + e_1 + e_2 = 0) the local matrix is
``S_ij = (e_i . e_j) / (4 area)``: symmetric, PSD, rows summing to zero.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.csgraph as csgraph


@dataclass(frozen=True)
class SurfaceMetricSpec:
    """Multiplicative weight on the tangential-gradient energy."""

    weight: float = 1.0

    def __post_init__(self):
        if not self.weight > 0:
            raise ValueError("weight must be positive")


@dataclass
class TriangleMesh:
    """Vertices in R^3 and triangle index triples; may have several
    connected components (disjoint surfaces stored as one mesh)."""

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=float)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise ValueError("vertices must be an (n, 3) array")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise ValueError("triangles must be an (m, 3) index array")
        n = len(self.vertices)
        if self.triangles.min(initial=0) < 0 or self.triangles.max(initial=-1) >= n:
            raise ValueError("triangle index out of range")
        if np.any(triangle_areas(self.vertices, self.triangles) == 0.0):
            raise ValueError("mesh has a degenerate (zero-area) triangle")
        edges = np.sort(
            np.concatenate([self.triangles[:, [0, 1]], self.triangles[:, [1, 2]],
                            self.triangles[:, [2, 0]]]), axis=1)
        _, counts = np.unique(edges, axis=0, return_counts=True)
        if np.any(counts > 2):
            raise ValueError("an edge is shared by more than two triangles")

    def __len__(self):
        return len(self.vertices)


def triangle_cross(vertices, triangles):
    p0, p1, p2 = (vertices[triangles[:, k]] for k in range(3))
    return np.cross(p1 - p0, p2 - p0)


def triangle_areas(vertices, triangles):
    return 0.5 * np.linalg.norm(triangle_cross(vertices, triangles), axis=1)


def vertex_components(mesh):
    """Connected-component label per vertex."""
    i = np.concatenate([mesh.triangles[:, 0], mesh.triangles[:, 1], mesh.triangles[:, 2]])
    j = np.concatenate([mesh.triangles[:, 1], mesh.triangles[:, 2], mesh.triangles[:, 0]])
    n = len(mesh.vertices)
    adj = sparse.coo_matrix((np.ones_like(i), (i, j)), shape=(n, n))
    return csgraph.connected_components(adj, directed=False)[1]


def _opposite_edges(vertices, triangles):
    """Edge vectors e_k opposite vertex k, shape (m, 3, 3)."""
    p = vertices[triangles]  # (m, 3, 3)
    return np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)


def scalar_stiffness(vertices, triangles):
    """Sparse PSD stiffness matrix of the piecewise-linear elements."""
    edges = _opposite_edges(vertices, triangles)
    areas = triangle_areas(vertices, triangles)
    if np.any(areas == 0.0):
        raise ValueError("degenerate triangle")
    local = np.einsum("tik,tjk->tij", edges, edges) / (4.0 * areas)[:, None, None]
    rows = np.repeat(triangles, 3, axis=1).reshape(-1)
    cols = np.tile(triangles, (1, 3)).reshape(-1)
    n = len(vertices)
    return sparse.coo_matrix((local.reshape(-1), (rows, cols)), shape=(n, n)).tocsr()


class SurfaceStiffnessForm:
    """weight * sum over coordinates of (component)^T S (component)."""

    def __init__(self, matrix, weight):
        self.matrix = matrix
        self.weight = weight
        self.n = matrix.shape[0]
        self.dim = 3

    def value(self, h):
        h = np.asarray(h, dtype=float)
        return self.weight * float(np.einsum("ij,ij->", h, self.matrix @ h))

    def apply(self, h):
        return self.weight * (self.matrix @ np.asarray(h, dtype=float))

    def dense(self):
        return self.weight * np.kron(self.matrix.toarray(), np.eye(3))


def stiffness_form(mesh, spec):
    return SurfaceStiffnessForm(scalar_stiffness(mesh.vertices, mesh.triangles), spec.weight)


def stiffness_value(mesh, h, spec):
    h = np.asarray(h, dtype=float)
    if h.shape != mesh.vertices.shape:
        raise ValueError("field shape must match mesh vertices")
    return stiffness_form(mesh, spec).value(h)


def value_vertex_gradient(vertices, triangles, h, spec):
    """Gradient wrt vertex positions of the stiffness value at a fixed field.

    Per triangle, with c_ij = h_i . h_j and n = sum_ij c_ij (e_i . e_j):
    the energy is n / (4 area), d(area)/d(p_k) = (unit_normal x e_k) / 2 and
    dn/dp_k = 2 sum_j (c_{k+1,j} - c_{k+2,j}) e_j.
    """
    edges = _opposite_edges(vertices, triangles)
    cross = triangle_cross(vertices, triangles)
    areas = 0.5 * np.linalg.norm(cross, axis=1)
    if np.any(areas == 0.0):
        raise ValueError("degenerate triangle")
    unit = cross / (2.0 * areas)[:, None]
    hv = np.asarray(h, dtype=float)[triangles]  # (m, 3, 3)
    c = np.einsum("tik,tjk->tij", hv, hv)
    numer = np.einsum("tij,tik,tjk->t", c, edges, edges)
    coef = c[:, [1, 2, 0], :] - c[:, [2, 0, 1], :]  # (m, k, j): c[k+1, j] - c[k+2, j]
    g_num = 2.0 * np.einsum("tkj,tjd->tkd", coef, edges)
    g_area = 0.5 * np.cross(unit[:, None, :], edges)  # (m, k, 3)
    s_t = numer / (4.0 * areas)
    g_tri = g_num / (4.0 * areas)[:, None, None] - (s_t / areas)[:, None, None] * g_area
    out = np.zeros_like(np.asarray(vertices, dtype=float))
    np.add.at(out, triangles.reshape(-1), g_tri.reshape(-1, 3))
    return spec.weight * out
