"""Polygonal curves, their discrete differential geometry, and the intrinsic
first-order seminorms used inside the hybrid deformation metric.

Discretization convention: tangents, normals and arc-length derivatives are
constant per edge (``ds h = (h_{i+1} - h_i) / edge_length``) and integrals
are sums of per-edge values weighted by edge length.  Under this convention
the rotation- and scale-corrected seminorms are *exactly* blind to the
corresponding rigid fields, not just up to discretization error.
"""

import math
from dataclasses import dataclass, field

import numpy as np

METRIC_KINDS = ("none", "h1_general", "h1_rot_invariant", "h1_rot_scale_invariant")


@dataclass(frozen=True)
class CurveMetricSpec:
    """Which intrinsic seminorm to use, its zeroth-order weight, and the
    overall multiplicative factor applied to the quadratic form."""

    kind: str = "h1_rot_scale_invariant"
    alpha: float = 0.0
    weight: float = 1.0

    def __post_init__(self):
        if self.kind not in METRIC_KINDS:
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if not self.weight > 0:
            raise ValueError("weight must be positive")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")


@dataclass
class PolygonalCurve:
    """Ordered polygon vertices in R^2 or R^3; closed curves wrap around."""

    vertices: np.ndarray
    closed: bool = True

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=float)
        if self.vertices.ndim != 2 or self.vertices.shape[1] not in (2, 3):
            raise ValueError("vertices must be an (n, 2) or (n, 3) array")
        n = len(self.vertices)
        if n < (3 if self.closed else 2):
            raise ValueError("too few vertices for this curve")
        lens, _ = edge_vectors(self.vertices, self.closed)
        if np.any(lens == 0.0):
            raise ValueError("curve has a zero-length edge")

    @property
    def dim(self):
        return self.vertices.shape[1]

    def __len__(self):
        return len(self.vertices)


@dataclass
class CurveFrame:
    """Per-edge lengths, unit tangents, unit normals (2D) and total length."""

    edge_lengths: np.ndarray
    unit_tangents: np.ndarray
    unit_normals: np.ndarray | None
    total_length: float


def edge_indices(n, closed):
    i = np.arange(n if closed else n - 1)
    return i, (i + 1) % n


def edge_vectors(vertices, closed):
    i, j = edge_indices(len(vertices), closed)
    diff = vertices[j] - vertices[i]
    return np.sqrt(np.einsum("ij,ij->i", diff, diff)), diff


def rot90(v):
    """Rotate 2D vectors by +90 degrees: (x, y) -> (-y, x)."""
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def frame_arrays(vertices, closed):
    """(lengths, tangents, normals, total) straight from a vertex array.

    Normals are None for 3D curves, which have no canonical edge normal.
    """
    lens, diff = edge_vectors(vertices, closed)
    if np.any(lens == 0.0):
        raise ValueError("zero-length edge")
    tans = diff / lens[:, None]
    nors = rot90(tans) if vertices.shape[1] == 2 else None
    return lens, tans, nors, math.fsum(lens)


def curve_frame(q):
    """CurveFrame of a PolygonalCurve."""
    lens, tans, nors, total = frame_arrays(q.vertices, q.closed)
    return CurveFrame(lens, tans, nors, total)


@dataclass
class CurveQuadraticForm:
    """Quadratic form h -> sum_e dw_e |h_j - h_i|^2 + sum_e mw_e |(h_i+h_j)/2|^2
    - sum_r c_r (z_r . h)^2, with the overall weight folded into the
    coefficients.  The rank-one corrections are kept explicit so application
    stays O(n)."""

    n: int
    dim: int
    edges: tuple  # (i, j) index arrays
    diff_weights: np.ndarray
    mass_weights: np.ndarray | None = None
    rank_one: list = field(default_factory=list)  # [(coef, z (n, dim))]

    def value(self, h):
        # summed with fsum so the value is exactly invariant under cyclic
        # relabeling of a closed curve (term order changes, floats do not)
        h = np.asarray(h, dtype=float)
        i, j = self.edges
        dh = h[j] - h[i]
        terms = [math.fsum(self.diff_weights * np.einsum("ij,ij->i", dh, dh))]
        if self.mass_weights is not None:
            mid = 0.5 * (h[i] + h[j])
            terms.append(math.fsum(self.mass_weights * np.einsum("ij,ij->i", mid, mid)))
        for coef, z in self.rank_one:
            terms.append(-coef * math.fsum((z * h).ravel()) ** 2)
        return math.fsum(terms)

    def apply(self, h):
        h = np.asarray(h, dtype=float)
        i, j = self.edges
        out = np.zeros_like(h)
        wdh = self.diff_weights[:, None] * (h[j] - h[i])
        np.add.at(out, j, wdh)
        np.add.at(out, i, -wdh)
        if self.mass_weights is not None:
            wmid = (0.5 * self.mass_weights)[:, None] * 0.5 * (h[i] + h[j])
            np.add.at(out, i, wmid)
            np.add.at(out, j, wmid)
        for coef, z in self.rank_one:
            out -= (coef * float(np.vdot(z, h))) * z
        return out

    def dense(self):
        nd = self.n * self.dim
        i, j = self.edges
        diff = np.zeros((len(i), self.n))
        diff[np.arange(len(i)), j] = 1.0
        diff[np.arange(len(i)), i] -= 1.0
        mat = np.kron((diff.T * self.diff_weights) @ diff, np.eye(self.dim))
        if self.mass_weights is not None:
            avg = np.zeros((len(i), self.n))
            avg[np.arange(len(i)), j] = 0.5
            avg[np.arange(len(i)), i] += 0.5
            mat += np.kron((avg.T * self.mass_weights) @ avg, np.eye(self.dim))
        for coef, z in self.rank_one:
            zf = z.reshape(-1)
            mat -= coef * np.outer(zf, zf)
        return mat.reshape(nd, nd)


def _edge_difference_functional(n, edges, per_edge):
    """Vector z with z . h = sum_e per_edge[e] . (h_j - h_i)."""
    z = np.zeros((n, per_edge.shape[1]))
    i, j = edges
    np.add.at(z, j, per_edge)
    np.add.at(z, i, -per_edge)
    return z


def form_from_arrays(vertices, closed, spec):
    """Assemble the seminorm's quadratic form from a raw vertex array."""
    if spec.kind == "none":
        raise ValueError("metric kind 'none' has no quadratic form")
    n, d = vertices.shape
    edges = edge_indices(n, closed)
    lens, tans, nors, total = frame_arrays(vertices, closed)
    w = spec.weight
    if spec.kind == "h1_general":
        return CurveQuadraticForm(
            n, d, edges,
            diff_weights=w / lens,
            mass_weights=(w * spec.alpha) * lens if spec.alpha > 0 else None,
        )
    if nors is None:
        raise ValueError(f"{spec.kind} requires a 2D curve")
    if spec.kind == "h1_rot_invariant":
        z_n = _edge_difference_functional(n, edges, nors)
        return CurveQuadraticForm(
            n, d, edges, diff_weights=w / lens, rank_one=[(w / total, z_n)]
        )
    # h1_rot_scale_invariant
    z_t = _edge_difference_functional(n, edges, tans)
    z_n = _edge_difference_functional(n, edges, nors)
    return CurveQuadraticForm(
        n, d, edges,
        diff_weights=w / (total * lens),
        rank_one=[(w / total**2, z_t), (w / total**2, z_n)],
    )


def seminorm_matrix(q, spec):
    """The seminorm's operator, as a CurveQuadraticForm (use .dense() for the
    explicit symmetric PSD matrix)."""
    return form_from_arrays(q.vertices, q.closed, spec)


def seminorm_value(q, h, spec):
    """Evaluate the seminorm's quadratic form on a per-vertex field."""
    h = np.asarray(h, dtype=float)
    if h.shape != q.vertices.shape:
        raise ValueError("field shape must match curve vertices")
    if spec.kind == "none":
        return 0.0
    return form_from_arrays(q.vertices, q.closed, spec).value(h)


def value_vertex_gradient(vertices, closed, h, spec):
    """Gradient wrt vertex positions of the seminorm value at a fixed field.

    Needed by the adjoint sweep: the quadratic form's coefficients depend on
    the curve through edge lengths, tangents and normals.
    """
    n, d = vertices.shape
    if spec.kind == "none":
        return np.zeros_like(vertices)
    edges = edge_indices(n, closed)
    i, j = edges
    lens, tans, nors, total = frame_arrays(vertices, closed)
    dh = h[j] - h[i]
    dh2 = np.einsum("ij,ij->i", dh, dh)

    def scatter(per_edge):
        g = np.zeros((n, d))
        np.add.at(g, j, per_edge)
        np.add.at(g, i, -per_edge)
        return g

    # gradients of the building blocks wrt the edge vector (x_j - x_i)
    g_len = tans  # d length / d edge vector
    if spec.kind == "h1_general":
        g = scatter((-dh2 / lens**2)[:, None] * g_len)
        if spec.alpha > 0:
            mid = 0.5 * (h[i] + h[j])
            mid2 = np.einsum("ij,ij->i", mid, mid)
            g += scatter(mid2[:, None] * g_len) * spec.alpha
        return spec.weight * g

    if nors is None:
        raise ValueError(f"{spec.kind} requires a 2D curve")
    # projections of dh on the moving frame, with their edge-vector gradients
    proj = np.eye(d) - np.einsum("ei,ej->eij", tans, tans)
    g_pt = np.einsum("eij,ej->ei", proj, dh) / lens[:, None]
    p_n = float(np.einsum("ij,ij->", dh, nors))
    g_pn = -np.einsum("eij,ej->ei", proj, rot90(dh)) / lens[:, None]

    if spec.kind == "h1_rot_invariant":
        g = scatter((-dh2 / lens**2)[:, None] * g_len)
        g -= (2.0 * p_n / total) * scatter(g_pn)
        g += (p_n**2 / total**2) * scatter(g_len)
        return spec.weight * g

    # h1_rot_scale_invariant
    p_t = float(np.einsum("ij,ij->", dh, tans))
    a1 = float(dh2 @ (1.0 / lens))
    g = scatter((-dh2 / lens**2)[:, None] * g_len) / total
    g -= (a1 / total**2) * scatter(g_len)
    g -= (2.0 / total**2) * (p_t * scatter(g_pt) + p_n * scatter(g_pn))
    g += (2.0 * (p_t**2 + p_n**2) / total**3) * scatter(g_len)
    return spec.weight * g


class BlockDiagonalForm:
    """Per-shape quadratic forms glued block-diagonally over the stacked
    vertex array of several shapes."""

    def __init__(self, forms, slices):
        self.forms = forms
        self.slices = slices

    def value(self, h):
        h = np.asarray(h, dtype=float)
        return sum(f.value(h[s]) for f, s in zip(self.forms, self.slices))

    def apply(self, h):
        h = np.asarray(h, dtype=float)
        out = np.zeros_like(h)
        for f, s in zip(self.forms, self.slices):
            out[s] = f.apply(h[s])
        return out

    def dense(self):
        import scipy.linalg

        return scipy.linalg.block_diag(*[f.dense() for f in self.forms])


def multi_shape_metric(shapes, specs):
    """Block-diagonal form over several curves; each curve's seminorm sees
    only the field values at its own vertices."""
    if not shapes:
        raise ValueError("need at least one shape")
    if isinstance(specs, CurveMetricSpec):
        specs = [specs] * len(shapes)
    if len(specs) != len(shapes):
        raise ValueError("one metric spec per shape required")
    forms, slices, start = [], [], 0
    for q, spec in zip(shapes, specs):
        forms.append(seminorm_matrix(q, spec))
        slices.append(slice(start, start + len(q)))
        start += len(q)
    return BlockDiagonalForm(forms, slices)
