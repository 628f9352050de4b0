"""Deterministic synthetic shapes for the bundled registration experiments.

All 2D generators produce curves whose initial discretization is uniform
(equal chord lengths, not just equal arc-length spacing), which is what the
parametrization-drift diagnostics measure against.
"""

import numpy as np

from .curves import PolygonalCurve
from .surfaces import TriangleMesh


def _polyline_interp(points, closed, s_query):
    """Linear interpolation along a polyline at arc-length positions."""
    pts = points if not closed else np.vstack([points, points[:1]])
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    s = np.clip(s_query, 0.0, cum[-1])
    idx = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(seg) - 1)
    t = (s - cum[idx]) / seg[idx]
    return pts[idx] + t[:, None] * (pts[idx + 1] - pts[idx])


def resample_uniform(points, closed, n, iterations=64, tol=1e-13):
    """n points on the polyline with (numerically) equal chord lengths.

    Arc-length resampling alone leaves chord lengths varying with curvature;
    a few fixed-point iterations redistribute the positions until the chords
    themselves are uniform.
    """
    pts = np.asarray(points, dtype=float)
    ref = pts if not closed else np.vstack([pts, pts[:1]])
    total = float(np.linalg.norm(np.diff(ref, axis=0), axis=1).sum())
    if closed:
        s = np.linspace(0.0, total, n, endpoint=False)
    else:
        s = np.linspace(0.0, total, n)
    for _ in range(iterations):
        cur = _polyline_interp(pts, closed, s)
        ring = np.vstack([cur, cur[:1]]) if closed else cur
        chords = np.linalg.norm(np.diff(ring, axis=0), axis=1)
        if chords.std() / chords.mean() < tol:
            break
        cum = np.concatenate([[0.0], np.cumsum(chords)])
        if closed:
            target = np.arange(n) * (cum[-1] / n)
            s = np.interp(target, cum, np.append(s, total))
        else:
            target = np.arange(n) * (cum[-1] / (n - 1))
            s = np.interp(target, cum, s)
    return _polyline_interp(pts, closed, s)


def edge_length_cv(vertices, closed):
    pts = np.vstack([vertices, vertices[:1]]) if closed else vertices
    lens = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    return float(lens.std() / lens.mean())


def _smoothed_cardioid(cusp_scale, samples=4096, window_frac=0.018):
    """Cardioid r = 1 - cos(theta), smoothed by a periodic Gaussian window
    along the parameter so the cusp is rounded."""
    theta = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    r = 1.0 - np.cos(theta)
    xy = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)
    width = window_frac * samples
    k = np.arange(samples)
    k = np.minimum(k, samples - k)
    win = np.exp(-0.5 * (k / width) ** 2)
    win /= win.sum()
    fw = np.fft.rfft(win)
    smooth = np.stack([np.fft.irfft(np.fft.rfft(xy[:, 0]) * fw, samples),
                       np.fft.irfft(np.fft.rfft(xy[:, 1]) * fw, samples)], axis=1)
    return smooth * cusp_scale


def gen_cardioids(n_vertices=100, long_axis=10.0):
    """(template, target): two smoothed closed cardioids, the template with
    the stated long-axis extent, the target a smaller offset variant."""
    base = _smoothed_cardioid(1.0)
    base = base * (long_axis / np.ptp(base[:, 0]))
    base -= base.mean(axis=0)
    # the resampled polygon clips the extremes slightly; rescale so the
    # discrete template has the stated extent exactly
    base = base * (long_axis / np.ptp(resample_uniform(base, True, n_vertices)[:, 0]))
    template = resample_uniform(base, True, n_vertices)
    target = resample_uniform(base * 0.9 + np.array([1.5, 1.1]), True, n_vertices)
    return ([PolygonalCurve(template, closed=True)],
            [PolygonalCurve(target, closed=True)])


def _ellipse(center, axes, n, phase=0.0, tilt=0.0, samples=2048):
    t = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False) + phase
    xy = np.stack([axes[0] * np.cos(t), axes[1] * np.sin(t)], axis=1)
    if tilt:
        rot = np.array([[np.cos(tilt), -np.sin(tilt)], [np.sin(tilt), np.cos(tilt)]])
        xy = xy @ rot.T
    return resample_uniform(xy + np.asarray(center), True, n)


def gen_nested_ellipses(n_large=100, n_small=30):
    """(template curves, target curves, pairing).

    Component order is [large, left, right] in both shape sets.  The two
    small ellipses trade places: the target holds the same two shapes at
    vertically mirrored stations, and the pairing matches template-left
    with target-right and vice versa, so each paired shape is a pure
    translation of the other.
    """
    shape_a, shape_b = (1.4, 0.9), (1.0, 1.3)
    sep, lane = 1.4, 1.3
    template = [
        PolygonalCurve(_ellipse((0.0, 0.0), (5.0, 3.4), n_large)),
        PolygonalCurve(_ellipse((-sep, -lane), shape_a, n_small)),
        PolygonalCurve(_ellipse((sep, lane), shape_b, n_small)),
    ]
    target = [
        PolygonalCurve(_ellipse((0.1, 0.05), (4.9, 3.5), n_large)),
        PolygonalCurve(_ellipse((-sep, lane), shape_b, n_small)),
        PolygonalCurve(_ellipse((sep, -lane), shape_a, n_small)),
    ]
    pairing = [(0, 0), (1, 2), (2, 1)]
    return template, target, pairing


def gen_rays(m=10, length=4.0, n_vertices=11):
    """(template, target): m straight segments from a common origin; the
    template angles are uniform, the target angles follow a square-root
    spacing and the whole target is offset by 5% of the segment length."""
    radii = np.linspace(0.0, length, n_vertices)
    shift = 0.05 * length * np.array([0.8, 0.6])

    def rays_at(angles, offset):
        out = []
        for th in angles:
            d = np.array([np.cos(th), np.sin(th)])
            out.append(PolygonalCurve(radii[:, None] * d + offset, closed=False))
        return out

    k = np.arange(m)
    template = rays_at(2.0 * np.pi * k / m, np.zeros(2))
    target = rays_at(2.0 * np.pi * np.sqrt(k / m), shift)
    return template, target


def gen_half_circles(n_arcs=5, largest_radius=10.0, n_vertices=30, rotation=0.85):
    """(template, target, largest_radius): concentric open half circles; the
    target is the template family rotated about the common center."""
    radii = largest_radius * (np.arange(1, n_arcs + 1) / n_arcs)

    def arcs_at(base_angle):
        out = []
        for r in radii:
            th = base_angle + np.linspace(0.0, np.pi, n_vertices)
            out.append(PolygonalCurve(
                np.stack([r * np.cos(th), r * np.sin(th)], axis=1), closed=False))
        return out

    return arcs_at(0.0), arcs_at(rotation), largest_radius


_ICO_T = (1.0 + np.sqrt(5.0)) / 2.0
_ICO_VERTS = np.array([
    [-1, _ICO_T, 0], [1, _ICO_T, 0], [-1, -_ICO_T, 0], [1, -_ICO_T, 0],
    [0, -1, _ICO_T], [0, 1, _ICO_T], [0, -1, -_ICO_T], [0, 1, -_ICO_T],
    [_ICO_T, 0, -1], [_ICO_T, 0, 1], [-_ICO_T, 0, -1], [-_ICO_T, 0, 1],
], dtype=float)
_ICO_FACES = np.array([
    [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
    [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
    [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
    [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
], dtype=np.int64)


def icosahedron(edge=1.0):
    """Regular icosahedron with the given edge length."""
    verts = _ICO_VERTS * (edge / 2.0)
    return TriangleMesh(verts, _ICO_FACES.copy())


def icosphere(level=2, radius=1.0):
    """Icosahedron subdivided ``level`` times and projected to a sphere."""
    verts = _ICO_VERTS / np.linalg.norm(_ICO_VERTS[0])
    faces = _ICO_FACES.copy()
    for _ in range(level):
        midpoint = {}
        new_verts = [verts]
        offset = len(verts)

        def mid(i, j):
            nonlocal offset
            key = (min(i, j), max(i, j))
            if key not in midpoint:
                p = verts[i] + verts[j]
                new_verts.append((p / np.linalg.norm(p))[None, :])
                midpoint[key] = offset
                offset += 1
            return midpoint[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new_faces += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        verts = np.concatenate(new_verts)
        faces = np.array(new_faces, dtype=np.int64)
    return TriangleMesh(verts * radius, faces)


def merge_meshes(meshes):
    """Concatenate meshes into one TriangleMesh with several components."""
    verts, faces, offset = [], [], 0
    for m in meshes:
        verts.append(m.vertices)
        faces.append(m.triangles + offset)
        offset += len(m.vertices)
    return TriangleMesh(np.concatenate(verts), np.concatenate(faces))


def _ellipsoid(base, axes, center, bulge=0.0):
    v = base.vertices * np.asarray(axes)
    if bulge:
        v = v * (1.0 + bulge * v[:, [2]] ** 2)
    return TriangleMesh(v + np.asarray(center), base.triangles.copy())


def gen_ellipsoid_triplet(level=1):
    """(template, target): three nearby deformed ellipsoids stored as one
    mesh each, scene normalized so the middle structure has unit height."""
    base = icosphere(level)
    template = merge_meshes([
        _ellipsoid(base, (0.35, 0.30, 0.50), (-0.80, 0.00, 0.00), bulge=0.2),
        _ellipsoid(base, (0.30, 0.25, 0.50), (0.00, 0.00, 0.00)),
        _ellipsoid(base, (0.30, 0.32, 0.38), (0.72, 0.08, 0.05)),
    ])
    target = merge_meshes([
        _ellipsoid(base, (0.32, 0.34, 0.46), (-0.76, 0.05, 0.02), bulge=0.1),
        _ellipsoid(base, (0.33, 0.24, 0.52), (0.02, -0.03, 0.03), bulge=0.15),
        _ellipsoid(base, (0.27, 0.30, 0.42), (0.70, 0.05, 0.00)),
    ])
    n = len(base.vertices)
    height = np.ptp(template.vertices[n:2 * n, 2])
    for mesh in (template, target):
        mesh.vertices /= height
    return template, target


def grid_polylines(bounds, resolution=12, samples_per_cell=6):
    """Horizontal and vertical grid lines over a 2D box, as open polylines."""
    (x0, y0), (x1, y1) = bounds
    npts = resolution * samples_per_cell + 1
    xs = np.linspace(x0, x1, resolution + 1)
    ys = np.linspace(y0, y1, resolution + 1)
    xd = np.linspace(x0, x1, npts)
    yd = np.linspace(y0, y1, npts)
    lines = []
    for y in ys:
        lines.append(np.stack([xd, np.full(npts, y)], axis=1))
    for x in xs:
        lines.append(np.stack([np.full(npts, x), yd], axis=1))
    return lines
