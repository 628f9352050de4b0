import numpy as np
import pytest

from hybridmatch import (CurveMetricSpec, PolygonalCurve, curve_frame,
                         multi_shape_metric, seminorm_matrix, seminorm_value)
from hybridmatch.curves import rot90, value_vertex_gradient

QUADRATIC_KINDS = ("h1_general", "h1_rot_invariant", "h1_rot_scale_invariant")


def closed_curve(n, seed=0, wobble=0.25):
    rng = np.random.default_rng(seed)
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    r = 1.0 + wobble * np.sin(3 * t + rng.uniform(0, 2 * np.pi)) \
        + 0.1 * rng.normal() * np.cos(2 * t)
    pts = np.stack([r * np.cos(t), r * np.sin(t)], axis=1)
    return PolygonalCurve(pts * rng.uniform(0.5, 2.0) + rng.normal(size=2))


class TestCurveValidation:
    def test_too_few_vertices(self):
        with pytest.raises(ValueError):
            PolygonalCurve(np.zeros((2, 2)), closed=True)
        with pytest.raises(ValueError):
            PolygonalCurve(np.zeros((1, 2)), closed=False)

    def test_repeated_vertex_rejected(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        with pytest.raises(ValueError):
            PolygonalCurve(pts)

    def test_wraparound_edge_checked_for_closed(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 0.0]])
        with pytest.raises(ValueError):
            PolygonalCurve(pts, closed=True)
        PolygonalCurve(pts[:2], closed=False)


class TestCurveFrame:
    def test_unit_square(self):
        sq = PolygonalCurve(np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float))
        frame = curve_frame(sq)
        assert frame.total_length == pytest.approx(4.0, rel=1e-15)
        expected_t = np.array([[1, 0], [0, 1], [-1, 0], [0, -1]], dtype=float)
        assert np.allclose(frame.unit_tangents, expected_t)
        assert np.allclose(frame.unit_normals, rot90(expected_t))
        assert np.allclose(frame.edge_lengths, 1.0)

    def test_single_segment(self):
        seg = PolygonalCurve(np.array([[0.0, 0.0], [3.0, 4.0]]), closed=False)
        frame = curve_frame(seg)
        assert frame.edge_lengths[0] == pytest.approx(5.0)
        assert np.allclose(frame.unit_tangents[0], [0.6, 0.8])

    @pytest.mark.parametrize("n", [5, 12, 100])
    def test_regular_polygon_length(self, n):
        # elementary geometry: an n-gon inscribed in the unit circle has
        # perimeter 2 n sin(pi / n)
        t = np.linspace(0, 2 * np.pi, n, endpoint=False)
        poly = PolygonalCurve(np.stack([np.cos(t), np.sin(t)], axis=1))
        assert curve_frame(poly).total_length == pytest.approx(
            2 * n * np.sin(np.pi / n), rel=1e-12)


def brute_force_value(q, h, spec):
    """Naive per-edge assembly, written independently of the library path."""
    verts, closed = q.vertices, q.closed
    n = len(verts)
    edges = [(i, (i + 1) % n) for i in range(n if closed else n - 1)]
    lens = {e: np.linalg.norm(verts[e[1]] - verts[e[0]]) for e in edges}
    total = sum(lens.values())
    tans = {e: (verts[e[1]] - verts[e[0]]) / lens[e] for e in edges}
    nors = {e: np.array([-tans[e][1], tans[e][0]]) for e in edges}
    a1 = sum(np.sum((h[j] - h[i]) ** 2) / lens[(i, j)] for i, j in edges)
    p_t = sum((h[j] - h[i]) @ tans[(i, j)] for i, j in edges)
    p_n = sum((h[j] - h[i]) @ nors[(i, j)] for i, j in edges)
    if spec.kind == "h1_general":
        a0 = sum(np.sum((0.5 * (h[i] + h[j])) ** 2) * lens[(i, j)] for i, j in edges)
        return spec.weight * (spec.alpha * a0 + a1)
    if spec.kind == "h1_rot_invariant":
        return spec.weight * (a1 - p_n**2 / total)
    return spec.weight * (a1 / total - (p_t**2 + p_n**2) / total**2)


class TestSeminormValues:
    @pytest.mark.parametrize("kind", QUADRATIC_KINDS)
    def test_zero_field(self, kind):
        q = closed_curve(20, seed=1)
        spec = CurveMetricSpec(kind=kind, alpha=0.0, weight=3.0)
        assert seminorm_value(q, np.zeros_like(q.vertices), spec) == 0.0

    def test_kind_none_is_zero(self):
        q = closed_curve(10, seed=2)
        spec = CurveMetricSpec(kind="none")
        assert seminorm_value(q, np.ones_like(q.vertices), spec) == 0.0

    @pytest.mark.parametrize("kind", QUADRATIC_KINDS)
    def test_constant_field_blind(self, kind):
        q = closed_curve(31, seed=3)
        h = np.tile([0.7, -1.3], (len(q), 1))
        spec = CurveMetricSpec(kind=kind, alpha=0.0, weight=1.0)
        ref = seminorm_value(q, np.random.default_rng(0).normal(size=h.shape), spec)
        assert abs(seminorm_value(q, h, spec)) <= 1e-12 * abs(ref)

    def test_rotation_field_blind_for_rot_invariant(self):
        for seed in range(5):
            q = closed_curve(24, seed=seed)
            h = rot90(q.vertices)
            spec = CurveMetricSpec(kind="h1_rot_invariant", weight=1.0)
            ref = abs(seminorm_value(q, q.vertices**2, spec))
            assert abs(seminorm_value(q, h, spec)) <= 1e-12 * ref

    def test_scaling_field_blind_for_rot_scale_invariant(self):
        for seed in range(5):
            q = closed_curve(24, seed=10 + seed)
            spec = CurveMetricSpec(kind="h1_rot_scale_invariant", weight=1.0)
            ref = abs(seminorm_value(q, q.vertices**2, spec))
            assert abs(seminorm_value(q, q.vertices, spec)) <= 1e-12 * ref

    def test_similarity_field_blind_for_rot_scale_invariant(self):
        # c*q + rotation*q + translation combines the three blind directions
        q = closed_curve(30, seed=20)
        h = 0.6 * q.vertices + 1.7 * rot90(q.vertices) + np.array([2.0, -0.3])
        spec = CurveMetricSpec(kind="h1_rot_scale_invariant", weight=5.0)
        ref = abs(seminorm_value(q, q.vertices**2, spec))
        assert abs(seminorm_value(q, h, spec)) <= 1e-12 * ref

    def test_uniform_polygon_second_difference_form(self):
        # alpha=0 general kind on a regular polygon is the circulant
        # second-difference quadratic form; compare with naive assembly
        t = np.linspace(0, 2 * np.pi, 16, endpoint=False)
        q = PolygonalCurve(np.stack([np.cos(t), np.sin(t)], axis=1))
        rng = np.random.default_rng(4)
        h = rng.normal(size=q.vertices.shape)
        spec = CurveMetricSpec(kind="h1_general", alpha=0.0, weight=1.0)
        assert seminorm_value(q, h, spec) == pytest.approx(
            brute_force_value(q, h, spec), rel=1e-12)

    @pytest.mark.parametrize("kind", QUADRATIC_KINDS)
    @pytest.mark.parametrize("closed", [True, False])
    def test_matches_brute_force(self, kind, closed):
        rng = np.random.default_rng(hash((kind, closed)) % 2**32)
        for _ in range(3):
            q = closed_curve(rng.integers(8, 25), seed=rng.integers(1000))
            if not closed:
                q = PolygonalCurve(q.vertices[: len(q) - 2], closed=False)
            h = rng.normal(size=q.vertices.shape)
            spec = CurveMetricSpec(kind=kind, alpha=rng.uniform(0, 1), weight=2.5)
            assert seminorm_value(q, h, spec) == pytest.approx(
                brute_force_value(q, h, spec), rel=1e-11)

    def test_field_length_mismatch(self):
        q = closed_curve(10)
        with pytest.raises(ValueError):
            seminorm_value(q, np.zeros((9, 2)), CurveMetricSpec(kind="h1_general"))


class TestSeminormOperator:
    @pytest.mark.parametrize("kind", QUADRATIC_KINDS)
    def test_value_equals_quadratic_form(self, kind):
        q = closed_curve(18, seed=5)
        spec = CurveMetricSpec(kind=kind, alpha=0.2, weight=1.5)
        form = seminorm_matrix(q, spec)
        rng = np.random.default_rng(6)
        h = rng.normal(size=q.vertices.shape)
        dense = form.dense()
        hf = h.reshape(-1)
        assert form.value(h) == pytest.approx(hf @ dense @ hf, rel=1e-11)
        assert np.allclose(form.apply(h).reshape(-1), dense @ hf, rtol=1e-11)

    @pytest.mark.parametrize("kind", QUADRATIC_KINDS)
    def test_dense_symmetric_psd(self, kind):
        for seed in range(4):
            q = closed_curve(15, seed=seed)
            spec = CurveMetricSpec(kind=kind, alpha=0.5, weight=2.0)
            dense = seminorm_matrix(q, spec).dense()
            assert np.allclose(dense, dense.T, atol=1e-12)
            eig = np.linalg.eigvalsh(dense)
            assert eig.min() >= -1e-10 * max(eig.max(), 1e-30)

    def test_kind_none_has_no_operator(self):
        with pytest.raises(ValueError):
            seminorm_matrix(closed_curve(8), CurveMetricSpec(kind="none"))


class TestInvariances:
    @pytest.mark.parametrize("kind", QUADRATIC_KINDS)
    def test_cyclic_relabeling_exact(self, kind):
        q = closed_curve(23, seed=7)
        rng = np.random.default_rng(8)
        h = rng.normal(size=q.vertices.shape)
        spec = CurveMetricSpec(kind=kind, alpha=0.4, weight=1.0)
        v0 = seminorm_value(q, h, spec)
        for k in (1, 7, 15):
            shifted = PolygonalCurve(np.roll(q.vertices, k, axis=0))
            assert seminorm_value(shifted, np.roll(h, k, axis=0), spec) == v0

    @pytest.mark.parametrize("kind", QUADRATIC_KINDS)
    def test_rotation_equivariance(self, kind):
        q = closed_curve(19, seed=9)
        rng = np.random.default_rng(10)
        h = rng.normal(size=q.vertices.shape)
        ang = 1.1
        rot = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
        spec = CurveMetricSpec(kind=kind, alpha=0.3, weight=1.0)
        v = seminorm_value(q, h, spec)
        vr = seminorm_value(PolygonalCurve(q.vertices @ rot.T), h @ rot.T, spec)
        assert vr == pytest.approx(v, rel=1e-12)

    def test_scale_invariance_of_rot_scale_kind(self):
        q = closed_curve(21, seed=11)
        h = np.random.default_rng(12).normal(size=q.vertices.shape)
        spec = CurveMetricSpec(kind="h1_rot_scale_invariant", weight=1.0)
        v = seminorm_value(q, h, spec)
        for s in (2.0, 1.7, 0.31):
            vs = seminorm_value(PolygonalCurve(s * q.vertices), s * h, spec)
            assert vs == pytest.approx(v, rel=1e-12)

    def test_inverse_scale_behavior_of_rot_kind(self):
        q = closed_curve(21, seed=13)
        h = np.random.default_rng(14).normal(size=q.vertices.shape)
        spec = CurveMetricSpec(kind="h1_rot_invariant", weight=1.0)
        v = seminorm_value(q, h, spec)
        for s in (2.0, 0.25, 3.7):
            vs = seminorm_value(PolygonalCurve(s * q.vertices), h, spec)
            assert vs == pytest.approx(v / s, rel=1e-12)

    @pytest.mark.parametrize("kind", QUADRATIC_KINDS)
    def test_refinement_order(self, kind):
        # smooth curve + smooth field: the discrete value converges at
        # second order; fit the slope of successive differences
        def value_at(n):
            t = np.linspace(0, 2 * np.pi, n, endpoint=False)
            pts = np.stack([2.0 * np.cos(t), 1.1 * np.sin(t)], axis=1)
            h = np.stack([np.sin(pts[:, 0]) + 0.4 * np.cos(2 * pts[:, 1]),
                          np.cos(pts[:, 0] + pts[:, 1])], axis=1)
            spec = CurveMetricSpec(kind=kind, alpha=0.5, weight=1.0)
            return seminorm_value(PolygonalCurve(pts), h, spec)

        ns = np.array([32, 64, 128, 256])
        vals = [value_at(n) for n in ns] + [value_at(512)]
        diffs = np.abs(np.diff(vals))
        slope = np.polyfit(np.log(ns), np.log(diffs), 1)[0]
        assert slope <= -1.8


class TestVertexGradient:
    @pytest.mark.parametrize("kind", QUADRATIC_KINDS)
    @pytest.mark.parametrize("closed", [True, False])
    def test_matches_finite_differences(self, kind, closed):
        rng = np.random.default_rng(15)
        q = closed_curve(12, seed=16)
        verts = q.vertices if closed else q.vertices[:10]
        h = rng.normal(size=verts.shape)
        spec = CurveMetricSpec(kind=kind, alpha=0.7, weight=2.0)
        grad = value_vertex_gradient(verts, closed, h, spec)
        eps = 1e-6
        for idx in np.ndindex(verts.shape):
            vp, vm = verts.copy(), verts.copy()
            vp[idx] += eps
            vm[idx] -= eps
            fd = (seminorm_value(PolygonalCurve(vp, closed=closed), h, spec)
                  - seminorm_value(PolygonalCurve(vm, closed=closed), h, spec)) / (2 * eps)
            assert grad[idx] == pytest.approx(fd, rel=1e-5, abs=1e-7)


class TestMultiShapeMetric:
    def test_single_shape_matches_seminorm_matrix(self):
        q = closed_curve(14, seed=17)
        spec = CurveMetricSpec(kind="h1_rot_invariant", weight=2.0)
        h = np.random.default_rng(18).normal(size=q.vertices.shape)
        block = multi_shape_metric([q], [spec])
        assert block.value(h) == seminorm_matrix(q, spec).value(h)

    def test_block_diagonality(self):
        t = np.linspace(0, 2 * np.pi, 12, endpoint=False)
        c1 = PolygonalCurve(np.stack([np.cos(t), np.sin(t)], axis=1))
        c2 = PolygonalCurve(np.stack([np.cos(t) + 5.0, np.sin(t)], axis=1))
        spec = CurveMetricSpec(kind="h1_rot_scale_invariant", weight=1.0)
        block = multi_shape_metric([c1, c2], spec)
        rng = np.random.default_rng(19)
        h = np.zeros((24, 2))
        h[:12] = rng.normal(size=(12, 2))
        assert block.value(h) == pytest.approx(
            seminorm_matrix(c1, spec).value(h[:12]), rel=1e-14)

    def test_per_shape_rigid_fields_blind(self):
        shapes = [closed_curve(10, seed=s) for s in (30, 31, 32)]
        spec = CurveMetricSpec(kind="h1_rot_invariant", weight=1.0)
        h = np.concatenate([0.8 * rot90(q.vertices) + np.array([s, -s])
                            for s, q in enumerate(shapes)])
        block = multi_shape_metric(shapes, spec)
        ref = block.value(np.concatenate([q.vertices**2 for q in shapes]))
        assert abs(block.value(h)) <= 1e-12 * abs(ref)

    def test_spec_count_mismatch(self):
        shapes = [closed_curve(10, seed=40), closed_curve(11, seed=41)]
        with pytest.raises(ValueError):
            multi_shape_metric(shapes, [CurveMetricSpec(kind="h1_general")])
        with pytest.raises(ValueError):
            multi_shape_metric([], [])
