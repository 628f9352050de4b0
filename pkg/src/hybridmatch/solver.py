"""Reduced optimal-control solver for hybrid kernel + intrinsic-metric
registration.

The control is a per-timestep covector field on the shape vertices; the
state evolves by explicit Euler through the kernel operator.  Gradients are
exact for the time-discretized problem: one forward sweep stores the frames,
one backward sweep propagates the adjoint state through the Euler recursion,
differentiating the kernel sums, the intrinsic quadratic form (including its
dependence on the moving shape) and the varifold end-point cost.

The costate identity makes the kernel-preconditioned gradient available with
no operator inversion: if the raw gradient is K_q (lam * a + G_q u + w),
the preconditioned one is simply (lam * a + G_q u + w).
"""

from dataclasses import dataclass, field

import numpy as np

from . import curves as _curves
from . import surfaces as _surfaces
from . import varifold as _varifold
from .curves import CurveMetricSpec, PolygonalCurve
from .kernels import KernelSpec, gram_apply as _kernel_gram_apply, gram_self_vjp
from .surfaces import SurfaceMetricSpec, TriangleMesh, vertex_components
from .varifold import VarifoldAtoms, VarifoldSpec


class ShapeState:
    """A deforming shape system: several curves, or one (possibly
    disconnected) triangle mesh, with a flattened vertex array."""

    def __init__(self, shapes):
        if isinstance(shapes, PolygonalCurve):
            shapes = [shapes]
        if isinstance(shapes, TriangleMesh):
            self.kind = "mesh"
            self.mesh = shapes
            self.curves = None
            self.vertices = shapes.vertices.copy()
            labels = vertex_components(shapes)
            self._component_vertices = [np.flatnonzero(labels == c)
                                        for c in range(labels.max() + 1)]
            tri_labels = labels[shapes.triangles[:, 0]]
            self.component_triangles = [shapes.triangles[tri_labels == c]
                                        for c in range(labels.max() + 1)]
        elif isinstance(shapes, (list, tuple)) and shapes and \
                all(isinstance(s, PolygonalCurve) for s in shapes):
            dims = {s.dim for s in shapes}
            if len(dims) != 1:
                raise ValueError("curves must share one ambient dimension")
            self.kind = "curves"
            self.curves = list(shapes)
            self.mesh = None
            self.vertices = np.concatenate([s.vertices for s in shapes])
            self.slices = []
            start = 0
            for s in shapes:
                self.slices.append(slice(start, start + len(s)))
                start += len(s)
            self._component_vertices = [np.arange(s.start, s.stop) for s in self.slices]
        else:
            raise TypeError("expected curves or a TriangleMesh")

    @property
    def dim(self):
        return self.vertices.shape[1]

    @property
    def n_components(self):
        return len(self._component_vertices)

    def component_vertex_indices(self, c):
        return self._component_vertices[c]


@dataclass(frozen=True)
class OptimizerSettings:
    backend: str = "precond"  # "precond" or "lbfgs"
    max_iterations: int = 500
    grad_tolerance: float = 1e-6
    initial_step: float = 1.0
    shrink: float = 0.5
    slope_factor: float = 1e-4
    max_backtracks: int = 60
    step_growth: float = 4.0  # warm-start factor on the last accepted step


@dataclass
class HybridProblem:
    """Template, per-group varifold targets, kernel, metrics and settings.

    ``target_groups`` maps tuples of template component indices to target
    atom sets; the end-point cost is the sum of the per-group varifold
    discrepancies (pooled atoms within a group, so matching is unlabeled
    inside a group).  ``metric`` is None for the plain kernel-only metric, a
    single spec applied to every component, or a per-component list.
    """

    template: ShapeState
    target_groups: list
    kernel: KernelSpec
    varifold: VarifoldSpec
    lam: float = 1.0
    metric: object = None
    timesteps: int = 10
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)

    def __post_init__(self):
        if not isinstance(self.template, ShapeState):
            self.template = ShapeState(self.template)
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if self.timesteps < 1:
            raise ValueError("timesteps must be >= 1")
        ncomp = self.template.n_components
        for comps, atoms in self.target_groups:
            if not all(0 <= c < ncomp for c in comps):
                raise ValueError("target group names an unknown component")
            if not isinstance(atoms, VarifoldAtoms):
                raise TypeError("group targets must be VarifoldAtoms")
        if self.template.kind == "curves":
            specs = self.metric
            if specs is None:
                specs = CurveMetricSpec(kind="none", weight=1.0)
            if isinstance(specs, CurveMetricSpec):
                specs = [specs] * ncomp
            if len(specs) != ncomp:
                raise ValueError("one curve metric spec per component required")
            self._curve_specs = list(specs)
        else:
            if self.metric is not None and not isinstance(self.metric, SurfaceMetricSpec):
                raise TypeError("mesh problems take a SurfaceMetricSpec or None")

    @property
    def step(self):
        return 1.0 / self.timesteps


@dataclass
class EnergyReport:
    total: float
    kinetic: float
    endpoint: float


@dataclass
class GeodesicResult:
    frames: np.ndarray  # (timesteps + 1, n, d)
    controls: np.ndarray  # (timesteps, n, d)
    energy_log: list  # dict rows: iter, kinetic, endpoint, total, grad_norm
    status: str
    iterations: int
    initial_distance: float
    final_distance: float


def _velocity(q, alpha, problem):
    return _kernel_gram_apply(q, q, alpha, problem.kernel)


def _metric_terms(problem, q, u, want_apply=True):
    """(value, G_q u) of the intrinsic form at state q, field u."""
    state = problem.template
    value = 0.0
    gu = np.zeros_like(u) if want_apply else None
    if state.kind == "curves":
        for comp, (curve, spec) in enumerate(zip(state.curves, problem._curve_specs)):
            if spec.kind == "none":
                continue
            sl = state.slices[comp]
            form = _curves.form_from_arrays(q[sl], curve.closed, spec)
            value += form.value(u[sl])
            if want_apply:
                gu[sl] = form.apply(u[sl])
    elif problem.metric is not None:
        mat = _surfaces.scalar_stiffness(q, state.mesh.triangles)
        w = problem.metric.weight
        value = w * float(np.einsum("ij,ij->", u, mat @ u))
        if want_apply:
            gu = w * (mat @ u)
    return value, gu


def _metric_q_gradient(problem, q, u):
    state = problem.template
    out = np.zeros_like(q)
    if state.kind == "curves":
        for comp, (curve, spec) in enumerate(zip(state.curves, problem._curve_specs)):
            if spec.kind == "none":
                continue
            sl = state.slices[comp]
            out[sl] = _curves.value_vertex_gradient(q[sl], curve.closed, u[sl], spec)
    elif problem.metric is not None:
        out = _surfaces.value_vertex_gradient(q, state.mesh.triangles, u, problem.metric)
    return out


def _group_atoms(problem, q, comps):
    state = problem.template
    if state.kind == "curves":
        parts = []
        for c in comps:
            sl = state.slices[c]
            parts.append(_varifold.curve_atom_arrays(q[sl], state.curves[c].closed))
        return tuple(np.concatenate(xs) for xs in zip(*parts))
    parts = [_varifold.mesh_atom_arrays(q, state.component_triangles[c]) for c in comps]
    return tuple(np.concatenate(xs) for xs in zip(*parts))


def _endpoint_value(problem, q):
    from ._backend import varifold_inner

    inv2t2 = 1.0 / (2.0 * problem.varifold.kernel.width**2)
    cw = problem.varifold.normal_weight
    total = 0.0
    for comps, atoms in problem.target_groups:
        ca, na, wa = _group_atoms(problem, q, comps)
        total += varifold_inner(ca, na, wa, ca, na, wa, inv2t2, cw)
        total -= 2.0 * varifold_inner(ca, na, wa, atoms.centers, atoms.unit_normals,
                                      atoms.masses, inv2t2, cw)
        total += varifold_inner(atoms.centers, atoms.unit_normals, atoms.masses,
                                atoms.centers, atoms.unit_normals, atoms.masses,
                                inv2t2, cw)
    return total


def _endpoint_gradient(problem, q):
    from ._backend import varifold_grad_first

    state = problem.template
    inv2t2 = 1.0 / (2.0 * problem.varifold.kernel.width**2)
    cw = problem.varifold.normal_weight
    grad = np.zeros_like(q)
    for comps, atoms in problem.target_groups:
        ca, na, wa = _group_atoms(problem, q, comps)
        g_self = varifold_grad_first(ca, na, wa, ca, na, wa, inv2t2, cw)
        g_cross = varifold_grad_first(ca, na, wa, atoms.centers, atoms.unit_normals,
                                      atoms.masses, inv2t2, cw)
        gc, gn, gw = (2.0 * (s - c) for s, c in zip(g_self, g_cross))
        if state.kind == "curves":
            start = 0
            for c in comps:
                sl = state.slices[c]
                n_atoms = sl.stop - sl.start if state.curves[c].closed \
                    else sl.stop - sl.start - 1
                rows = slice(start, start + n_atoms)
                grad[sl] += _varifold.curve_atom_gradient_to_vertices(
                    q[sl], state.curves[c].closed, gc[rows], gn[rows], gw[rows])
                start += n_atoms
        else:
            start = 0
            for c in comps:
                tris = state.component_triangles[c]
                rows = slice(start, start + len(tris))
                grad += _varifold.mesh_atom_gradient_to_vertices(
                    q, tris, gc[rows], gn[rows], gw[rows])
                start += len(tris)
    return grad


def control_norm(q, alpha, problem):
    """lam * <alpha, K_q alpha> + <K_q alpha, G_q (K_q alpha)> at state q."""
    qa = q.vertices if isinstance(q, ShapeState) else np.asarray(q, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    u = _velocity(qa, alpha, problem)
    gval, _ = _metric_terms(problem, qa, u, want_apply=False)
    return problem.lam * float(np.vdot(alpha, u)) + gval


def forward_shoot(q0, controls, problem):
    """Euler recursion q_{k+1} = q_k + (1/T) K_{q_k} alpha_k; returns frames."""
    q0 = q0.vertices if isinstance(q0, ShapeState) else np.asarray(q0, dtype=float)
    controls = np.asarray(controls, dtype=float)
    frames = np.empty((problem.timesteps + 1,) + q0.shape)
    frames[0] = q0
    for k in range(problem.timesteps):
        frames[k + 1] = frames[k] + problem.step * _velocity(frames[k], controls[k], problem)
    return frames


def energy(controls, problem):
    """EnergyReport(total, kinetic, endpoint); +inf on degenerate states."""
    controls = np.asarray(controls, dtype=float)
    lam, h = problem.lam, problem.step
    try:
        with np.errstate(all="ignore"):
            q = problem.template.vertices
            kinetic = 0.0
            for k in range(problem.timesteps):
                u = _velocity(q, controls[k], problem)
                gval, _ = _metric_terms(problem, q, u, want_apply=False)
                kinetic += lam * float(np.vdot(controls[k], u)) + gval
                q = q + h * u
            kinetic *= 0.5 * h
            endpoint = _endpoint_value(problem, q)
    except (ValueError, FloatingPointError):
        return EnergyReport(np.inf, np.inf, np.inf)
    total = kinetic + endpoint
    if not np.isfinite(total):
        return EnergyReport(np.inf, kinetic, endpoint)
    return EnergyReport(total, kinetic, endpoint)


@dataclass
class _Sweep:
    frames: np.ndarray
    report: EnergyReport
    raw_gradient: np.ndarray
    precond_gradient: np.ndarray
    costates: np.ndarray  # p_k = -w_k at frame k


def _adjoint_sweep(controls, problem):
    """Forward pass storing frames, then the backward adjoint recursion."""
    controls = np.asarray(controls, dtype=float)
    T, h, lam = problem.timesteps, problem.step, problem.lam
    q0 = problem.template.vertices
    frames = np.empty((T + 1,) + q0.shape)
    frames[0] = q0
    us, gus, kinetic = [], [], 0.0
    for k in range(T):
        u = _velocity(frames[k], controls[k], problem)
        gval, gu = _metric_terms(problem, frames[k], u)
        kinetic += lam * float(np.vdot(controls[k], u)) + gval
        us.append(u)
        gus.append(gu)
        frames[k + 1] = frames[k] + h * u
    kinetic *= 0.5 * h
    endpoint = _endpoint_value(problem, frames[-1])

    w = _endpoint_gradient(problem, frames[-1])
    costates = np.empty_like(frames)
    costates[-1] = -w
    raw = np.empty_like(controls)
    precond = np.empty_like(controls)
    for k in range(T - 1, -1, -1):
        q, a, u, gu = frames[k], controls[k], us[k], gus[k]
        precond[k] = h * (lam * a + gu + w)
        raw[k] = _velocity(q, precond[k], problem)
        cot = h * (w + gu) + (0.5 * lam * h) * a
        w = w + gram_self_vjp(q, a, cot, problem.kernel) \
            + (0.5 * h) * _metric_q_gradient(problem, q, u)
        costates[k] = -w
    report = EnergyReport(kinetic + endpoint, kinetic, endpoint)
    return _Sweep(frames, report, raw, precond, costates)


def energy_gradient(controls, problem):
    """Exact gradient of the discrete energy wrt the controls."""
    return _adjoint_sweep(controls, problem).raw_gradient


def metric_gradient(controls, problem):
    """Kernel-preconditioned gradient: K_q (metric_gradient) equals the raw
    gradient exactly, with no inversion performed."""
    return _adjoint_sweep(controls, problem).precond_gradient


def _log_row(it, report, grad_norm):
    return {"iter": it, "kinetic": report.kinetic, "endpoint": report.endpoint,
            "total": report.total, "grad_norm": grad_norm}


def register(problem):
    """Minimize the discrete energy from zero controls.

    Preconditioned gradient descent with Armijo backtracking by default
    (falling back to the raw gradient direction if a preconditioned step
    fails), or scipy L-BFGS over the raw gradient.
    """
    if problem.optimizer.backend == "lbfgs":
        return _register_lbfgs(problem)
    if problem.optimizer.backend != "precond":
        raise ValueError(f"unknown optimizer backend {problem.optimizer.backend!r}")
    s = problem.optimizer
    T = problem.timesteps
    controls = np.zeros((T,) + problem.template.vertices.shape)
    sweep = _adjoint_sweep(controls, problem)
    initial_distance = sweep.report.endpoint
    gnorm = float(np.linalg.norm(sweep.raw_gradient))
    log = [_log_row(0, sweep.report, gnorm)]
    status = "max_iterations"
    last_step = s.initial_step
    it = 0
    for it in range(1, s.max_iterations + 1):
        if gnorm < s.grad_tolerance:
            status = "converged"
            it -= 1
            break
        accepted = None
        for direction in (-sweep.precond_gradient, -sweep.raw_gradient):
            slope = float(np.vdot(sweep.raw_gradient, direction))
            if slope >= 0.0:
                continue
            step = min(s.initial_step, last_step * s.step_growth)
            for _ in range(s.max_backtracks):
                trial = controls + step * direction
                report = energy(trial, problem)
                if report.total <= sweep.report.total + s.slope_factor * step * slope:
                    accepted = (trial, step)
                    break
                step *= s.shrink
            if accepted:
                break
        if not accepted:
            status = "line_search_failure"
            it -= 1
            break
        controls, last_step = accepted
        sweep = _adjoint_sweep(controls, problem)
        gnorm = float(np.linalg.norm(sweep.raw_gradient))
        log.append(_log_row(it, sweep.report, gnorm))
    else:
        it = s.max_iterations
    if status == "max_iterations" and gnorm < s.grad_tolerance:
        status = "converged"
    return GeodesicResult(sweep.frames, controls, log, status, it,
                          initial_distance, sweep.report.endpoint)


def _register_lbfgs(problem):
    from scipy.optimize import minimize

    s = problem.optimizer
    T = problem.timesteps
    shape = (T,) + problem.template.vertices.shape
    cache = {}

    def fun(x):
        sweep = _adjoint_sweep(x.reshape(shape), problem)
        cache[x.tobytes()] = sweep
        return sweep.report.total, sweep.raw_gradient.ravel()

    x0 = np.zeros(int(np.prod(shape)))
    first = _adjoint_sweep(x0.reshape(shape), problem)
    initial_distance = first.report.endpoint
    log = [_log_row(0, first.report, float(np.linalg.norm(first.raw_gradient)))]

    def callback(xk):
        sweep = cache.get(xk.tobytes())
        if sweep is None:
            sweep = _adjoint_sweep(xk.reshape(shape), problem)
        log.append(_log_row(len(log), sweep.report,
                            float(np.linalg.norm(sweep.raw_gradient))))
        cache.clear()

    res = minimize(fun, x0, jac=True, method="L-BFGS-B", callback=callback,
                   options={"maxiter": s.max_iterations, "gtol": s.grad_tolerance,
                            "maxls": s.max_backtracks})
    controls = res.x.reshape(shape)
    sweep = _adjoint_sweep(controls, problem)
    if res.success:
        status = "converged"
    elif "ITERATIONS REACHED LIMIT" in str(res.message).upper():
        status = "max_iterations"
    else:
        status = f"lbfgs: {res.message}"
    return GeodesicResult(sweep.frames, controls, log, status, int(res.nit),
                          initial_distance, sweep.report.endpoint)


def flow_points(points, result, problem):
    """Evolve ambient points through the registered velocity field.

    Same Euler recursion as the state, so points placed on shape vertices
    reproduce the frames exactly.
    """
    x = np.ascontiguousarray(points, dtype=float)
    out = np.empty((problem.timesteps + 1,) + x.shape)
    out[0] = x
    for k in range(problem.timesteps):
        out[k + 1] = out[k] + problem.step * _kernel_gram_apply(
            out[k], result.frames[k], result.controls[k], problem.kernel)
    return out


def component_separation(frames, state):
    """Per-frame minimum vertex distance between distinct components; a
    diagnostic for the non-crossing behaviour (monitored, not enforced)."""
    idx = [state.component_vertex_indices(c) for c in range(state.n_components)]
    if len(idx) < 2:
        return np.full(len(frames), np.inf)
    out = np.empty(len(frames))
    for f, q in enumerate(frames):
        best = np.inf
        for a in range(len(idx)):
            for b in range(a + 1, len(idx)):
                diff = q[idx[a]][:, None, :] - q[idx[b]][None, :, :]
                d2 = np.einsum("ijk,ijk->ij", diff, diff)
                best = min(best, float(np.sqrt(d2.min())))
        out[f] = best
    return out
