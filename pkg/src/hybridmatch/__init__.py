"""hybridmatch: diffeomorphic registration of curves and surfaces driven by
a kernel metric on deformation fields combined with shape-intrinsic
first-order seminorms, matched through an orientation-blind varifold cost.

The hot kernel sums run in a compiled extension when available and fall back
to numpy otherwise; see ``backend_name()``.
"""

from ._backend import backend_name
from .curves import (CurveFrame, CurveMetricSpec, PolygonalCurve, curve_frame,
                     multi_shape_metric, seminorm_matrix, seminorm_value)
from .kernels import (GaussianKernelSpec, KernelSpec, gaussian_eval, gram_apply,
                      gram_matrix, kernel_profile, reverse_bessel_coefficients)
from .solver import (GeodesicResult, HybridProblem, OptimizerSettings, ShapeState,
                     component_separation, control_norm, energy, energy_gradient,
                     flow_points, forward_shoot, metric_gradient, register)
from .surfaces import (SurfaceMetricSpec, TriangleMesh, stiffness_form,
                       stiffness_value)
from .varifold import (VarifoldAtoms, VarifoldSpec, atoms_from_curve,
                       atoms_from_mesh, varifold_distance, varifold_gradient,
                       varifold_inner)

__version__ = "0.1.0"

__all__ = [
    "backend_name", "CurveFrame", "CurveMetricSpec", "PolygonalCurve",
    "curve_frame", "multi_shape_metric", "seminorm_matrix", "seminorm_value",
    "GaussianKernelSpec", "KernelSpec", "gaussian_eval", "gram_apply",
    "gram_matrix", "kernel_profile", "reverse_bessel_coefficients",
    "GeodesicResult", "HybridProblem", "OptimizerSettings", "ShapeState",
    "component_separation", "control_norm", "energy", "energy_gradient",
    "flow_points", "forward_shoot", "metric_gradient", "register",
    "SurfaceMetricSpec", "TriangleMesh", "stiffness_form", "stiffness_value",
    "VarifoldAtoms", "VarifoldSpec", "atoms_from_curve", "atoms_from_mesh",
    "varifold_distance", "varifold_gradient", "varifold_inner",
    "__version__",
]
