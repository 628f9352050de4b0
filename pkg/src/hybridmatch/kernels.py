"""Matern-family scalar kernels for the deformation space, plus the Gaussian
kernel used by the varifold data term.

The radial profile is ``P_c(u) exp(-u)`` with ``u = r / scale`` and ``P_c``
the degree-c reverse Bessel polynomial normalized to ``P_c(0) = 1``.  The
kernel acts on vector momenta as a scalar times the identity matrix.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _backend

MAX_SMOOTHNESS = 4


def reverse_bessel_coefficients(smoothness):
    """Coefficients of P_c, constant term first, with P_c(0) = 1.

    Built from the integer recurrence theta_n = (2n-1) theta_{n-1}
    + x^2 theta_{n-2}, theta_0 = 1, theta_1 = 1 + x, then divided by
    theta_n(0).
    """
    if smoothness < 0:
        raise ValueError("smoothness must be a nonnegative integer")
    prev = [1]
    cur = [1, 1]
    if smoothness == 0:
        cur = prev
    else:
        for n in range(2, smoothness + 1):
            nxt = [(2 * n - 1) * c for c in cur]
            nxt += [0] * (n + 1 - len(nxt))
            for k, c in enumerate(prev):
                nxt[k + 2] += c
            prev, cur = cur, nxt
    const = cur[0]
    return [c / const for c in cur]


@lru_cache(maxsize=None)
def _profile_coefficients(smoothness):
    return np.array(reverse_bessel_coefficients(smoothness))


@lru_cache(maxsize=None)
def _profile_derivative_coefficients(smoothness):
    """Coefficients of D with profile'(u) = u * D(u) * exp(-u); None for c=0.

    With P = sum p_k u^k, (P' - P)(u) has zero constant term when p_1 = p_0,
    which holds for every c >= 1, so D(u) = (P'(u) - P(u)) / u is a
    polynomial of degree c - 1.
    """
    if smoothness == 0:
        return None
    p = reverse_bessel_coefficients(smoothness) + [0.0]
    return np.array([(k + 2) * p[k + 2] - p[k + 1] for k in range(smoothness)])


@dataclass(frozen=True)
class KernelSpec:
    """Deformation kernel: length scale and integer smoothness order."""

    scale: float
    smoothness: int = 3

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("kernel scale must be positive")
        if self.smoothness not in range(MAX_SMOOTHNESS + 1):
            raise ValueError(f"smoothness must be in 0..{MAX_SMOOTHNESS}")


@dataclass(frozen=True)
class GaussianKernelSpec:
    """Gaussian kernel exp(-|x-y|^2 / (2 width^2)) for the varifold term."""

    width: float

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("kernel width must be positive")


def kernel_profile(r, spec):
    """Radial profile P_c(r/a) exp(-r/a); 1 at r=0, decreasing in r."""
    u = np.asarray(r, dtype=float) / spec.scale
    coeffs = _profile_coefficients(spec.smoothness)
    val = np.polyval(coeffs[::-1], u) * np.exp(-u)
    return float(val) if np.isscalar(r) else val


def kernel_profile_derivative(r, spec):
    """d/dr of kernel_profile; at r=0 returns 0 (one-sided 0 for c>=1)."""
    u = np.asarray(r, dtype=float) / spec.scale
    dcoeffs = _profile_derivative_coefficients(spec.smoothness)
    if dcoeffs is None:
        val = np.where(u > 0, -np.exp(-u) / spec.scale, 0.0)
    else:
        val = np.polyval(dcoeffs[::-1], u) * u * np.exp(-u) / spec.scale
    return float(val) if np.isscalar(r) else val


def _as_points(x, name):
    arr = np.ascontiguousarray(x, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2d array of points")
    return arr


def gram_apply(points_rows, points_cols, momenta, spec):
    """Sum_j profile(|x_i - y_j|) * momenta_j for every row point x_i."""
    rows = _as_points(points_rows, "points_rows")
    cols = _as_points(points_cols, "points_cols")
    mom = _as_points(momenta, "momenta")
    if rows.shape[1] != cols.shape[1]:
        raise ValueError("row and column points have different dimensions")
    if mom.shape != cols.shape:
        raise ValueError("momenta must match column points in shape")
    coeffs = _profile_coefficients(spec.smoothness)
    return _backend.gram_apply(rows, cols, mom, coeffs, 1.0 / spec.scale)


def gram_matrix(points_rows, points_cols, spec):
    """Dense matrix of profile values; for diagnostics and small oracles."""
    rows = _as_points(points_rows, "points_rows")
    cols = _as_points(points_cols, "points_cols")
    diff = rows[:, None, :] - cols[None, :, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    return kernel_profile(r, spec)


def gram_self_vjp(points, momenta, cotangents, spec):
    """Gradient wrt points of sum_ij profile(|q_i - q_j|) (p_i . a_j)."""
    pts = _as_points(points, "points")
    mom = _as_points(momenta, "momenta")
    cot = _as_points(cotangents, "cotangents")
    if mom.shape != pts.shape or cot.shape != pts.shape:
        raise ValueError("momenta and cotangents must match points in shape")
    coeffs = _profile_coefficients(spec.smoothness)
    dcoeffs = _profile_derivative_coefficients(spec.smoothness)
    return _backend.gram_self_vjp(pts, mom, cot, coeffs, dcoeffs, 1.0 / spec.scale)


def gaussian_eval(x, y, spec):
    """exp(-|x - y|^2 / (2 width^2)); symmetric, 1 iff x == y."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape:
        raise ValueError("points have different dimensions")
    d2 = float(np.sum((xa - ya) ** 2))
    return float(np.exp(-d2 / (2.0 * spec.width**2)))
