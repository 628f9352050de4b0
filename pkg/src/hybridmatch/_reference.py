"""Numpy implementations of the hot numerical kernels.

These are the fallback for the compiled extension in ``_core``; both expose
the same four functions and must agree to rounding error.  Polynomial
coefficients are passed constant-term first.  ``deriv_coeffs`` encodes the
radial derivative of the kernel profile through the identity
``profile'(u) = u * D(u) * exp(-u)`` (valid for smoothness >= 1); it is
``None`` for smoothness 0, where the profile has a kink at 0 and the
derivative is ``-exp(-u)``.
"""

import numpy as np


def _horner(coeffs, u):
    acc = np.full_like(u, coeffs[-1])
    for c in coeffs[-2::-1]:
        acc = acc * u + c
    return acc


def gram_apply(points_rows, points_cols, momenta, coeffs, inv_scale):
    """out[i] = sum_j profile(|x_i - y_j| * inv_scale) * momenta[j]."""
    diff = points_rows[:, None, :] - points_cols[None, :, :]
    u = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)) * inv_scale
    k = _horner(coeffs, u) * np.exp(-u)
    return k @ momenta


def gram_self_vjp(points, momenta, cotangents, coeffs, deriv_coeffs, inv_scale):
    """Gradient wrt ``points`` of sum_ij profile(|q_i-q_j|*inv_scale) (p_i . a_j)."""
    diff = points[:, None, :] - points[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", diff, diff)
    r = np.sqrt(r2)
    u = r * inv_scale
    if deriv_coeffs is None:
        # profile(u) = exp(-u): kink at r=0, zero out coincident pairs
        with np.errstate(divide="ignore", invalid="ignore"):
            coef = np.where(r2 > 0.0, -np.exp(-u) * inv_scale / np.where(r2 > 0.0, r, 1.0), 0.0)
    else:
        coef = _horner(deriv_coeffs, u) * np.exp(-u) * (inv_scale * inv_scale)
    s = cotangents @ momenta.T
    w = coef * (s + s.T)
    return np.einsum("ij,ijk->ik", w, diff)


def varifold_inner(ca, na, wa, cb, nb, wb, inv_two_tau2, normal_weight):
    """sum_ij chi(c_i, c_j) (1 + cw (n_i . n_j)^2) w_i w_j."""
    diff = ca[:, None, :] - cb[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    chi = np.exp(-d2 * inv_two_tau2)
    al = na @ nb.T
    return float(np.einsum("ij,i,j->", chi * (1.0 + normal_weight * al * al), wa, wb))


def varifold_grad_first(ca, na, wa, cb, nb, wb, inv_two_tau2, normal_weight):
    """Gradient of ``varifold_inner`` wrt the first atom set (centers, normals, masses)."""
    diff = ca[:, None, :] - cb[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    chi = np.exp(-d2 * inv_two_tau2)
    al = na @ nb.T
    geom = 1.0 + normal_weight * al * al
    ww = wa[:, None] * wb[None, :]
    g_centers = np.einsum("ij,ijk->ik", -2.0 * inv_two_tau2 * chi * geom * ww, diff)
    g_normals = (2.0 * normal_weight * chi * al * ww) @ nb
    g_masses = (chi * geom) @ wb
    return g_centers, g_normals, g_masses
