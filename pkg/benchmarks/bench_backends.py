"""Timing comparison of the compiled core against the numpy fallback on the
hot kernels: gram application, its position gradient, and the varifold sums.

Run as:  python benchmarks/bench_backends.py [--sizes 100 300 1000]
"""

import argparse
import time

import numpy as np

from hybridmatch import _reference
from hybridmatch.kernels import (_profile_coefficients,
                                 _profile_derivative_coefficients)

try:
    from hybridmatch import _core
except ImportError:
    _core = None


def timeit(fn, *args, repeat=5):
    fn(*args)  # warm up
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench(n):
    rng = np.random.default_rng(0)
    pts = np.ascontiguousarray(rng.normal(size=(n, 2)))
    mom = np.ascontiguousarray(rng.normal(size=(n, 2)))
    cot = np.ascontiguousarray(rng.normal(size=(n, 2)))
    nrm = rng.normal(size=(n, 2))
    nrm = np.ascontiguousarray(nrm / np.linalg.norm(nrm, axis=1, keepdims=True))
    mass = np.ascontiguousarray(rng.uniform(0.5, 1.5, size=n))
    coeffs = _profile_coefficients(3)
    dcoeffs = _profile_derivative_coefficients(3)

    cases = {
        "gram_apply": (lambda m: m.gram_apply(pts, pts, mom, coeffs, 2.0)),
        "gram_self_vjp": (lambda m: m.gram_self_vjp(pts, mom, cot, coeffs,
                                                    dcoeffs, 2.0)),
        "varifold_inner": (lambda m: m.varifold_inner(pts, nrm, mass, pts, nrm,
                                                      mass, 0.125, 1.0)),
        "varifold_grad": (lambda m: m.varifold_grad_first(pts, nrm, mass, pts,
                                                          nrm, mass, 0.125, 1.0)),
    }
    rows = []
    for name, call in cases.items():
        t_np = timeit(call, _reference)
        t_cy = timeit(call, _core) if _core else np.nan
        rows.append((name, n, t_np, t_cy))
    return rows


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", type=int, nargs="+", default=[100, 300, 1000])
    args = parser.parse_args()
    if _core is None:
        print("compiled core not available; timing numpy fallback only")
    print(f"{'kernel':<16}{'n':>6}{'numpy [ms]':>14}{'compiled [ms]':>16}"
          f"{'speedup':>10}")
    for n in args.sizes:
        for name, size, t_np, t_cy in bench(n):
            speed = t_np / t_cy if t_cy == t_cy else float("nan")
            print(f"{name:<16}{size:>6}{1e3 * t_np:>14.3f}{1e3 * t_cy:>16.3f}"
                  f"{speed:>10.2f}")


if __name__ == "__main__":
    main()
