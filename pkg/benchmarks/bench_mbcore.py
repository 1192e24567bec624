"""Compare the compiled and numpy joint-kernel backends.

Times ``joint_points`` and ``joint_grid`` on the gamma terms of a three-element
sum CDF and checks that both backends return the same values. Run with
``python3 benchmarks/bench_mbcore.py [--repeat R]``.
"""
import argparse
import time

import numpy as np

from risfox.specfun import LinearGamma, _mbcore_py
from risfox.specfun._backend import joint_grid, joint_points

try:
    from risfox.specfun import _mbcore as _mbcore_cy
except ImportError:  # extension not built
    _mbcore_cy = None


def _terms(n):
    return [LinearGamma(1.0, (-1.0,) * n, -1), LinearGamma(0.5, (-0.5,) * n, 1)]


def _axes(n, size, jitter=False):
    rng = np.random.default_rng(0)
    t = np.linspace(-40, 40, size)
    axes = []
    for k in range(n):
        re = -0.3 - 0.1 * k + (0.01 * rng.standard_normal(size) if jitter else 0.0)
        axes.append(re + 1j * t)
    return axes


def _best(f, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = f()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    impls = [("python", _mbcore_py)] + ([("cython", _mbcore_cy)] if _mbcore_cy else [])
    if _mbcore_cy is None:
        print("compiled backend unavailable; timing the numpy fallback only")
    cases = [
        ("points n=3 m=200000", lambda impl: joint_points(
            np.random.default_rng(1).uniform(-1, 1, (200_000, 3)) * (0.1 + 30j) - 0.3, _terms(3), impl)),
        ("grid n=2 96x96 (jittered)", lambda impl: joint_grid(_axes(2, 96, True), _terms(2), impl)),
        ("grid n=3 64^3 (jittered)", lambda impl: joint_grid(_axes(3, 64, True), _terms(3), impl)),
        ("grid n=3 64^3 (lattice)", lambda impl: joint_grid(_axes(3, 64), _terms(3), impl)),
    ]
    print(f"{'case':<28}" + "".join(f"{name:>12}" for name, _ in impls) + f"{'speedup':>10}{'max rel diff':>14}")
    for label, f in cases:
        times, vals = [], []
        for _, impl in impls:
            t, v = _best(lambda: f(impl), args.repeat)
            times.append(t)
            vals.append(v)
        row = f"{label:<28}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(times) == 2:
            diff = np.max(np.abs(vals[1] - vals[0]) / np.maximum(np.abs(vals[0]), 1e-300))
            row += f"{times[0] / times[1]:>9.1f}x{diff:>14.2e}"
        print(row)


if __name__ == "__main__":
    main()
