"""Selects the compiled joint kernel when available, else the numpy fallback.

Set ``RISFOX_BACKEND=python`` to force the fallback.
"""
import os

import numpy as np
from scipy.special import loggamma

if os.environ.get("RISFOX_BACKEND", "").lower() == "python":
    from . import _mbcore_py as _impl
    BACKEND = "python"
else:
    try:
        from . import _mbcore as _impl
        BACKEND = "cython"
    except ImportError:
        from . import _mbcore_py as _impl
        BACKEND = "python"


def _pack(terms, n):
    c0 = np.array([t.c0 for t in terms], dtype=float)
    coef = np.ascontiguousarray(np.array([t.coef for t in terms], dtype=float).reshape(len(terms), n))
    power = np.array([t.power for t in terms], dtype=float)
    return c0, coef, power


def _uniform(ax):
    """(abscissa, step, index of the real-axis node) of a uniform vertical axis, or None."""
    ax = np.asarray(ax, dtype=complex)
    if ax.size < 2 or np.ptp(ax.real) > 0:
        return None
    step = ax[1].imag - ax[0].imag
    if step <= 0 or not np.allclose(np.diff(ax.imag), step, rtol=1e-12, atol=0):
        return None
    return ax[0].real, step, ax[0].imag / step


def _lattice(term, grid):
    """Tabulate a joint term whose argument is an integer combination of node indices."""
    inc = np.array([c * g[1] for c, g in zip(term.coef, grid)])
    nz = np.abs(inc) > 0
    if not nz.any():
        return None
    delta = np.abs(inc[nz]).min()
    mult = inc / delta
    if not np.allclose(mult, np.round(mult), atol=1e-9):
        return None
    mult = np.round(mult).astype(np.int64)
    sizes = np.array([g[3] for g in grid])
    tmin = int(np.minimum(mult * (sizes - 1), 0).sum())
    tmax = int(np.maximum(mult * (sizes - 1), 0).sum())
    base = term.c0 + sum(c * g[0] for c, g in zip(term.coef, grid))
    # argument at node indices k: base + i*(start + delta * sum_d mult_d k_d)
    start = sum(c * g[1] * g[2] for c, g in zip(term.coef, grid))
    t = np.arange(tmin, tmax + 1)
    arg = base + 1j * (start + delta * t)
    return term.power * loggamma(arg), -tmin, mult


def joint_grid(axes, terms, impl=None):
    """Product of the joint gamma terms over the tensor grid spanned by ``axes``.

    Terms whose argument moves on a one-dimensional lattice of the uniform
    axes are tabulated once; the rest are evaluated point by point.
    """
    impl = impl or _impl
    sizes = np.array([len(a) for a in axes], dtype=np.int64)
    shape = tuple(int(s) for s in sizes)
    if not terms:
        return np.ones(shape, dtype=complex)
    grid = [_uniform(a) for a in axes]
    lat, rest = [], []
    for t in terms:
        entry = _lattice(t, [g + (n,) for g, n in zip(grid, sizes)]) if all(grid) else None
        (lat if entry is not None else rest).append(entry if entry is not None else t)
    out = np.ones(shape, dtype=complex)
    if lat:
        tables = [e[0] for e in lat]
        offs = np.cumsum([0] + [len(tb) for tb in tables[:-1]]) + np.array([e[1] for e in lat])
        mult = np.ascontiguousarray(np.array([e[2] for e in lat], dtype=np.int64))
        table = np.ascontiguousarray(np.concatenate(tables))
        out *= np.asarray(impl.lattice_grid(table, offs.astype(np.int64), mult, sizes)).reshape(shape)
    if rest:
        flat = np.ascontiguousarray(np.concatenate(axes).astype(complex))
        out *= np.asarray(impl.joint_grid(flat, sizes, *_pack(rest, len(axes)))).reshape(shape)
    return out


def joint_points(pts, terms, impl=None):
    """Product of the joint gamma terms at scattered points (rows of ``pts``)."""
    impl = impl or _impl
    pts = np.ascontiguousarray(pts, dtype=complex)
    if not terms:
        return np.ones(pts.shape[0], dtype=complex)
    return np.asarray(impl.joint_points(pts, *_pack(terms, pts.shape[1])))
