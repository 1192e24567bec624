"""Mellin-Barnes quadrature for univariate and multivariate H-functions."""
from __future__ import annotations

import math
import string
from typing import NamedTuple

import numpy as np
from scipy.stats import qmc

from ..errors import DimensionLimitError, DomainError, NonConvergentIntegralError
from . import _backend
from .contour import MULTIVARIATE_TOL, UNIVARIATE_TOL, contour_for
from .params import FoxHParams, MultiFoxHParams

EPS = np.finfo(float).eps
MAX_TENSOR_DIM = 3
MAX_DIM = 5
MAX_DOUBLINGS = 7
MAX_POINTS = 1 << 25
BLOCK = 1 << 21


class HResult(NamedTuple):
    """Integral value with an absolute error estimate (arrays match the input shape)."""

    value: np.ndarray
    error: np.ndarray


def _positive(x, what="x"):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)) or np.any(~np.isfinite(x)):
        raise DomainError(f"{what} must be positive and finite")
    return x


def _refined_step(h, margin, tol, lnx_max):
    return min(h, 2 * math.pi * margin / (math.log(100.0 / tol) + margin * lnx_max))


def _doubling_error(val, coarse, l1):
    """Error of the fine level from the difference with the doubled step.

    The trapezoid error decays like exp(-a/h), so the fine error is about the
    square of the coarse one relative to the integrand scale. Outside that
    regime the raw difference is reported.
    """
    diff = np.abs(val - coarse)
    scale = np.maximum(l1, np.abs(val))
    with np.errstate(divide="ignore", invalid="ignore"):
        sq = np.where(scale > 0, diff ** 2 / scale, diff)
    err = np.where(diff < 1e-2 * scale, sq, diff)
    return err + 64 * EPS * l1


def mellin_barnes(kernel, x, contour=None, *, tol=UNIVARIATE_TOL, atol=0.0, refine=True):
    """Evaluate 1/(2 pi i) * integral of kernel(s) x**(-s) ds by the trapezoid rule.

    The integrand is assumed conjugate-symmetric (real coefficients), so
    only the upper half of the line is sampled. The step is halved until two
    successive levels agree to ``max(tol*|H|, atol)`` or roundoff.
    """
    x = _positive(x)
    xs = x.ravel()
    if contour is None:
        contour = contour_for([kernel], (), tol)
    c, T, d = contour.abscissa[0], contour.T[0], contour.margin[0]
    lnx = np.log(xs)
    h = contour.steps[0]
    if refine:
        h = _refined_step(h, d, tol, np.abs(lnx).max(initial=0.0))
    scale = np.exp(-c * lnx)
    for _ in range(MAX_DOUBLINGS + 1):
        K = int(math.ceil(T / h))
        s = c + 1j * h * np.arange(K + 1)
        th = np.nan_to_num(kernel(s))
        th[0] *= 0.5
        val = np.empty(xs.size)
        coarse = np.empty(xs.size)
        rows = max(1, BLOCK // (K + 1))
        for i in range(0, xs.size, rows):
            terms = th[None, :] * np.exp(-s[None, :] * lnx[i:i + rows, None])
            val[i:i + rows] = h / math.pi * terms.sum(axis=1).real
            coarse[i:i + rows] = 2 * h / math.pi * terms[:, ::2].sum(axis=1).real
        l1 = h / math.pi * np.abs(th).sum() * scale
        tail = np.abs(th[-1]) * scale / math.pi
        err = _doubling_error(val, coarse, l1) + tail
        ok = err <= np.maximum(np.maximum(tol * np.abs(val), atol), 128 * EPS * l1)
        if ok.all() or not refine:
            return HResult(val.reshape(x.shape), err.reshape(x.shape))
        h *= 0.5
    raise NonConvergentIntegralError(
        f"node doubling did not reach tol={tol:g} (worst error {err.max():.3g} at "
        f"x={xs[np.argmax(err - tol * np.abs(val))]:g})")


def fox_h(params: FoxHParams, x, contour=None, *, tol=UNIVARIATE_TOL, atol=0.0, refine=True):
    """Univariate H-function H^{m,n}_{p,q}(x) with an error estimate.

    ``contour`` defaults to :func:`auto_contour`. Set ``refine=False`` to use
    the contour's nodes as given (no doubling).
    """
    return mellin_barnes(params.kernel(), x, contour, tol=tol, atol=atol, refine=refine)


def _einsum_spec(n):
    letters = string.ascii_lowercase[:n]
    return letters + "," + ",".join("z" + ch for ch in letters) + "->z"


def _tensor(kernels, terms, lnx, contour, tol, atol, refine, max_points):
    n = len(kernels)
    cs, Ts, ds = contour.abscissa, contour.T, contour.margin
    hs = list(contour.steps)
    if refine:
        lmax = np.abs(lnx).max(axis=0)
        hs = [_refined_step(h, d, tol, lm) for h, d, lm in zip(hs, ds, lmax)]
    # a common step keeps joint-term arguments on a lattice (see _backend)
    hs = [min(hs)] * n
    spec = _einsum_spec(n)
    for _ in range(MAX_DOUBLINGS + 1):
        Ks = [int(math.ceil(T / h)) for T, h in zip(Ts, hs)]
        taus = [hs[0] * np.arange(Ks[0] + 1)] + [h * np.arange(-K, K + 1) for h, K in zip(hs[1:], Ks[1:])]
        npts = math.prod(len(t) for t in taus)
        if npts > max_points:
            break
        axes = [c + 1j * t for c, t in zip(cs, taus)]
        J = _backend.joint_grid(axes, terms)
        ths = [np.nan_to_num(k(a)) * h / (2 * math.pi) for k, a, h in zip(kernels, axes, hs)]
        ths[0][0] *= 0.5
        sl = (slice(None, None, 2),) + tuple(slice(K % 2, None, 2) for K in Ks[1:])
        Jc = J[sl]
        Ja = np.abs(J)
        val = np.empty(lnx.shape[0])
        coarse = np.empty_like(val)
        l1 = np.empty_like(val)
        rows = max(1, BLOCK // max(len(t) for t in taus) // n)
        for i in range(0, lnx.shape[0], rows):
            W = [th[None, :] * np.exp(-a[None, :] * lnx[i:i + rows, j, None])
                 for j, (th, a) in enumerate(zip(ths, axes))]
            val[i:i + rows] = 2 * np.einsum(spec, J, *W, optimize=True).real
            Wc = [2 * w[:, s] for w, s in zip(W, sl)]
            coarse[i:i + rows] = 2 * np.einsum(spec, Jc, *Wc, optimize=True).real
            l1[i:i + rows] = 2 * np.einsum(spec, Ja, *[np.abs(w) for w in W], optimize=True)
        err = _doubling_error(val, coarse, l1)
        ok = err <= np.maximum(np.maximum(tol * np.abs(val), atol), 256 * EPS * l1)
        if ok.all() or not refine:
            return val, err
        hs = [h * 0.5 for h in hs]
    raise NonConvergentIntegralError(
        f"tensor quadrature did not reach tol={tol:g} within {max_points} points")


def _laplace_scales(contour):
    # envelope reaches 1e-16 of its peak at T, so its decay rate is about 36.8/T;
    # a heavier-tailed sampling density keeps the weights bounded
    return np.asarray(contour.T) / 25.0


def _quasi_random(kernels, terms, lnx, contour, tol, atol, refine, max_points, seed=0):
    n = len(kernels)
    cs = np.asarray(contour.abscissa)
    b = _laplace_scales(contour)
    reps = 8
    m = 14
    while (1 << m) * reps <= max_points:
        ests = np.empty((reps, lnx.shape[0]))
        for r in range(reps):
            u = qmc.Sobol(n, scramble=True, seed=seed + r).random_base2(m)
            v = u - 0.5
            tau = -b * np.sign(v) * np.log1p(-2 * np.abs(v))
            logdens = (-np.abs(tau) / b - np.log(2 * b)).sum(axis=1)
            s = cs + 1j * tau
            base = _backend.joint_points(s, terms)
            for j, k in enumerate(kernels):
                base = base * np.nan_to_num(k(s[:, j]))
            base = base * np.exp(-logdens) / (2 * math.pi) ** n
            ests[r] = (base[None, :] * np.exp(-(s[None, :, :] * lnx[:, None, :]).sum(axis=2))).real.mean(axis=1) \
                if lnx.shape[0] * s.shape[0] <= BLOCK else \
                np.array([(base * np.exp(-(s * l).sum(axis=1))).real.mean() for l in lnx])
        val = ests.mean(axis=0)
        err = 3 * ests.std(axis=0, ddof=1) / math.sqrt(reps)
        ok = err <= np.maximum(tol * np.abs(val), atol)
        if ok.all() or not refine:
            return val, err
        m += 2
    raise NonConvergentIntegralError(
        f"quasi-random quadrature did not reach tol={tol:g} within {max_points} points")


def mellin_barnes_nd(kernels, terms, x, contour=None, *, tol=MULTIVARIATE_TOL, atol=0.0,
                     refine=True, strategy=None, max_tensor_dim=MAX_TENSOR_DIM,
                     max_dim=MAX_DIM, max_points=MAX_POINTS):
    """N-fold Mellin-Barnes integral of prod_i kernel_i(s_i) x_i**(-s_i) times joint terms.

    ``x`` has shape (N,) or (batch, N). ``terms`` is a list of
    :class:`LinearGamma`. Tensor trapezoid quadrature is used up to
    ``max_tensor_dim`` variables, scrambled Sobol points above that.
    """
    kernels = list(kernels)
    n = len(kernels)
    if n > max_dim:
        raise DimensionLimitError(f"{n} contour variables exceed the limit of {max_dim}")
    x = _positive(x)
    single = x.ndim == 1
    xb = np.atleast_2d(x)
    if xb.shape[1] != n:
        raise ValueError(f"x has {xb.shape[1]} components, expected {n}")
    if contour is None:
        contour = contour_for(kernels, terms, tol, strategy)
    strategy = strategy or contour.strategy
    lnx = np.log(xb)
    if strategy == "tensor":
        if n > max_tensor_dim:
            raise DimensionLimitError(
                f"tensor quadrature limited to {max_tensor_dim} variables, got {n}")
        val, err = _tensor(kernels, terms, lnx, contour, tol, atol, refine, max_points)
    else:
        val, err = _quasi_random(kernels, terms, lnx, contour, tol, atol, refine, max_points)
    if single:
        return HResult(val[0], err[0])
    return HResult(val, err)


def fox_h_multi(params: MultiFoxHParams, x, contour=None, *, tol=MULTIVARIATE_TOL, atol=0.0,
                refine=True, strategy=None, max_tensor_dim=MAX_TENSOR_DIM, max_dim=MAX_DIM):
    """N-variate H-function at the point(s) ``x`` with an error estimate."""
    return mellin_barnes_nd(params.kernels(), params.linear_terms(), x, contour, tol=tol,
                            atol=atol, refine=refine, strategy=strategy,
                            max_tensor_dim=max_tensor_dim, max_dim=max_dim)
