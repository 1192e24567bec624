"""Automatic contour placement, truncation and step selection."""
from __future__ import annotations

import math

import numpy as np
from scipy.optimize import linprog

from ..errors import NoAdmissibleContourError, NonConvergentIntegralError
from .params import ContourSpec, FoxHParams, Kernel, MultiFoxHParams, check_strip

UNIVARIATE_TOL = 1e-8
MULTIVARIATE_TOL = 1e-4
ENVELOPE_FLOOR = 1e-16
MAX_T = 16384.0


def _midpoint(lo: float, hi: float) -> tuple[float, float]:
    """Abscissa and pole margin for the strip (lo, hi)."""
    if math.isinf(lo) and math.isinf(hi):
        return 0.0, 1.0
    if math.isinf(hi):
        return lo + 1.0, 1.0
    if math.isinf(lo):
        return hi - 1.0, 1.0
    c = 0.5 * (lo + hi)
    return c, 0.5 * (hi - lo)


def truncation(fn, c: float, growth: float = 0.0, floor: float = ENVELOPE_FLOOR) -> float:
    """Half-length T beyond which |fn(c+it)| e^{pi/2 growth |t|} stays under floor * peak."""
    tmax = 32.0
    while tmax <= MAX_T:
        tau = np.linspace(0.0, tmax, int(8 * tmax) + 1)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            le = np.log(np.abs(fn(c + 1j * tau))) + 0.5 * math.pi * growth * tau
        le = np.where(np.isnan(le), -np.inf, le)
        peak = le.max()
        if not np.isfinite(peak):
            raise NonConvergentIntegralError("integrand is not finite on the contour")
        above = np.nonzero(le > peak + math.log(floor))[0]
        last = tau[above[-1]]
        if last < 0.5 * tmax:
            return max(last + 0.5, 4.0)
        tmax *= 2
    raise NonConvergentIntegralError(
        f"integrand envelope does not decay along the contour at abscissa {c:g}")


def step_for(margin: float, tol: float) -> float:
    """Trapezoid step whose discretization error is about tol for a pole margin."""
    return min(1.0, 2 * math.pi * margin / math.log(100.0 / tol))


def _centre(kernels, terms):
    """Per-variable abscissae and margins, re-centred when joint numerator poles intrude."""
    strips = [k.strip() for k in kernels]
    for i, (lo, hi) in enumerate(strips):
        check_strip(lo, hi, f"kernel of variable {i + 1}")
    cs, margins = zip(*(_midpoint(lo, hi) for lo, hi in strips))
    cs, margins = np.array(cs), np.array(margins)
    num = [t for t in terms if t.power > 0]
    if not num:
        return cs, margins

    def joint_ok(c):
        return all(t.c0 + np.dot(t.coef, c) > 1e-9 for t in num)

    if not joint_ok(cs):
        # maximize the smallest pole distance subject to strip and joint constraints
        n = len(kernels)
        A, b = [], []
        for i, (lo, hi) in enumerate(strips):
            if math.isfinite(lo):
                row = np.zeros(n + 1); row[i] = -1; row[-1] = 1
                A.append(row); b.append(-lo)
            if math.isfinite(hi):
                row = np.zeros(n + 1); row[i] = 1; row[-1] = 1
                A.append(row); b.append(hi)
        for t in num:
            coef = np.asarray(t.coef)
            row = np.zeros(n + 1); row[:n] = -coef; row[-1] = np.abs(coef).max()
            A.append(row); b.append(t.c0)
        res = linprog(np.r_[np.zeros(n), -1.0], A_ub=np.array(A), b_ub=np.array(b),
                      bounds=[(None, None)] * n + [(None, 1.0)], method="highs")
        if res.status != 0 or res.x[-1] <= 1e-9:
            raise NoAdmissibleContourError("no contour separates the joint and per-variable poles")
        cs = res.x[:n]
    margins = np.array([min(c - lo, hi - c, 1.0) if math.isfinite(lo) or math.isfinite(hi)
                        else 1.0 for c, (lo, hi) in zip(cs, strips)])
    for t in num:
        arg = t.c0 + np.dot(t.coef, cs)
        for i, a in enumerate(t.coef):
            if a != 0:
                margins[i] = min(margins[i], arg / abs(a))
    return cs, margins


def contour_for(kernels, terms=(), tol=None, strategy=None) -> ContourSpec:
    """Contour layout for a product of per-variable kernels and joint gamma terms."""
    kernels = list(kernels)
    n = len(kernels)
    if tol is None:
        tol = UNIVARIATE_TOL if n == 1 else MULTIVARIATE_TOL
    if strategy is None:
        strategy = "tensor" if n <= 3 else "quasi-random"
    cs, margins = _centre(kernels, terms)
    growth = np.zeros(n)
    for t in terms:
        if t.power < 0:
            growth += np.abs(t.coef)
    Ts, nodes = [], []
    for k, c, d, g in zip(kernels, cs, margins, growth):
        T = truncation(k, c, g)
        h = step_for(d, tol)
        Ts.append(T)
        nodes.append(max(17, 2 * math.ceil(T / h) + 1))
    return ContourSpec(tuple(float(c) for c in cs), tuple(Ts), tuple(nodes), strategy,
                       tuple(float(d) for d in margins))


def auto_contour(params, tol=None, strategy=None) -> ContourSpec:
    """Choose abscissa, truncation and node count for ``params``.

    Accepts :class:`FoxHParams`, :class:`MultiFoxHParams` or a
    :class:`Kernel`. The abscissa sits at the midpoint of each variable's
    pole-free strip. Raises :class:`NoAdmissibleContourError` when a strip
    is empty.
    """
    if isinstance(params, FoxHParams):
        return contour_for([params.kernel()], (), tol, strategy)
    if isinstance(params, Kernel):
        return contour_for([params], (), tol, strategy)
    if isinstance(params, MultiFoxHParams):
        return contour_for(params.kernels(), params.linear_terms(), tol, strategy)
    raise TypeError(f"cannot build a contour for {type(params).__name__}")
