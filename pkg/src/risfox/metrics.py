"""Outage probability, diversity order and average bit-error rate."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import special

from .cascade import (ElementConfig, SNRConfig, SNRLayout, risd_snr, snr_layout)
from .errors import QuadratureError
from .fading import GenKParams, PhaseNoiseParams
from .specfun import HResult, LinearGamma


@dataclass(frozen=True)
class Modulation:
    """Binary modulation with conditional error probability Gamma(p, q g)/(2 Gamma(p))."""

    p: float
    q: float
    name: str = "custom"

    def __post_init__(self):
        if not (self.p > 0 and self.q > 0):
            raise ValueError("modulation parameters p and q must be > 0")

    def bep(self, gamma):
        """Conditional bit-error probability at instantaneous SNR ``gamma``."""
        return 0.5 * special.gammaincc(self.p, self.q * np.asarray(gamma, dtype=float))


BPSK = Modulation(0.5, 1.0, "BPSK")
DBPSK = Modulation(1.0, 1.0, "DBPSK")
MODULATIONS = {"bpsk": BPSK, "dbpsk": DBPSK}


# --------------------------------------------------------------------------- diversity


def element_exponent(cfg: ElementConfig) -> float:
    """Small-value exponent p_i of one element amplitude: P(Z_i < x) ~ x^{p_i}."""
    if cfg.rayleigh:
        return 2.0
    h, g = cfg.first_hop, cfg.second_hop
    return min(g.alpha1 * g.beta1, g.alpha2 * g.beta2, 2 * h.mu)


def direct_exponent(dl: GenKParams) -> float:
    return min(2 * dl.m, 2 * dl.M)


@dataclass(frozen=True)
class AsymptoticExponents:
    p: tuple
    p_direct: Optional[float] = None

    @classmethod
    def of(cls, cfgs: Sequence[ElementConfig], direct: Optional[GenKParams] = None):
        return cls(tuple(element_exponent(c) for c in cfgs),
                   None if direct is None else direct_exponent(direct))

    @property
    def G_out(self) -> float:
        return (sum(self.p) + (self.p_direct or 0.0)) / 2


def diversity_order(cfgs: Sequence[ElementConfig], direct: Optional[GenKParams] = None) -> float:
    """G_out = sum_i p_i / 2 over the elements and, when given, the direct link."""
    return AsymptoticExponents.of(cfgs, direct).G_out


# --------------------------------------------------------------------------- outage


def _pole_candidates(cfg: ElementConfig, depth=4):
    out = []
    if cfg.rayleigh:
        out += [-2.0 - 2 * j for j in range(depth)] + [-2.0 - j for j in range(depth)]
        return out
    h, g = cfg.first_hop, cfg.second_hop
    for j in range(depth):
        out += [-2 * (h.mu + j), -g.alpha1 * (g.beta1 + j), -g.alpha2 * (g.beta2 + j)]
    return out


def _residue(f: Callable, s0: float, poles, nodes=64):
    """(1/2 pi i) times the contour integral of ``f`` around ``s0`` (vectorized over the last axis)."""
    gaps = [abs(p - s0) for p in poles if abs(p - s0) > 1e-9] + [abs(s0)]
    rho = min(0.25, 0.5 * min(gaps))
    th = 2 * np.pi * np.arange(nodes) / nodes
    s = s0 + rho * np.exp(1j * th)
    vals = f(s)
    return np.real(np.mean(vals * (s - s0), axis=-1))


def asymptotic_outage(s: SNRConfig, cfgs: Sequence[ElementConfig], gamma_th,
                      method: str = "exact") -> np.ndarray:
    """Leading high-SNR term of the outage probability.

    Each contour variable is moved past its dominant pole (all tied poles at
    once, so logarithmic factors from coincident exponents are kept); joint
    gamma factors are evaluated at the dominant pole point. Residual phase
    errors are left out: the exponents carry no phase dependence.
    """
    cfgs = [replace(c, phase=PhaseNoiseParams(None)) for c in cfgs]
    g = np.atleast_1d(np.asarray(gamma_th, dtype=float))
    lay = snr_layout(s, cfgs, "cdf", method, enforce_limits=False)
    pts = lay.points(g)
    n = len(cfgs)
    if s.omega == 0 and method == "bound":
        p0 = -min(element_exponent(c) for c in cfgs)
        poles = sorted(set(p for c in cfgs for p in _pole_candidates(c)))
        k = lay.kernels[0]
        res = _residue(lambda v: k(v)[None, :] * np.exp(-np.log(pts[:, :1]) * v[None, :]), p0, poles)
        return lay.const * res
    if s.omega == 1 and method == "bound":
        p_lb = -sum(element_exponent(c) for c in cfgs) / 2
        poles_lb = sorted(set(p * n / 2 for c in cfgs for p in _pole_candidates(c)))
        stars = [p_lb, -min(s.direct_fading.m, s.direct_fading.M)]
        pole_sets = [poles_lb, _direct_poles(s.direct_fading)]
    else:
        stars = [-element_exponent(c) for c in cfgs]
        pole_sets = [_pole_candidates(c) for c in cfgs]
        if s.omega == 1:
            stars.append(-min(s.direct_fading.m, s.direct_fading.M))
            pole_sets.append(_direct_poles(s.direct_fading))
    out = np.full(len(g), lay.const)
    for i, (k, st, ps) in enumerate(zip(lay.kernels, stars, pole_sets)):
        lx = np.log(pts[:, i:i + 1])
        out = out * _residue(lambda v, k=k, lx=lx: k(v)[None, :] * np.exp(-lx * v[None, :]), st, ps)
    sv = np.array(stars)
    for t in lay.terms:
        out = out * float(np.real(np.exp(t.power * special.loggamma(t.c0 + np.dot(t.coef, sv)))))
    return out


def _direct_poles(dl: GenKParams, depth=4):
    return [-(dl.m + j) for j in range(depth)] + [-(dl.M + j) for j in range(depth)]


def outage(s: SNRConfig, cfgs: Sequence[ElementConfig], gamma_th, method: str = "exact",
           tol=1e-4, with_error=False):
    """Outage probability P(gamma <= gamma_th): ``exact``, ``bound`` or ``asymptotic``."""
    if method == "asymptotic":
        val = asymptotic_outage(s, cfgs, gamma_th)
        val = val.reshape(np.shape(gamma_th))
        return HResult(val, np.zeros_like(val)) if with_error else val
    return risd_snr(s, cfgs, gamma_th, "cdf", method, tol=tol, with_error=with_error)


# --------------------------------------------------------------------------- BER


def layout_ber(lay: SNRLayout, mod: Modulation = BPSK, tol=1e-3) -> HResult:
    """Average BER of any CDF layout: one extra joint factor Gamma(p - sum_i e_i s_i)."""
    if lay.which != "cdf":
        raise ValueError("BER needs a CDF layout")
    extra = [LinearGamma(mod.p, tuple(-e for e in lay.exps), 1)]
    pts = (np.asarray(lay.scales) * mod.q ** -np.asarray(lay.exps))[None, :]
    r = lay.integrate(pts, extra, tol=tol)
    c = 0.5 / math.gamma(mod.p)
    return HResult(float(c * np.ravel(r.value)[0]), float(c * np.ravel(r.error)[0]))


def ber(s: SNRConfig, cfgs: Sequence[ElementConfig], mod: Modulation = BPSK,
        method: str = "exact", tol=1e-3, with_error=False):
    """Average BER in closed form.

    The average of the CDF against the modulation kernel adds one joint factor
    Gamma(p - sum_i e_i s_i) to the CDF layout, where x_i = c_i gamma^{e_i}.
    ``tol`` drives node doubling; its squared-difference error estimate is
    conservative, so realized errors are typically far smaller.
    """
    out = layout_ber(snr_layout(s, cfgs, "cdf", method), mod, tol)
    return out if with_error else out.value


def ber_numeric(cdf: Callable, mod: Modulation = BPSK, atol=1e-8, max_nodes=4096) -> float:
    """Average BER (q^p/(2 Gamma(p))) int gamma^{p-1} e^{-q gamma} F(gamma) dgamma by quadrature.

    Uses u = q gamma, then t = ln u on unit panels, with Gauss-Legendre node
    doubling per panel until successive sums agree to ``atol``. ``cdf`` must
    accept arrays.
    """
    p, q = mod.p, mod.q
    t_lo = math.log(atol * 1e-2 * p) / p
    t_hi = math.log(60.0 + p)
    edges = np.arange(math.floor(t_lo), math.ceil(t_hi) + 1, 1.0)
    a, b = edges[:-1], edges[1:]

    def panel_sums(n):
        x, w = np.polynomial.legendre.leggauss(n)
        t = (a[:, None] + b[:, None]) / 2 + (b - a)[:, None] / 2 * x[None, :]
        u = np.exp(t)
        f = np.asarray(cdf(u.ravel() / q), dtype=float).reshape(u.shape)
        g = np.exp(p * t - u) * f
        return (g * w).sum(axis=1) * (b - a) / 2

    n = 16
    prev = panel_sums(n)
    while True:
        n *= 2
        cur = panel_sums(n)
        if np.abs(cur - prev).sum() <= atol * 2 * math.gamma(p):
            return float(cur.sum() / (2 * math.gamma(p)))
        if n >= max_nodes:
            raise QuadratureError(f"BER quadrature did not settle: change {np.abs(cur - prev).sum():.3g}")
        prev = cur
