"""Statistics of the cascaded RIS channel and the combined SNR.

Element model: Z_i = |h_i| * r_i^{-a/2} * |g_i| * cos(theta_i), the coherent
(in-phase) contribution of one element. Its Mellin moment E[Z_i^s] is the
product of the four factor moments, which gives

* single-element densities as one Mellin-Barnes integral,
* exact sum statistics through the product of element MGFs (an N-fold
  integral with the joint factor 1/Gamma(1+U), U = -sum s_i),
* AM-GM upper bounds through the product Y = prod Z_i (one integral),
* combined SNR statistics with an optional direct link (N+1 variables).

Two evaluation paths exist for element statistics: ``"kernel"`` sums the
mixtures inside the integrand, ``"terms"`` expands them into a series of
univariate H-functions built from gamma pairs.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy import special

from .errors import ConfigError, DimensionLimitError, DomainError, StripError
from .fading import (DGGParams, GenKParams, KappaMuParams, Mobility, PhaseNoiseParams,
                     RWPTopology, StaticDistance, path_gain_moment, path_gain_strip,
                     phase_char)
from .specfun import (FoxHParams, HResult, JointPair, Kernel, LinearGamma, MultiFoxHParams,
                      fox_h, fox_h_multi, mellin_barnes, mellin_barnes_nd)

SPECIAL_CASES = ("full", "rayleigh_mobility", "rayleigh_static")
PHASE_MODELS = ("inphase", "printed")
MAX_EXACT_ELEMENTS = 3
MAX_EXACT_VARIABLES = 4


def _lgamma(z):
    return special.loggamma(np.asarray(z, dtype=complex))


@dataclass(frozen=True)
class ElementConfig:
    """One RIS element: first hop, second hop, receiver mobility, phase error, path exponent."""

    first_hop: KappaMuParams = KappaMuParams(4.0, 2.0)
    second_hop: DGGParams = DGGParams(2.0, 1.0, 2.0, 2.0)
    mobility: Mobility = RWPTopology.one_d()
    phase: PhaseNoiseParams = PhaseNoiseParams(1)
    a: float = 2.0
    special_case: str = "full"

    def __post_init__(self):
        if not 2 <= self.a <= 5:
            raise ConfigError(f"path exponent must lie in [2, 5], got {self.a}", field="a")
        if self.special_case not in SPECIAL_CASES:
            raise ConfigError(f"unknown special case {self.special_case!r}", field="special_case")

    @property
    def rayleigh(self) -> bool:
        return self.special_case != "full"

    @property
    def effective_mobility(self) -> Mobility:
        if self.special_case == "rayleigh_static" and not isinstance(self.mobility, StaticDistance):
            return StaticDistance(self.mobility.dmax / 2)
        return self.mobility


def rayleigh_limit(cfg: ElementConfig, kappa=1e-9, beta2=1e6) -> ElementConfig:
    """Full-model configuration approaching a Rayleigh special case.

    kappa -> 0, mu = 1 on the first hop; alpha1 = 1, beta1 = 2 and a
    degenerate second factor (beta2 -> infinity) on the second hop.
    """
    g = cfg.second_hop
    return ElementConfig(KappaMuParams(kappa, 1.0, cfg.first_hop.K),
                         DGGParams(1.0, 2.0, g.alpha2, beta2, g.msp1, 1.0),
                         cfg.effective_mobility, cfg.phase, cfg.a, "full")


# --------------------------------------------------------------------------- element moments


def _phase_moment(ph: PhaseNoiseParams, s, model):
    if ph.perfect:
        return np.ones_like(s)
    if model == "printed":
        return phase_char(ph.q, s)
    return ph.moment(s)


def _first_hop_moment(cfg, s):
    if cfg.rayleigh:
        return np.exp(_lgamma(1 + s / 2))
    return cfg.first_hop.moment(s)


def _rayleigh_omega(g: DGGParams) -> float:
    return DGGParams._omega(1.0, 2.0, g.msp1)


def _second_hop_moment(cfg, s):
    if cfg.rayleigh:
        return np.exp(_lgamma(2 + s) + s * math.log(_rayleigh_omega(cfg.second_hop)))
    return cfg.second_hop.moment(s)


def element_moment(cfg: ElementConfig, s, phase_model: str = "inphase"):
    """E[Z_i^s] for complex ``s`` inside :func:`element_strip`."""
    s = np.asarray(s, dtype=complex)
    return (_first_hop_moment(cfg, s) * _second_hop_moment(cfg, s)
            * path_gain_moment(cfg.effective_mobility, cfg.a, s) * _phase_moment(cfg.phase, s, phase_model))


def element_strip(cfg: ElementConfig, phase_model: str = "inphase") -> tuple[float, float]:
    """Open interval of real orders where E[Z_i^s] is finite."""
    if cfg.rayleigh:
        lo = -2.0
    else:
        lo = max(cfg.first_hop.moment_strip()[0], cfg.second_hop.moment_strip()[0])
    plo, phi = path_gain_strip(cfg.effective_mobility, cfg.a)
    lo = max(lo, plo)
    if not cfg.phase.perfect and phase_model == "inphase":
        lo = max(lo, cfg.phase.moment_strip()[0])
    return lo, phi


def element_kernel(cfg: ElementConfig, phase_model: str = "inphase") -> Kernel:
    lo, hi = element_strip(cfg, phase_model)
    return Kernel(lambda s: element_moment(cfg, s, phase_model), lo, hi)


# --------------------------------------------------------------------------- gamma-pair form


@dataclass
class PairSet:
    """Gamma pairs of one H-function term, grouped by role.

    num_lower: Gamma(b + B s); den_lower: 1/Gamma(1 - b - B s);
    num_upper: Gamma(1 - a - A s); den_upper: 1/Gamma(a + A s).
    """

    num_lower: list = field(default_factory=list)
    den_lower: list = field(default_factory=list)
    num_upper: list = field(default_factory=list)
    den_upper: list = field(default_factory=list)

    def __add__(self, other: "PairSet") -> "PairSet":
        return PairSet(self.num_lower + other.num_lower, self.den_lower + other.den_lower,
                       self.num_upper + other.num_upper, self.den_upper + other.den_upper)

    def scaled(self, c: float) -> "PairSet":
        """Pairs of Theta(c s)."""
        f = lambda ps: [(a, A * c) for a, A in ps]  # noqa: E731
        return PairSet(f(self.num_lower), f(self.den_lower), f(self.num_upper), f(self.den_upper))

    def fox(self) -> FoxHParams:
        return FoxHParams(len(self.num_lower), len(self.num_upper),
                          self.num_upper + self.den_upper, self.num_lower + self.den_lower)


@dataclass(frozen=True)
class MomentTerm:
    """E-contribution coef * Theta(s) * scale^{-s} of one series term."""

    coef: float
    pairs: PairSet
    scale: float


def _first_hop_terms(cfg):
    if cfg.rayleigh:
        return [(1.0, PairSet([(1.0, 0.5)]), 1.0)]
    h = cfg.first_hop
    w = h.weights()
    return [(math.exp(math.log(wk) - special.gammaln(h.mu + k)), PairSet([(h.mu + k, 0.5)]),
             math.sqrt(h.zeta1)) for k, wk in enumerate(w) if wk > 0]


def _second_hop_terms(cfg):
    g = cfg.second_hop
    if cfg.rayleigh:
        return [(1.0, PairSet([(2.0, 1.0)]), 1.0 / _rayleigh_omega(g))]
    coef = math.exp(-special.gammaln(g.beta1) - special.gammaln(g.beta2))
    return [(coef, PairSet([(g.beta2, 1 / g.alpha2), (g.beta1, 1 / g.alpha1)]),
             g.phi ** (1 / g.alpha2))]


def _mobility_terms(mob: Mobility, a: float):
    if isinstance(mob, StaticDistance):
        return [(1.0, PairSet(), mob.distance ** (a / 2))]
    return [(float(B), PairSet(den_lower=[(-1.0 - bt, a / 2)], num_upper=[(-float(bt), a / 2)]),
             mob.dmax ** (a / 2)) for B, bt in zip(mob.B, mob.beta)]


def _phase_terms(ph: PhaseNoiseParams, model: str):
    if ph.perfect:
        return [(1.0, PairSet(), 1.0)]
    if model == "printed":
        return [(1.0, PairSet(den_lower=[(0.0, ph.q)], den_upper=[(1.0, ph.q)]), 1.0)]
    if ph.q == 0.5:
        return [(1 / math.sqrt(math.pi), PairSet([(0.5, 0.5)], den_upper=[(1.0, 0.5)]), 1.0)]
    raise ValueError(f"phase level L={ph.L} has no gamma-pair form; use method='kernel'")


def element_terms(cfg: ElementConfig, phase_model: str = "inphase") -> list:
    """Series terms with E[Z_i^s] = sum coef * Theta(s) * scale^{-s}."""
    out = []
    for parts in itertools.product(_first_hop_terms(cfg), _second_hop_terms(cfg),
                                   _mobility_terms(cfg.effective_mobility, cfg.a),
                                   _phase_terms(cfg.phase, phase_model)):
        coef = math.prod(p[0] for p in parts)
        pairs = parts[0][1] + parts[1][1] + parts[2][1] + parts[3][1]
        scale = math.prod(p[2] for p in parts)
        out.append(MomentTerm(coef, pairs, scale))
    return out


@dataclass(frozen=True)
class CascadeCoefficients:
    """Precomputed series coefficients of one element.

    ``psi[k, j]`` multiplies x^{-1} H[zeta x] for mixture index k and
    mobility index j, with zeta = sqrt(zeta1) * zeta2 and
    zeta2 = phi^{1/alpha2} * d2^{a/2}. ``V`` holds the matching H-function
    parameter blocks and ``psi_d`` the direct-link coefficients.
    """

    psi: np.ndarray
    zeta1: float
    zeta2: float
    V: tuple
    psi_d: Optional[np.ndarray] = None

    @staticmethod
    @lru_cache(maxsize=256)
    def build(cfg: ElementConfig, direct: Optional[GenKParams] = None,
              direct_mobility: Optional[Mobility] = None) -> "CascadeCoefficients":
        terms = element_terms(cfg, "inphase") if (cfg.phase.perfect or cfg.phase.q == 0.5) else \
            element_terms(replace(cfg, phase=PhaseNoiseParams(None)))
        nk = len(_first_hop_terms(cfg))
        psi = np.array([t.coef for t in terms]).reshape(nk, -1)
        zeta1 = 1.0 if cfg.rayleigh else cfg.first_hop.zeta1
        sh = _second_hop_terms(cfg)[0][2]
        zeta2 = sh * _mobility_terms(cfg.effective_mobility, cfg.a)[0][2]
        psi_d = None
        if direct is not None:
            mob = direct_mobility or StaticDistance(1.0)
            base = math.exp(-special.gammaln(direct.m) - special.gammaln(direct.M))
            psi_d = np.array([base * c for c, _, _ in _mobility_terms(mob, cfg.a)])
        return CascadeCoefficients(psi, zeta1, zeta2, tuple(t.pairs.fox() for t in terms), psi_d)


# --------------------------------------------------------------------------- element statistics


def _check_x(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("statistics are evaluated at x > 0")
    return x


def mobility_link_pdf(p: DGGParams, t: Mobility, a: float, x, tol=1e-8):
    """Density of |g| * r^{-a/2}: the dGG amplitude averaged over the receiver distance.

    ``a = 0`` disables the path gain and returns the plain dGG density.
    """
    x = _check_x(x)
    if a == 0:
        lo, hi = p.moment_strip()
    else:
        lo = p.moment_strip()[0]
        hi = path_gain_strip(t, a)[1]
    k = Kernel(lambda s: p.moment(s) * (path_gain_moment(t, a, s) if a else 1.0), lo, hi)
    r = mellin_barnes(k, x, tol=tol, atol=1e-300)
    return r.value / x


def zi_pdf(cfg: ElementConfig, x, method: str = "kernel", phase_model: str = "inphase", tol=1e-8):
    """Density of one element's effective channel Z_i."""
    x = _check_x(x)
    if method == "kernel":
        r = mellin_barnes(element_kernel(cfg, phase_model), x, tol=tol, atol=1e-300)
        return r.value / x
    if method == "terms":
        out = np.zeros_like(x)
        for t in element_terms(cfg, phase_model):
            out += t.coef * fox_h(t.pairs.fox(), t.scale * x, tol=tol, atol=1e-300).value
        return out / x
    raise ValueError(f"unknown method {method!r}")


def zi_cdf(cfg: ElementConfig, x, method: str = "kernel", phase_model: str = "inphase", tol=1e-8):
    """Distribution function of Z_i."""
    x = _check_x(x)
    if method == "kernel":
        lo, _ = element_strip(cfg, phase_model)
        k = Kernel(lambda s: -element_moment(cfg, s, phase_model) / s, lo, 0.0)
        return mellin_barnes(k, x, tol=tol, atol=1e-14).value
    if method == "terms":
        out = np.zeros_like(x)
        for t in element_terms(cfg, phase_model):
            ps = t.pairs + PairSet(den_lower=[(0.0, 1.0)], num_upper=[(1.0, 1.0)])
            out += t.coef * fox_h(ps.fox(), t.scale * x, tol=tol, atol=1e-14).value
        return out
    raise ValueError(f"unknown method {method!r}")


def zi_moment(cfg: ElementConfig, r: float, phase_model: str = "inphase") -> float:
    """Closed-form moment E[Z_i^r]; raises :class:`StripError` outside the convergence strip."""
    lo, hi = element_strip(cfg, phase_model)
    if not lo < r < hi:
        raise StripError(f"moment order {r} outside the convergence strip ({lo:g}, {hi:g})")
    return float(np.real(element_moment(cfg, np.array(r, dtype=complex), phase_model)))


# --------------------------------------------------------------------------- sums


def _sum_layout(cfgs, which, phase_model):
    kernels = []
    for c in cfgs:
        lo, _ = element_strip(c, phase_model)
        kernels.append(Kernel(lambda s, c=c: np.exp(_lgamma(-s)) * element_moment(c, s, phase_model), lo, 0.0))
    n = len(cfgs)
    shift = 1.0 if which == "cdf" else 0.0
    terms = [LinearGamma(shift, (-1.0,) * n, -1)]
    return kernels, terms


def _which(which):
    if which not in ("pdf", "cdf"):
        raise ValueError(f"which must be 'pdf' or 'cdf', got {which!r}")
    return which


def zris_exact(cfgs: Sequence[ElementConfig], x, which: str = "cdf", method: str = "kernel",
               phase_model: str = "inphase", tol=1e-4, max_elements=MAX_EXACT_ELEMENTS,
               with_error=False):
    """Exact pdf or CDF of Z_RIS = sum_i Z_i.

    Evaluated as an N-fold Mellin-Barnes integral of the product of element
    MGFs. ``method="terms"`` expands each element's mixtures and sums
    multivariate H-functions (practical for the Rayleigh special cases).
    """
    _which(which)
    cfgs = list(cfgs)
    n = len(cfgs)
    if n > max_elements:
        raise DimensionLimitError(f"exact sum statistics limited to {max_elements} elements, got {n}")
    x = _check_x(x)
    xs = x.ravel()
    if method == "kernel":
        kernels, terms = _sum_layout(cfgs, which, phase_model)
        r = mellin_barnes_nd(kernels, terms, np.repeat(xs[:, None], n, axis=1), tol=tol, atol=1e-12)
        val, err = r.value, r.error
    elif method == "terms":
        val = np.zeros_like(xs)
        err = np.zeros_like(xs)
        per = [element_terms(c, phase_model) for c in cfgs]
        shift = 0.0 if which == "cdf" else 1.0
        for combo in itertools.product(*per):
            blocks = [(t.pairs + PairSet(num_upper=[(1.0, 1.0)])).fox() for t in combo]
            mp = MultiFoxHParams(blocks, joint_lower=[JointPair(shift, (1.0,) * n)])
            pts = np.array([[t.scale * v for t in combo] for v in xs])
            r = fox_h_multi(mp, pts, tol=tol, atol=1e-12)
            c = math.prod(t.coef for t in combo)
            val += c * np.atleast_1d(r.value)
            err += abs(c) * np.atleast_1d(r.error)
    else:
        raise ValueError(f"unknown method {method!r}")
    if which == "pdf":
        val, err = val / xs, err / xs
    val, err = val.reshape(x.shape), err.reshape(x.shape)
    return HResult(val, err) if with_error else val


def product_kernel(cfgs, phase_model="inphase") -> Kernel:
    """Mellin moment of Y = prod_i Z_i."""
    lo = max(element_strip(c, phase_model)[0] for c in cfgs)
    hi = min(element_strip(c, phase_model)[1] for c in cfgs)

    def m(s):
        out = np.ones_like(s)
        for c in cfgs:
            out = out * element_moment(c, s, phase_model)
        return out

    return Kernel(m, lo, hi)


def zris_bound(cfgs: Sequence[ElementConfig], x, which: str = "cdf", method: str = "kernel",
               phase_model: str = "inphase", tol=1e-8):
    """AM-GM upper bound: F_Z(x) <= F_Y((x/N)^N) with Y = prod Z_i; the pdf is its derivative."""
    _which(which)
    cfgs = list(cfgs)
    n = len(cfgs)
    x = _check_x(x)
    y = (x / n) ** n
    if method == "kernel":
        pk = product_kernel(cfgs, phase_model)
        if which == "cdf":
            k = Kernel(lambda s: -pk(s) / s, pk.lo, 0.0)
            return mellin_barnes(k, y, tol=tol, atol=1e-14).value
        fy = mellin_barnes(pk, y, tol=tol, atol=1e-300).value / y
    elif method == "terms":
        acc = np.zeros_like(y)
        for combo in itertools.product(*[element_terms(c, phase_model) for c in cfgs]):
            ps = PairSet()
            for t in combo:
                ps = ps + t.pairs
            if which == "cdf":
                ps = ps + PairSet(den_lower=[(0.0, 1.0)], num_upper=[(1.0, 1.0)])
            scale = math.prod(t.scale for t in combo)
            c = math.prod(t.coef for t in combo)
            acc += c * fox_h(ps.fox(), scale * y, tol=tol, atol=1e-300).value
        if which == "cdf":
            return acc
        fy = acc / y
    else:
        raise ValueError(f"unknown method {method!r}")
    return (x / n) ** (n - 1) * fy


# --------------------------------------------------------------------------- SNR


@dataclass(frozen=True)
class SNRConfig:
    """Average SNRs and direct-link description.

    gamma_RISD = gbar_ris * Z_RIS^2 + omega * gbar_d * Z_d^2 with
    Z_d = h_ld * r^{-a/2} |h_d|, r distributed per ``direct_mobility`` over
    [0, d] and ``h_ld`` the free-space amplitude constant of the direct path.
    """

    gbar_ris: float
    gbar_d: float = 0.0
    omega: int = 0
    N: int = 1
    direct_fading: Optional[GenKParams] = None
    direct_mobility: Optional[Mobility] = None
    a: float = 2.0
    h_ld: float = 1.0

    def __post_init__(self):
        if not self.gbar_ris > 0:
            raise ConfigError("gbar_ris must be > 0", field="gbar_ris")
        if self.omega not in (0, 1):
            raise ConfigError("omega must be 0 or 1", field="omega")
        if self.omega == 1:
            if not self.gbar_d > 0:
                raise ConfigError("gbar_d must be > 0 with a direct link", field="gbar_d")
            if self.direct_fading is None:
                raise ConfigError("direct link needs generalized-K parameters", field="direct")
        if self.N < 1:
            raise ConfigError("N must be >= 1", field="N")

    @property
    def mobility_d(self) -> Mobility:
        return self.direct_mobility or StaticDistance(1.0)

    def scaled(self, factor: float) -> "SNRConfig":
        return replace(self, gbar_ris=self.gbar_ris * factor, gbar_d=self.gbar_d * factor)


def snr_transform(s: SNRConfig, gamma, which: str, source):
    """SNR statistics of gbar * Z^2 from statistics of Z.

    ``source(x, which)`` returns the pdf or CDF of Z.
    """
    _which(which)
    gamma = _check_x(gamma)
    z = np.sqrt(gamma / s.gbar_ris)
    if which == "cdf":
        return source(z, "cdf")
    return source(z, "pdf") / (2 * np.sqrt(s.gbar_ris * gamma))


def direct_moment(dl: GenKParams, t: Mobility, a: float, gbar_d: float, s):
    """E[gamma_d^s] for gamma_d = gbar_d * (r^{-a/2} |h_d|)^2."""
    s = np.asarray(s, dtype=complex)
    return np.exp(s * math.log(gbar_d)) * dl.moment(2 * s) * path_gain_moment(t, a, 2 * s)


def direct_strip(dl: GenKParams, t: Mobility, a: float):
    lo = dl.moment_strip()[0] / 2
    hi = path_gain_strip(t, a)[1] / 2
    return lo, hi


def direct_snr_pdf(dl: GenKParams, t: Mobility, a: float, gbar_d: float, gamma,
                   method: str = "kernel", tol=1e-8):
    """Density of the direct-link SNR including receiver mobility."""
    gamma = _check_x(gamma)
    if method == "kernel":
        lo, hi = direct_strip(dl, t, a)
        k = Kernel(lambda s: direct_moment(dl, t, a, gbar_d, s), lo, hi)
        return mellin_barnes(k, gamma, tol=tol, atol=1e-300).value / gamma
    if method == "terms":
        # E[gamma_d^s] = sum_j B_j/(Gamma(m)Gamma(M)) Gamma(m+s)Gamma(M+s)/(1+beta_j-a s) C^{-s}
        base = math.exp(-special.gammaln(dl.m) - special.gammaln(dl.M))
        out = np.zeros_like(gamma)
        for B, mob_pairs, sc in _mobility_terms(t, a):
            ps = PairSet([(dl.m, 1.0), (dl.M, 1.0)]) + mob_pairs.scaled(2.0)
            C = (dl.b / 2) ** 2 * sc ** 2 / gbar_d
            out += B * base * fox_h(ps.fox(), C * gamma, tol=tol, atol=1e-300).value
        return out / gamma
    raise ValueError(f"unknown method {method!r}")


def direct_snr_cdf(dl: GenKParams, t: Mobility, a: float, gbar_d: float, gamma, tol=1e-8):
    gamma = _check_x(gamma)
    lo, _ = direct_strip(dl, t, a)
    k = Kernel(lambda s: -direct_moment(dl, t, a, gbar_d, s) / s, lo, 0.0)
    return mellin_barnes(k, gamma, tol=tol, atol=1e-14).value


def _direct_kernel(s: SNRConfig):
    lo, _ = direct_strip(s.direct_fading, s.mobility_d, s.a)
    gd = s.gbar_d * s.h_ld ** 2
    return Kernel(lambda v: np.exp(_lgamma(-v)) * direct_moment(s.direct_fading, s.mobility_d, s.a, gd, v),
                  lo, 0.0)


def _laplace_kernel(cfg, phase_model):
    lo, _ = element_strip(cfg, phase_model)
    return Kernel(lambda v: np.exp(_lgamma(-v)) * element_moment(cfg, v, phase_model), lo, 0.0)


def _gamma_lb_kernel(s: SNRConfig, cfgs, phase_model):
    """Laplace-ready kernel of gbar N^2 Y^{2/N}, the AM-GM lower bound of gamma_RIS."""
    n = len(cfgs)
    pk = product_kernel(cfgs, phase_model)
    scale = math.log(s.gbar_ris * n * n)
    lo = pk.lo * n / 2
    return Kernel(lambda v: np.exp(_lgamma(-v) + v * scale) * pk(2 * v / n), lo, 0.0)


@dataclass(frozen=True)
class SNRLayout:
    """An SNR statistic as const * MB[kernels, terms](x) with x_i = scales_i * gamma^exps_i.

    pdf layouts carry an extra 1/gamma.
    """

    kernels: tuple
    terms: tuple
    scales: tuple
    exps: tuple
    const: float
    which: str

    def points(self, gamma):
        g = np.asarray(gamma, dtype=float).reshape(-1, 1)
        return np.asarray(self.scales) * g ** np.asarray(self.exps)

    def integrate(self, pts, extra=(), tol=1e-4):
        """Evaluate const * MB at explicit points with optional extra joint terms."""
        terms = list(self.terms) + list(extra)
        if len(self.kernels) == 1 and not terms:
            r = mellin_barnes(self.kernels[0], pts[:, 0], tol=min(tol, 1e-8), atol=1e-300)
        elif len(self.kernels) == 1:
            t0 = terms
            k0 = self.kernels[0]

            def f(v):
                out = k0(v)
                for t in t0:
                    out = out * np.exp(t.power * _lgamma(t.c0 + t.coef[0] * v))
                return out

            r = mellin_barnes(Kernel(f, k0.lo, k0.hi), pts[:, 0], tol=min(tol, 1e-8), atol=1e-300)
        else:
            r = mellin_barnes_nd(self.kernels, terms, pts, tol=tol, atol=1e-12)
        return HResult(self.const * np.asarray(r.value), self.const * np.asarray(r.error))

    def evaluate(self, gamma, tol=1e-4) -> HResult:
        g = np.asarray(gamma, dtype=float).ravel()
        r = self.integrate(self.points(g), tol=tol)
        if self.which == "pdf":
            return HResult(r.value / g, r.error / g)
        return r


def snr_layout(s: SNRConfig, cfgs: Sequence[ElementConfig], which: str = "cdf",
               method: str = "exact", phase_model: str = "inphase",
               max_variables=MAX_EXACT_VARIABLES, enforce_limits: bool = True) -> SNRLayout:
    """Mellin-Barnes layout of the combined-SNR pdf or CDF.

    ``enforce_limits=False`` skips the dimension checks; useful when the
    layout is only evaluated through residues, never integrated.
    """
    _which(which)
    cfgs = list(cfgs)
    n = len(cfgs)
    pdf = which == "pdf"
    if method not in ("exact", "bound"):
        raise ValueError(f"unknown method {method!r}")
    if s.omega == 0 and method == "exact":
        if enforce_limits and n > min(max_variables, MAX_EXACT_ELEMENTS):
            raise DimensionLimitError(
                f"exact sum statistics limited to {min(max_variables, MAX_EXACT_ELEMENTS)} elements, got {n}")
        kernels = [_laplace_kernel(c, phase_model) for c in cfgs]
        terms = [LinearGamma(0.0 if pdf else 1.0, (-1.0,) * n, -1)]
        return SNRLayout(tuple(kernels), tuple(terms), (s.gbar_ris ** -0.5,) * n, (0.5,) * n,
                         0.5 if pdf else 1.0, which)
    if s.omega == 0:
        pk = product_kernel(cfgs, phase_model)
        k = pk if pdf else Kernel(lambda v: -pk(v) / v, pk.lo, 0.0)
        return SNRLayout((k,), (), (s.gbar_ris ** (-n / 2) * float(n) ** -n,), (n / 2,),
                         n / 2 if pdf else 1.0, which)
    dk = _direct_kernel(s)
    if method == "exact":
        if enforce_limits and n + 1 > max_variables:
            raise DimensionLimitError(
                f"exact combined SNR limited to {max_variables} variables, got {n + 1}")
        kernels = [_laplace_kernel(c, phase_model) for c in cfgs] + [dk]
        half = (-0.5,) * n
        terms = [LinearGamma(0.0, half + (0.0,), 1),
                 LinearGamma(0.0, (-1.0,) * n + (0.0,), -1),
                 LinearGamma(0.0 if pdf else 1.0, half + (-1.0,), -1)]
        return SNRLayout(tuple(kernels), tuple(terms), (s.gbar_ris ** -0.5,) * n + (1.0,),
                         (0.5,) * n + (1.0,), 0.5, which)
    lk = _gamma_lb_kernel(s, cfgs, phase_model)
    terms = [LinearGamma(0.0 if pdf else 1.0, (-1.0, -1.0), -1)]
    return SNRLayout((lk, dk), tuple(terms), (1.0, 1.0), (1.0, 1.0), 1.0, which)


def direct_layout(s: SNRConfig, which: str = "cdf") -> SNRLayout:
    """Layout of the direct-link SNR alone (the direct-transmission baseline)."""
    _which(which)
    if s.direct_fading is None:
        raise ConfigError("direct link needs generalized-K parameters", field="direct")
    lo, _ = direct_strip(s.direct_fading, s.mobility_d, s.a)
    gd = s.gbar_d * s.h_ld ** 2
    m = lambda v: direct_moment(s.direct_fading, s.mobility_d, s.a, gd, v)  # noqa: E731
    k = Kernel(m, lo, 0.0) if which == "pdf" else Kernel(lambda v: -m(v) / v, lo, 0.0)
    return SNRLayout((k,), (), (1.0,), (1.0,), 1.0, which)


def risd_snr(s: SNRConfig, cfgs: Sequence[ElementConfig], gamma, which: str = "cdf",
             method: str = "exact", phase_model: str = "inphase", tol=1e-4,
             max_variables=MAX_EXACT_VARIABLES, with_error=False):
    """pdf or CDF of the combined SNR gbar_ris Z_RIS^2 + omega gbar_d Z_d^2.

    ``method="exact"`` integrates over N (+1) variables; ``"bound"`` uses the
    AM-GM bound (one variable, or two with the direct link) and upper-bounds
    the CDF.
    """
    gamma = _check_x(gamma)
    lay = snr_layout(s, cfgs, which, method, phase_model, max_variables)
    r = lay.evaluate(gamma, tol=tol)
    out = HResult(r.value.reshape(gamma.shape), r.error.reshape(gamma.shape))
    return out if with_error else out.value
