"""Monte Carlo oracle for the RIS link with optional direct path.

Each trial draws, per element, |h| (kappa-mu), |g| (dGG), the receiver
distance r (mobility) and the residual phase theta, and forms the RIS
amplitude from A_i = |h_i| r_i^{-a/2} |g_i| as either the magnitude
|sum A_i e^{j theta_i}| or the in-phase projection sum A_i cos(theta_i).
The direct amplitude is Z_d = (c/(4 pi f_c)) r_d^{-a/2} |h_d| and the combined SNR is
gbar_ris Z_RIS^2 + omega gbar_d Z_d^2.

Streams are Philox generators keyed by (seed, stream index); trials are
split across streams in a fixed way, so results do not depend on the
number of worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .cascade import ElementConfig, SNRConfig
from .errors import ConfigError
from .fading import (DGGParams, GenKParams, KappaMuParams, Mobility, PhaseNoiseParams,
                     RWPTopology, StaticDistance, sample)
from .metrics import Modulation

SPEED_OF_LIGHT = 299_792_458.0
PROJECTIONS = ("magnitude", "inphase")
TOPOLOGIES = ("1d", "2d", "3d", "static")


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def dbm_to_watt(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


@dataclass(frozen=True)
class ScenarioConfig:
    """Physical scenario: geometry, budget, fading, phase errors, mobility, direct link.

    Powers are in dBm, gains in dBi, distances in meters, frequency in Hz.
    ``phase_L=None`` means perfect phase compensation; topology ``"static"``
    fixes the receiver at d2/2.
    """

    N: int = 1
    d1: float = 50.0
    d2: float = 100.0
    a: float = 2.0
    f_c: float = 6e9
    P_t: float = 30.0
    noise: float = -74.0
    G_T: float = 10.0
    G_R: float = 10.0
    omega: int = 0
    kappa: float = 4.0
    mu: float = 2.0
    K: int = 60
    dgg: DGGParams = DGGParams(2.0, 1.0, 2.0, 2.0)
    phase_L: Optional[int] = 1
    topology: str = "1d"
    special_case: str = "full"
    direct: GenKParams = GenKParams(1.0, 2.5454)
    direct_topology: Optional[str] = None
    gamma_th_db: float = 0.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ConfigError(f"N must be a positive integer, got {self.N}", field="ris.n")
        for name, key in (("d1", "geometry.d1"), ("d2", "geometry.d2"), ("f_c", "carrier.fc")):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0", field=key)
        if not 2 <= self.a <= 5:
            raise ConfigError(f"path exponent must lie in [2, 5], got {self.a}", field="pathloss.a")
        if self.omega not in (0, 1):
            raise ConfigError("omega must be 0 or 1", field="direct.enabled")
        for t, key in ((self.topology, "mobility.topology"), (self.direct_topology, "direct.topology")):
            if t is not None and t not in TOPOLOGIES:
                raise ConfigError(f"unknown topology {t!r}", field=key)
        # validates the remaining element fields
        self.element()

    @property
    def d(self) -> float:
        return math.hypot(self.d1, self.d2)

    @property
    def gamma_th(self) -> float:
        return float(db_to_linear(self.gamma_th_db))

    def mobility(self) -> Mobility:
        if self.topology == "static":
            return StaticDistance(self.d2 / 2)
        return RWPTopology.named(self.topology, self.d2)

    def direct_mobility(self) -> Mobility:
        topo = self.direct_topology or self.topology
        if topo == "static":
            return StaticDistance(math.hypot(self.d1, self.d2 / 2))
        return RWPTopology.named(topo, self.d)

    def element(self) -> ElementConfig:
        return ElementConfig(KappaMuParams(self.kappa, self.mu, self.K), self.dgg, self.mobility(),
                             PhaseNoiseParams(self.phase_L), self.a, self.special_case)

    def elements(self) -> list:
        return [self.element()] * self.N

    def snr_config(self) -> SNRConfig:
        gr, gd = link_budget(self)
        return SNRConfig(gr, gd, self.omega, self.N, self.direct if self.omega else None,
                         self.direct_mobility() if self.omega else None, self.a, free_space(self))

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)


def free_space(sc: ScenarioConfig) -> float:
    """Amplitude constant c/(4 pi f_c) shared by the first RIS hop and the direct path."""
    return SPEED_OF_LIGHT / (4 * math.pi * sc.f_c)


def link_budget(sc: ScenarioConfig) -> tuple[float, float]:
    """Average SNR scales (gbar_ris, gbar_d) in linear units.

    gbar_ris = H_l^2 G_T G_R P_t / sigma^2 with H_l = d1^{-a/2} c/(4 pi f_c);
    gbar_d = G_T G_R P_t / sigma^2. Distances of the second hop and of the
    direct path enter through the sampled amplitudes; the direct amplitude
    also carries the free-space constant :func:`free_space`.
    """
    Hl = sc.d1 ** (-sc.a / 2) * free_space(sc)
    ratio = float(db_to_linear(sc.G_T + sc.G_R) * dbm_to_watt(sc.P_t) / dbm_to_watt(sc.noise))
    return Hl * Hl * ratio, ratio


@dataclass(frozen=True)
class MCConfig:
    trials: int = 1_000_000
    seed: int = 0
    streams: int = 8
    threads: int = 1
    projection: str = "magnitude"
    chunk: int = 1 << 16

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1", field="mc.trials")
        if self.streams < 1 or self.threads < 1:
            raise ConfigError("streams and threads must be >= 1", field="mc.streams")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer", field="mc.seed")
        if self.projection not in PROJECTIONS:
            raise ConfigError(f"unknown projection {self.projection!r}", field="mc.projection")


@dataclass(frozen=True)
class SampleSet:
    """Per-trial RIS and direct amplitudes with the SNR scales they were drawn for."""

    zris: np.ndarray
    zd: np.ndarray
    gbar_ris: float
    gbar_d: float
    omega: int
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.zris.size

    @property
    def snr(self) -> np.ndarray:
        return self.snr_at(self.gbar_ris, self.gbar_d)

    def snr_at(self, gbar_ris: float, gbar_d: Optional[float] = None) -> np.ndarray:
        g = gbar_ris * self.zris ** 2
        if self.omega:
            g = g + (self.gbar_d if gbar_d is None else gbar_d) * self.zd ** 2
        return g

    def scaled_db(self, delta_db: float) -> np.ndarray:
        """SNR samples after changing the transmit power by ``delta_db``."""
        return self.snr * float(db_to_linear(delta_db))


def _element_amplitudes(cfg: ElementConfig, rng: np.random.Generator, n: int):
    h = sample(cfg.first_hop, rng, n)
    g = sample(cfg.second_hop, rng, n)
    r = sample(cfg.effective_mobility, rng, n)
    # uniform draw is taken even for perfect phase so runs share random numbers across L
    u = rng.uniform(-1.0, 1.0, n)
    return h * g * r ** (-cfg.a / 2), u * (cfg.phase.q * math.pi)


def _rayleigh_hops(cfg: ElementConfig):
    if not cfg.rayleigh:
        return cfg
    g = cfg.second_hop
    return replace(cfg, first_hop=KappaMuParams(0.0, 1.0),
                   second_hop=DGGParams(1.0, 2.0, 1.0, 1.0, g.msp1, 1.0))


def _stream_block(cfgs, direct, dmob, a, projection, seed, stream, count, chunk):
    rng = np.random.Generator(np.random.Philox(key=[seed, stream]))
    zr = np.empty(count)
    zd = np.empty(count)
    for lo in range(0, count, chunk):
        m = min(chunk, count - lo)
        re = np.zeros(m)
        im = np.zeros(m) if projection == "magnitude" else None
        for c in cfgs:
            A, th = _element_amplitudes(c, rng, m)
            re += A * np.cos(th)
            if im is not None:
                im += A * np.sin(th)
        zr[lo:lo + m] = np.hypot(re, im) if im is not None else re
        zd[lo:lo + m] = sample(direct, rng, m) * sample(dmob, rng, m) ** (-a / 2)
    return zr, zd


def _split(trials: int, streams: int):
    base, extra = divmod(trials, streams)
    return [base + (k < extra) for k in range(streams)]


def simulate_elements(cfgs: Sequence[ElementConfig], mc: MCConfig, direct: Optional[GenKParams] = None,
                      direct_mobility: Optional[Mobility] = None, a: float = 2.0):
    """Raw RIS and direct amplitudes for explicit element configurations.

    Rayleigh special cases are drawn with their limiting hops (Rayleigh |h|,
    Gamma(2) second-hop amplitude).
    """
    cfgs = [_rayleigh_hops(c) for c in cfgs]
    direct = direct or GenKParams(1.0, 1.0)
    dmob = direct_mobility or StaticDistance(1.0)
    counts = _split(mc.trials, mc.streams)
    jobs = [(cfgs, direct, dmob, a, mc.projection, mc.seed, k, cnt, mc.chunk)
            for k, cnt in enumerate(counts)]
    if mc.threads > 1:
        with ThreadPoolExecutor(max_workers=mc.threads) as ex:
            parts = list(ex.map(lambda j: _stream_block(*j), jobs))
    else:
        parts = [_stream_block(*j) for j in jobs]
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def simulate(sc: ScenarioConfig, mc: MCConfig) -> SampleSet:
    """End-to-end samples of the combined SNR; deterministic for fixed (seed, streams, trials)."""
    gr, gd = link_budget(sc)
    zr, zd = simulate_elements(sc.elements(), mc, sc.direct, sc.direct_mobility(), sc.a)
    zd *= free_space(sc)
    meta = {"seed": mc.seed, "streams": mc.streams, "trials": mc.trials, "projection": mc.projection}
    return SampleSet(zr, zd, gr, gd, sc.omega, meta)


def _values(samples) -> np.ndarray:
    if isinstance(samples, SampleSet):
        return samples.snr
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empty sample set")
    return x


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Empirical CDF on a grid with a DKW band and the first two sample moments."""

    grid: np.ndarray
    cdf: np.ndarray
    dkw: float
    n: int
    mean: float
    second_moment: float
    stderr_mean: float
    stderr_second: float

    def __call__(self, x):
        """Piecewise-linear interpolation of the grid CDF (0 below, 1 above the grid)."""
        return np.interp(x, self.grid, self.cdf, left=0.0, right=1.0)


def default_grid(x: np.ndarray, points: int = 4096) -> np.ndarray:
    """Sample values at indices spaced geometrically from both tails."""
    s = np.sort(x)
    n = s.size
    half = np.unique(np.geomspace(1, max(n // 2, 1), points // 2).astype(np.int64)) - 1
    idx = np.unique(np.concatenate([half, n - 1 - half]))
    return s[idx]


def empirical_cdf(samples, grid=None, alpha: float = 0.01) -> EmpiricalDistribution:
    """Step CDF on ``grid`` with the DKW half-width at confidence 1 - alpha."""
    x = _values(samples)
    s = np.sort(x)
    n = s.size
    grid = default_grid(x) if grid is None else np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) < 0):
        raise ValueError("grid must be sorted")
    cdf = np.searchsorted(s, grid, side="right") / n
    dkw = math.sqrt(math.log(2 / alpha) / (2 * n))
    x2 = x * x
    sd = lambda v: float(v.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf  # noqa: E731
    return EmpiricalDistribution(grid, cdf, dkw, n, float(x.mean()), float(x2.mean()), sd(x), sd(x2))


def empirical_outage(samples, gamma_th):
    """Fraction of samples at or below ``gamma_th`` and its binomial standard error."""
    x = np.sort(_values(samples))
    p = np.searchsorted(x, np.asarray(gamma_th, dtype=float), side="right") / x.size
    return p, np.sqrt(p * (1 - p) / x.size)


def empirical_ber(samples, mod: Modulation):
    """Sample mean of the conditional bit-error probability and its standard error."""
    b = mod.bep(_values(samples))
    return float(b.mean()), float(b.std(ddof=1) / math.sqrt(b.size)) if b.size > 1 else math.inf
