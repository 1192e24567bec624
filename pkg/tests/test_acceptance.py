"""Acceptance criteria 1-11 at their stated tolerances.

Every test records one PASS/FAIL line, printed in the terminal summary.
Analytic element statistics describe the in-phase amplitude, so oracles for
criteria 3-7 use the in-phase Monte Carlo projection; the figure-trend and
slope criteria use the magnitude construction.
"""
import math
import time
from dataclasses import replace
from functools import lru_cache

import numpy as np
import pytest
from scipy import integrate, optimize

from conftest import ACCEPTANCE_LINES
from risfox.cascade import (ElementConfig, SNRConfig, direct_snr_pdf, mobility_link_pdf, rayleigh_limit, risd_snr,
                            zi_cdf, zi_moment, zi_pdf, zris_bound, zris_exact)
from risfox.fading import (DGGParams, GenKParams, KappaMuParams, RWPTopology, StaticDistance, dgg_pdf,
                           genk_pdf, kappa_mu_pdf, rwp_pdf)
from risfox.mc import (MCConfig, ScenarioConfig, empirical_ber, empirical_cdf, simulate, simulate_elements)
from risfox.metrics import BPSK, ber_numeric, diversity_order, outage
from risfox.validation import validate

CFG = ElementConfig()
GK = GenKParams(1.0, 2.5454)
INPHASE = MCConfig(trials=1_000_000, seed=2024, projection="inphase")
FIGURE_TRIALS = 10_000_000


def record(num, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {num:<3} {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def _quad(f, lo=0.0, hi=np.inf):
    return integrate.quad(lambda v: float(np.asarray(f(np.array([v])))[0]), lo, hi, limit=400)[0]


def _ecdf(z, grid):
    return np.searchsorted(np.sort(z), grid, side="right") / z.size


@lru_cache(maxsize=None)
def _inphase(n):
    return simulate_elements([CFG] * n, INPHASE)[0]


# --------------------------------------------------------------------------- 1, 2


def test_criterion_01_normalization():
    t0 = time.perf_counter()
    elementary = {
        "kappa-mu": lambda x: kappa_mu_pdf(KappaMuParams(4, 2), x),
        "generalized-K": lambda x: genk_pdf(GK, x),
    }
    for name, t in (("1d", RWPTopology.one_d()), ("2d", RWPTopology.two_d()), ("3d", RWPTopology.three_d())):
        elementary[f"RWP {name}"] = (lambda x, t=t: rwp_pdf(t, np.clip(x, 0, 1)) * (x <= 1))
    fox = {
        "dGG": lambda x: dgg_pdf(DGGParams(2, 1, 2, 2), x),
        "mobility-averaged dGG": lambda x: mobility_link_pdf(DGGParams(2, 1, 2, 2), RWPTopology.one_d(), 2.0, x),
        "cascade element": lambda x: zi_pdf(CFG, x),
        "direct SNR": lambda x: direct_snr_pdf(GK, RWPTopology.one_d(), 2.0, 1.0, x),
    }
    worst_e = max(abs(_quad(f, 0, 1 if name.startswith("RWP") else np.inf) - 1) for name, f in elementary.items())
    worst_f = max(abs(_quad(f) - 1) for f in fox.values())
    dt = time.perf_counter() - t0
    record(1, worst_e <= 1e-6 and worst_f <= 1e-3 and dt < 300,
           f"elementary dev {worst_e:.1e} (tol 1e-6), H-function dev {worst_f:.1e} (tol 1e-3), {dt:.1f} s")


def test_criterion_02_rwp_identity():
    ok = all(t.normalization() == 1 for t in (RWPTopology.one_d(), RWPTopology.two_d(), RWPTopology.three_d()))
    rep = validate("fast")
    chk = next(c for c in rep.checks if "55" in c.name)
    record(2, ok and chk.passed and chk.observed > 1e-3,
           f"sum B_j/(beta_j+1) = 1 exactly for 1d/2d/3d; printed 55 table deviates by {chk.observed:.3g}")


# --------------------------------------------------------------------------- 3-7


def test_criterion_03_element_pdf_vs_histogram():
    t0 = time.perf_counter()
    z = _inphase(1)
    edges = np.quantile(z, np.linspace(0.005, 0.995, 41))
    hist, _ = np.histogram(z, edges)
    dens = hist / (z.size * np.diff(edges))
    binned = np.array([_quad(lambda v: zi_pdf(CFG, v), a, b) / (b - a) for a, b in zip(edges[:-1], edges[1:])])
    sup = float(np.max(np.abs(dens - binned)))
    dt = time.perf_counter() - t0
    record(3, sup <= 0.02 and dt < 600, f"binned density sup-norm {sup:.4f} (tol 0.02), {dt:.1f} s")


def test_criterion_04_moments():
    st = replace(CFG, mobility=StaticDistance(0.5))
    z, _ = simulate_elements([st], INPHASE)
    zs = []
    for r in (1, 2):
        v = z ** r
        zs.append(abs(zi_moment(st, r) - v.mean()) / (v.std(ddof=1) / math.sqrt(v.size)))
    r0 = abs(zi_moment(CFG, 0.0) - 1)
    record(4, max(zs) <= 3 and r0 <= 1e-6,
           f"static user: r=1 {zs[0]:.2f} SE, r=2 {zs[1]:.2f} SE (tol 3); r=0 dev {r0:.1e}")


def test_criterion_05_exact_sum():
    z = _inphase(2)
    grid = np.quantile(z, np.linspace(0.05, 0.95, 10))
    d = float(np.max(np.abs(zris_exact([CFG, CFG], grid) - _ecdf(z, grid))))
    record(5, d <= 0.02, f"N=2 exact CDF vs MC max abs diff {d:.4f} (tol 0.02)")


def test_criterion_06_bound_dominance():
    margins = []
    for n in (2, 3):
        z = _inphase(n)
        grid = np.quantile(z, np.linspace(0.02, 0.98, 15))
        margins.append(float(np.min(zris_bound([CFG] * n, grid) - _ecdf(z, grid))))
    x = np.linspace(0.1, 3, 10)
    eq = float(np.max(np.abs(zris_bound([CFG], x) - zris_exact([CFG], x))))
    record(6, min(margins) >= -0.01 and eq <= 1e-3,
           f"min(bound - MC) N=2 {margins[0]:.4f}, N=3 {margins[1]:.4f} (tol -0.01); N=1 |bound-exact| {eq:.1e}")


def test_criterion_07_combined_snr():
    sc = ScenarioConfig(omega=1, P_t=20.0)
    s = sc.snr_config()
    g = simulate(sc, INPHASE).snr
    grid = np.quantile(g, np.linspace(0.05, 0.95, 10))
    ex = outage(s, sc.elements(), grid)
    d = float(np.max(np.abs(ex - _ecdf(g, grid))))
    gap = float(np.min(outage(s, sc.elements(), grid, "bound") - ex))
    record(7, d <= 0.02 and gap >= -1e-3,
           f"N=1 with direct link: exact vs MC {d:.4f} (tol 0.02); min(bound - exact) {gap:.1e} (tol -1e-3)")


# --------------------------------------------------------------------------- 8


def _operating_point(snr0, gamma_th, level):
    """Transmit power (dB relative to the simulated one) where the outage equals ``level``."""
    return 10 * math.log10(gamma_th / np.quantile(snr0, level))


def test_criterion_08_diversity():
    sc = ScenarioConfig(P_t=0.0)
    G = diversity_order(sc.elements())
    G2 = diversity_order(ScenarioConfig(N=2, omega=1).elements(), GK)
    snr0 = simulate(sc, MCConfig(trials=2_000_000, seed=8)).snr
    levels = np.logspace(-2, -4, 9)
    p = np.array([_operating_point(snr0, sc.gamma_th, q) for q in levels])
    slope = np.polyfit(p / 10, np.log10(levels), 1)[0]
    ok = G == 1 and G2 == 3 and abs(-slope - G) <= 0.15 * G
    record(8, ok, f"G_out={G:g} (N=1), {G2:g} (N=2 with direct); MC slope {slope:.3f} vs -{G:g} (tol 15%)")


# --------------------------------------------------------------------------- 9


@lru_cache(maxsize=None)
def _figure_point(N, L, omega, link, target, level):
    """Transmit power in dBm reaching ``level`` of outage or BPSK BER at 10^7 trials."""
    sc = ScenarioConfig(N=N, phase_L=L, omega=omega, P_t=0.0, topology="1d")
    ss = simulate(sc, MCConfig(trials=FIGURE_TRIALS, seed=99, streams=16))
    snr0 = ss.gbar_d * ss.zd ** 2 if link == "direct" else ss.snr
    del ss
    if target == "outage":
        return _operating_point(snr0, sc.gamma_th, level)
    def f(P, x):
        return math.log(max(empirical_ber(x * 10 ** (P / 10), BPSK)[0], 1e-300) / level)

    # coarse root on a subsample, then refine on all samples
    P = optimize.brentq(f, -60, 120, args=(snr0[::4],), xtol=0.05)
    return optimize.brentq(f, P - 1.0, P + 1.0, args=(snr0,), xtol=0.01)


@pytest.mark.slow
def test_criterion_09a_phase_gap_perfect():
    gap = _figure_point(10, 1, 0, "ris", "outage", 1e-3) - _figure_point(10, None, 0, "ris", "outage", 1e-3)
    record("9a", abs(gap - 6) <= 1.5, f"L=1 vs perfect phase gap at outage 1e-3: {gap:.2f} dB (target 6 +- 1.5)")


@pytest.mark.slow
def test_criterion_09b_phase_gap_levels():
    gap = _figure_point(10, 1, 0, "ris", "outage", 1e-3) - _figure_point(10, 2, 0, "ris", "outage", 1e-3)
    record("9b", abs(gap - 5) <= 1.5, f"L=1 vs L=2 gap at outage 1e-3: {gap:.2f} dB (target 5 +- 1.5)")


@pytest.mark.slow
def test_criterion_09c_ber_operating_points():
    cases = [((10, 2), 38.0), ((20, 1), 34.0), ((50, 1), 24.0)]
    got = [_figure_point(n, L, 0, "ris", "ber", 1e-4) for (n, L), _ in cases]
    ok = all(abs(g - t) <= 2 for g, (_, t) in zip(got, cases))
    desc = ", ".join(f"N={n} L={L}: {g:.1f} dBm (target {t:g})" for g, ((n, L), t) in zip(got, cases))
    record("9c", ok, f"BER 1e-4 points {desc}; tol +- 2 dB")


@pytest.mark.slow
def test_criterion_09d_direct_link_gain():
    dt = _figure_point(1, 1, 1, "direct", "outage", 1e-3)
    gains = [dt - _figure_point(n, 1, 1, "combined", "outage", 1e-3) for n in (10, 20)]
    ok = abs(gains[0] - 8) <= 2 and abs(gains[1] - 14) <= 2
    record("9d", ok, f"gain over direct-only at outage 1e-3: N=10 {gains[0]:.2f} dB (target 8 +- 2), "
                     f"N=20 {gains[1]:.2f} dB (target 14 +- 2)")


# --------------------------------------------------------------------------- 10, 11


def test_criterion_10_ber_consistency():
    oracle = ber_numeric(lambda g: -np.expm1(-g), BPSK)
    rels = []
    for sc in (ScenarioConfig(N=10, P_t=20.0), ScenarioConfig(N=2, P_t=30.0), ScenarioConfig(omega=1, P_t=10.0)):
        g = simulate(sc, MCConfig(trials=1_000_000, seed=10)).snr
        direct, _ = empirical_ber(g, BPSK)
        rels.append(abs(ber_numeric(empirical_cdf(g), BPSK) / direct - 1))
    ok = abs(oracle - 0.1464466) <= 1e-6 and max(rels) <= 0.02
    record(10, ok, f"exponential oracle {oracle:.7f} (target 0.1464466 +- 1e-6); "
                   f"empirical-CDF quadrature vs sample BER max rel diff {max(rels):.2e} (tol 2%)")


def test_criterion_11_rayleigh_collapse():
    x = np.linspace(0.2, 3.0, 10)
    g = np.logspace(-1, 1, 10)
    worst = 0.0
    for case in ("rayleigh_mobility", "rayleigh_static"):
        c = replace(CFG, special_case=case)
        lim = rayleigh_limit(c)
        s = SNRConfig(1.0, 0.3, 1, 1, GK, RWPTopology.one_d(), 2.0)
        pairs = [
            (zi_pdf(c, x, "terms"), zi_pdf(lim, x)),
            (zi_cdf(c, x, "terms"), zi_cdf(lim, x)),
            (zris_exact([c] * 2, x, "pdf", method="terms"), zris_exact([lim] * 2, x, "pdf")),
            (zris_exact([c] * 2, x, method="terms"), zris_exact([lim] * 2, x)),
            (zris_bound([c] * 2, x, "pdf", method="terms"), zris_bound([lim] * 2, x, "pdf")),
            (zris_bound([c] * 2, x, method="terms"), zris_bound([lim] * 2, x)),
            (risd_snr(s, [c], g), risd_snr(s, [lim], g)),
            (risd_snr(s, [c], g, "pdf"), risd_snr(s, [lim], g, "pdf")),
            (risd_snr(s, [c], g, method="bound"), risd_snr(s, [lim], g, method="bound")),
            (risd_snr(s.scaled(4.0), [c] * 2, g, method="bound"), risd_snr(s.scaled(4.0), [lim] * 2, g,
                                                                        method="bound")),
        ]
        worst = max(worst, max(float(np.max(np.abs(a - b))) for a, b in pairs))
    record(11, worst <= 1e-3, f"special-case vs limiting general pipeline max abs diff {worst:.1e} (tol 1e-3)")
