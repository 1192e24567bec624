import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from risfox.cascade import (CascadeCoefficients, ElementConfig, SNRConfig, direct_layout, direct_snr_cdf,
                            direct_snr_pdf, element_strip, element_terms, mobility_link_pdf, product_kernel,
                            rayleigh_limit, risd_snr, zi_cdf, zi_moment, zi_pdf, zris_bound, zris_exact)
from risfox.errors import ConfigError, DimensionLimitError, DomainError, StripError
from risfox.fading import (DGGParams, GenKParams, KappaMuParams, PhaseNoiseParams, RWPTopology,
                           StaticDistance, dgg_pdf)
from risfox.mc import MCConfig, simulate_elements

CFG = ElementConfig()
GK = GenKParams(1.0, 2.5454)


def _quad(f, lo=0.0, hi=np.inf):
    return integrate.quad(lambda v: float(np.asarray(f(np.array([v])))[0]), lo, hi, limit=400)[0]


def _ecdf(z, grid):
    return np.searchsorted(np.sort(z), grid, side="right") / z.size


@pytest.fixture(scope="module")
def inphase_mc():
    mc = MCConfig(trials=200_000, seed=5, projection="inphase")
    return {n: simulate_elements([CFG] * n, mc)[0] for n in (1, 2)}


def test_default_element():
    assert CFG.first_hop == KappaMuParams(4, 2)
    assert CFG.second_hop == DGGParams(2, 1, 2, 2)
    assert CFG.phase.q == 0.5
    assert element_strip(CFG) == (-1.0, 2.0)


def test_element_validation():
    with pytest.raises(ConfigError):
        ElementConfig(a=1.5)
    with pytest.raises(ConfigError):
        ElementConfig(special_case="nakagami")


def test_mobility_link_pdf():
    p = DGGParams(2, 1, 2, 2)
    assert _quad(lambda x: mobility_link_pdf(p, RWPTopology.one_d(), 2.0, x)) == pytest.approx(1, abs=1e-3)
    x = np.array([0.3, 1.0, 2.0])
    np.testing.assert_allclose(mobility_link_pdf(p, RWPTopology.one_d(), 0.0, x), dgg_pdf(p, x), rtol=1e-7)


@pytest.mark.parametrize("cfg", [CFG, replace(CFG, phase=PhaseNoiseParams(None)),
                                 replace(CFG, mobility=RWPTopology.three_d(), a=3.0)])
def test_zi_pdf_normalized(cfg):
    assert _quad(lambda x: zi_pdf(cfg, x)) == pytest.approx(1, abs=1e-3)


@pytest.mark.parametrize("model", ["inphase", "printed"])
def test_zi_kernel_and_terms_agree(model):
    x = np.array([0.1, 0.5, 1.0, 2.0, 4.0])
    np.testing.assert_allclose(zi_pdf(CFG, x, "terms", model), zi_pdf(CFG, x, "kernel", model), rtol=1e-6)
    np.testing.assert_allclose(zi_cdf(CFG, x, "terms", model), zi_cdf(CFG, x, "kernel", model), atol=1e-8)


def test_zi_cdf_is_integral_of_pdf():
    assert float(zi_cdf(CFG, np.array([1.0]))[0]) == pytest.approx(_quad(lambda x: zi_pdf(CFG, x), 0, 1),
                                                                   abs=1e-6)


@given(st.floats(1e-3, 30))
def test_zi_cdf_is_a_probability(x):
    v = float(zi_cdf(CFG, np.array([x]))[0])
    assert -1e-9 <= v <= 1 + 1e-9


def test_zi_domain():
    with pytest.raises(DomainError):
        zi_pdf(CFG, [0.0])
    with pytest.raises(DomainError):
        zi_cdf(CFG, [-1.0])
    with pytest.raises(ValueError):
        zi_pdf(CFG, [1.0], method="series")


def test_zi_moment():
    assert zi_moment(CFG, 0.0) == pytest.approx(1, abs=1e-12)
    assert zi_moment(CFG, 1.0) == pytest.approx(_quad(lambda x: x * zi_pdf(CFG, x)), rel=1e-5)
    with pytest.raises(StripError):
        zi_moment(CFG, 2.0)
    with pytest.raises(StripError):
        zi_moment(CFG, -1.0)


def test_moments_match_inphase_mc(inphase_mc):
    st_cfg = replace(CFG, mobility=StaticDistance(0.5))
    z, _ = simulate_elements([st_cfg], MCConfig(trials=200_000, seed=9, projection="inphase"))
    for r in (1, 2):
        v = z ** r
        assert abs(zi_moment(st_cfg, r) - v.mean()) < 4 * v.std() / math.sqrt(v.size)


def test_single_element_cdf_matches_mc(inphase_mc):
    z = inphase_mc[1]
    grid = np.quantile(z, np.linspace(0.05, 0.95, 10))
    assert np.max(np.abs(zi_cdf(CFG, grid) - _ecdf(z, grid))) < 0.01


def test_exact_sum_n1_reduces_to_element():
    x = np.array([0.3, 1.0, 2.5])
    np.testing.assert_allclose(zris_exact([CFG], x), zi_cdf(CFG, x), atol=1e-4)


def test_exact_sum_matches_mc(inphase_mc):
    z = inphase_mc[2]
    grid = np.quantile(z, np.linspace(0.05, 0.95, 10))
    assert np.max(np.abs(zris_exact([CFG, CFG], grid) - _ecdf(z, grid))) < 0.01


def test_exact_sum_pdf_normalized():
    v = _quad(lambda x: zris_exact([CFG, CFG], x, "pdf", tol=1e-6), 0, np.inf)
    assert v == pytest.approx(1, abs=1e-3)


def test_exact_sum_dimension_limit():
    with pytest.raises(DimensionLimitError):
        zris_exact([CFG] * 4, [1.0])


def test_bound_dominates_exact():
    x = np.array([0.3, 0.8, 1.5, 3.0])
    for n in (2, 3):
        assert np.all(zris_bound([CFG] * n, x) >= zris_exact([CFG] * n, x) - 1e-4)
    np.testing.assert_allclose(zris_bound([CFG], x), zi_cdf(CFG, x), atol=1e-8)


def test_bound_pdf_is_derivative_of_cdf():
    x, h = 1.3, 1e-4
    cfgs = [CFG, CFG]
    num = (zris_bound(cfgs, np.array([x + h])) - zris_bound(cfgs, np.array([x - h]))) / (2 * h)
    assert float(zris_bound(cfgs, np.array([x]), "pdf")[0]) == pytest.approx(float(num[0]), rel=1e-5)


def test_product_kernel_strip():
    k = product_kernel([CFG, replace(CFG, phase=PhaseNoiseParams(None))])
    assert k.strip() == (-1.0, 2.0)


@pytest.mark.parametrize("case", ["rayleigh_mobility", "rayleigh_static"])
def test_rayleigh_collapse(case):
    cfg = replace(CFG, special_case=case)
    lim = rayleigh_limit(cfg)
    x = np.linspace(0.2, 3.0, 10)
    np.testing.assert_allclose(zi_pdf(cfg, x, "terms"), zi_pdf(lim, x), atol=1e-4)
    np.testing.assert_allclose(zris_exact([cfg] * 2, x, method="terms"), zris_exact([lim] * 2, x), atol=1e-3)
    np.testing.assert_allclose(zris_bound([cfg] * 2, x, method="terms"), zris_bound([lim] * 2, x), atol=1e-4)


def test_rayleigh_static_uses_half_distance():
    cfg = ElementConfig(mobility=RWPTopology.one_d(100.0), special_case="rayleigh_static")
    assert cfg.effective_mobility == StaticDistance(50.0)


def test_cascade_coefficients():
    c = CascadeCoefficients.build(CFG, GK, RWPTopology.one_d())
    assert c.psi.shape[1] == 2
    assert c.zeta1 == pytest.approx(10.0)
    assert c.psi.sum() == pytest.approx(sum(t.coef for t in element_terms(CFG)))
    assert c.psi_d.shape == (2,)


def test_direct_snr_density():
    t = RWPTopology.one_d()
    x = np.array([0.05, 0.4, 1.0, 3.0])
    np.testing.assert_allclose(direct_snr_pdf(GK, t, 2.0, 1.0, x, "terms"),
                               direct_snr_pdf(GK, t, 2.0, 1.0, x), rtol=1e-6)
    assert _quad(lambda v: direct_snr_pdf(GK, t, 2.0, 1.0, v)) == pytest.approx(1, abs=1e-3)
    assert float(direct_snr_cdf(GK, t, 2.0, 1.0, np.array([1.0]))[0]) == pytest.approx(
        _quad(lambda v: direct_snr_pdf(GK, t, 2.0, 1.0, v), 0, 1), abs=1e-6)


def test_snr_config_validation():
    with pytest.raises(ConfigError):
        SNRConfig(0.0)
    with pytest.raises(ConfigError):
        SNRConfig(1.0, 1.0, omega=1)
    with pytest.raises(ConfigError):
        SNRConfig(1.0, 0.0, omega=1, direct_fading=GK)


def test_snr_without_direct_link_rescales_amplitude():
    s = SNRConfig(4.0)
    g = np.array([0.5, 2.0, 8.0])
    np.testing.assert_allclose(risd_snr(s, [CFG], g), zi_cdf(CFG, np.sqrt(g / 4.0)), atol=1e-6)


def test_combined_snr_n1():
    s = SNRConfig(1.0, 0.3, 1, 1, GK, RWPTopology.one_d(), 2.0)
    g = np.array([0.2, 0.5, 1.0, 2.0])
    ex = risd_snr(s, [CFG], g)
    assert np.all(np.diff(ex) > 0)
    assert np.all(risd_snr(s, [CFG], g, method="bound") >= ex - 1e-3)
    assert _quad(lambda v: risd_snr(s, [CFG], v, "pdf")) == pytest.approx(1, abs=1e-3)


def test_direct_layout_matches_direct_cdf():
    s = SNRConfig(1.0, 2.0, 1, 1, GK, RWPTopology.one_d(), 2.0, h_ld=0.5)
    g = np.array([0.1, 0.5, 2.0])
    np.testing.assert_allclose(direct_layout(s).evaluate(g).value,
                               direct_snr_cdf(GK, RWPTopology.one_d(), 2.0, 0.5, g), rtol=1e-8)
