import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, stats

from risfox.errors import ConfigError, DomainError, TruncationError
from risfox.fading import (DGGParams, GenKParams, KappaMuParams, PhaseNoiseParams, RWPTopology,
                           StaticDistance, dgg_cdf, dgg_pdf, genk_cdf, genk_pdf, genk_pdf_meijer,
                           kappa_mu_cdf, kappa_mu_pdf, kappa_mu_series_pdf, m_from_sigma_db,
                           path_gain_moment, phase_char, rwp_pdf, sample, terms_needed)


def _quad(f, lo=0.0, hi=np.inf):
    return integrate.quad(lambda v: float(np.asarray(f(np.array([v])))[0]), lo, hi, limit=400)[0]


@pytest.mark.parametrize("kappa,mu", [(4, 2), (0, 1), (0.5, 0.7), (10, 3.5)])
def test_kappa_mu_normalized_and_unit_power(kappa, mu):
    p = KappaMuParams(kappa, mu)
    assert _quad(lambda x: kappa_mu_pdf(p, x)) == pytest.approx(1, abs=1e-6)
    assert _quad(lambda x: x * x * kappa_mu_pdf(p, x)) == pytest.approx(1, abs=1e-6)


def test_kappa_mu_moments_match_density():
    p = KappaMuParams(4, 2)
    for t in (-1.5, 0.5, 1.0, 3.0):
        ref = _quad(lambda x: x ** t * kappa_mu_pdf(p, x))
        assert float(p.moment(t).real) == pytest.approx(ref, rel=1e-7)


def test_kappa_mu_series_forms():
    p = KappaMuParams(4, 2)
    x = np.linspace(0.05, 3, 40)
    np.testing.assert_allclose(kappa_mu_series_pdf(p, x), kappa_mu_pdf(p, x), atol=1e-9)
    with np.errstate(all="ignore"):
        printed = kappa_mu_series_pdf(p, x, "printed")
    assert not np.allclose(printed, kappa_mu_pdf(p, x), atol=1e-2)


def test_kappa_mu_cdf_matches_density():
    p = KappaMuParams(4, 2)
    assert kappa_mu_cdf(p, 1.0) == pytest.approx(_quad(lambda x: kappa_mu_pdf(p, x), 0, 1), abs=1e-8)


@given(st.floats(0, 50), st.floats(0.1, 8))
def test_kappa_mu_weights_sum_to_one(kappa, mu):
    p = KappaMuParams(kappa, mu, K=max(60, terms_needed(kappa, mu)))
    assert p.weights().sum() == pytest.approx(1, abs=1e-11)


def test_kappa_mu_truncation_error():
    with pytest.raises(TruncationError):
        KappaMuParams(50, 5, K=10).weights()


@pytest.mark.parametrize("bad", [dict(kappa=-1, mu=1), dict(kappa=1, mu=0), dict(kappa=1, mu=1, K=0)])
def test_kappa_mu_validation(bad):
    with pytest.raises(ConfigError):
        KappaMuParams(**bad)


@pytest.mark.parametrize("args", [(2, 1, 2, 2), (1, 2, 3, 0.8), (2.5, 1.5, 1, 3, 2.0, 0.5)])
def test_dgg_normalized_and_msp(args):
    p = DGGParams(*args)
    assert _quad(lambda x: dgg_pdf(p, x)) == pytest.approx(1, abs=1e-3)
    assert float(p.moment(2).real) == pytest.approx(p.msp1 * p.msp2, rel=1e-10)


def test_dgg_cdf_consistent():
    p = DGGParams(2, 1, 2, 2)
    assert float(dgg_cdf(p, np.array([1.0]))[0]) == pytest.approx(_quad(lambda x: dgg_pdf(p, x), 0, 1),
                                                                   abs=1e-6)


def test_dgg_rejects_nonpositive_argument():
    with pytest.raises(DomainError):
        dgg_pdf(DGGParams(2, 1, 2, 2), [0.0])


def test_genk_forms_and_normalization():
    p = GenKParams(1.0, 2.5454)
    x = np.array([0.05, 0.5, 1.0, 2.0, 4.0])
    np.testing.assert_allclose(genk_pdf(p, x), genk_pdf_meijer(p, x), rtol=1e-8)
    assert _quad(lambda v: genk_pdf(p, v)) == pytest.approx(1, abs=1e-6)
    assert _quad(lambda v: v * v * genk_pdf(p, v)) == pytest.approx(p.m0 * p.M, rel=1e-6)
    assert float(genk_cdf(p, np.array([1.0]))[0]) == pytest.approx(_quad(lambda v: genk_pdf(p, v), 0, 1),
                                                                   abs=1e-7)


def test_genk_sigma_db():
    assert m_from_sigma_db(4.0) == pytest.approx(4.23305, abs=5e-5)
    assert GenKParams(1.0, sigma_db=4.0).M == pytest.approx(m_from_sigma_db(4.0))
    with pytest.raises(ConfigError):
        GenKParams(1.0, 2.5454, sigma_db=4.0)
    with pytest.raises(ConfigError):
        GenKParams(1.0)


@pytest.mark.parametrize("t", [RWPTopology.one_d(), RWPTopology.two_d(), RWPTopology.three_d()])
def test_rwp_coefficient_identity_exact(t):
    assert t.normalization() == Fraction(1)
    assert _quad(lambda r: rwp_pdf(t, r), 0, 1) == pytest.approx(1, abs=1e-12)
    assert np.all(rwp_pdf(t, np.linspace(0, 1, 101)) >= -1e-12)


def test_rwp_printed_table_rejected():
    t = RWPTopology.two_d_printed()
    assert t.normalization() != 1
    with pytest.raises(ConfigError):
        RWPTopology(t.B, t.beta)


@given(st.floats(0, 1), st.floats(0, 1))
def test_rwp_cdf_monotone(a, b):
    t = RWPTopology.three_d(2.0)
    lo, hi = sorted((a, b))
    assert 0 <= t.cdf(2 * lo) <= t.cdf(2 * hi) <= 1 + 1e-12


def test_rwp_moments_scale_with_dmax():
    t = RWPTopology.one_d(100.0)
    assert float(t.moment(1.0).real) == pytest.approx(_quad(lambda r: r * rwp_pdf(t, r), 0, 100), rel=1e-10)
    assert float(path_gain_moment(t, 2.0, -1.0).real) == pytest.approx(float(t.moment(1.0).real))


@pytest.mark.parametrize("L", [1, 2, 3])
def test_phase_cos_moment(L):
    ph = PhaseNoiseParams(L)
    q = ph.q
    for t in (0.5, 1.0, 2.0):
        ref = integrate.quad(lambda th: math.cos(th) ** t, -q * math.pi, q * math.pi)[0] / (2 * q * math.pi)
        assert float(ph.moment(t).real) == pytest.approx(ref, rel=1e-10)


def test_phase_char():
    assert phase_char(0.5, 1.0) == pytest.approx(2 / math.pi)
    assert phase_char(0.25, 0.0) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        phase_char(0.0, 1.0)


def test_phase_validation():
    assert PhaseNoiseParams(None).perfect
    with pytest.raises(ConfigError):
        PhaseNoiseParams(0)


@pytest.mark.parametrize("dist,cdf", [
    (KappaMuParams(4, 2), lambda x: kappa_mu_cdf(KappaMuParams(4, 2), x)),
    (KappaMuParams(0.3, 1.4), lambda x: kappa_mu_cdf(KappaMuParams(0.3, 1.4), x)),
    (RWPTopology.one_d(), RWPTopology.one_d().cdf),
    (RWPTopology.two_d(), RWPTopology.two_d().cdf),
    (RWPTopology.three_d(), RWPTopology.three_d().cdf),
])
def test_sampler_ks(dist, cdf, rng):
    x = sample(dist, rng, 20000)
    assert stats.kstest(x, cdf).pvalue > 1e-3


def test_dgg_and_genk_samplers_ks(rng):
    p = DGGParams(2, 1, 2, 2)
    x = np.sort(sample(p, rng, 4000))
    grid = np.quantile(x, np.linspace(0.02, 0.98, 25))
    emp = np.searchsorted(x, grid, side="right") / x.size
    assert np.max(np.abs(dgg_cdf(p, grid) - emp)) < 0.03
    g = GenKParams(1.0, 2.5454)
    y = np.sort(sample(g, rng, 4000))
    grid = np.quantile(y, np.linspace(0.02, 0.98, 25))
    emp = np.searchsorted(y, grid, side="right") / y.size
    assert np.max(np.abs(genk_cdf(g, grid) - emp)) < 0.03


def test_static_and_phase_samplers(rng):
    assert np.all(sample(StaticDistance(3.0), rng, 5) == 3.0)
    th = sample(PhaseNoiseParams(2), rng, 1000)
    assert np.all(np.abs(th) <= math.pi / 4)
    assert np.all(sample(PhaseNoiseParams(None), rng, 3) == 0)


def test_sampling_is_reproducible():
    a = sample(KappaMuParams(4, 2), np.random.Generator(np.random.Philox(key=[7, 1])), 100)
    b = sample(KappaMuParams(4, 2), np.random.Generator(np.random.Philox(key=[7, 1])), 100)
    assert np.array_equal(a, b)
