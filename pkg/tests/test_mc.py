import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from risfox.cascade import ElementConfig
from risfox.errors import ConfigError
from risfox.fading import PhaseNoiseParams
from risfox.mc import (MCConfig, SampleSet, ScenarioConfig, _split, db_to_linear, dbm_to_watt, default_grid,
                       empirical_ber, empirical_cdf, empirical_outage, free_space, link_budget, simulate,
                       simulate_elements)
from risfox.metrics import BPSK, ber_numeric

SMALL = MCConfig(trials=20_000, seed=3, streams=4)


def test_unit_conversions():
    assert db_to_linear(10) == pytest.approx(10)
    assert dbm_to_watt(30) == pytest.approx(1)


def test_default_link_budget():
    gr, gd = link_budget(ScenarioConfig())
    assert gd == pytest.approx(2.51189e12, rel=1e-5)
    assert gr == pytest.approx(15884.7, rel=1e-4)
    assert free_space(ScenarioConfig()) == pytest.approx(299792458 / (4 * math.pi * 6e9))


@pytest.mark.parametrize("kw,key", [(dict(N=0), "ris.n"), (dict(a=1.0), "pathloss.a"),
                                    (dict(d1=-1), "geometry.d1"), (dict(topology="4d"), "mobility.topology"),
                                    (dict(omega=2), "direct.enabled")])
def test_scenario_validation(kw, key):
    with pytest.raises(ConfigError) as ei:
        ScenarioConfig(**kw)
    assert ei.value.field == key


def test_scenario_mobility():
    sc = ScenarioConfig(topology="static")
    assert sc.mobility().distance == 50.0
    assert sc.direct_mobility().distance == pytest.approx(math.hypot(50, 50))
    assert ScenarioConfig().mobility().dmax == 100.0
    assert ScenarioConfig().direct_mobility().dmax == pytest.approx(math.hypot(50, 100))


def test_mc_config_validation():
    for kw in (dict(trials=0), dict(streams=0), dict(seed=-1), dict(projection="abs")):
        with pytest.raises(ConfigError):
            MCConfig(**kw)


@given(st.integers(1, 10 ** 7), st.integers(1, 64))
def test_split_is_exhaustive(trials, streams):
    parts = _split(trials, streams)
    assert sum(parts) == trials and max(parts) - min(parts) <= 1


def test_determinism_and_thread_independence():
    sc = ScenarioConfig(N=3, omega=1)
    a = simulate(sc, SMALL)
    b = simulate(sc, MCConfig(trials=20_000, seed=3, streams=4, threads=3))
    assert np.array_equal(a.zris, b.zris) and np.array_equal(a.zd, b.zd)
    c = simulate(sc, MCConfig(trials=20_000, seed=4, streams=4))
    assert not np.array_equal(a.zris, c.zris)


def test_projections():
    cfg = ElementConfig()
    mag, _ = simulate_elements([cfg], SMALL)
    inp, _ = simulate_elements([cfg], MCConfig(trials=20_000, seed=3, streams=4, projection="inphase"))
    assert np.all(mag >= inp - 1e-12)
    perfect = ElementConfig(phase=PhaseNoiseParams(None))
    m2, _ = simulate_elements([perfect] * 2, SMALL)
    i2, _ = simulate_elements([perfect] * 2, MCConfig(trials=20_000, seed=3, streams=4, projection="inphase"))
    np.testing.assert_allclose(m2, i2, rtol=1e-12)


def test_common_random_numbers_across_phase_levels():
    # a single element's magnitude ignores its phase, so L=1 and perfect runs coincide
    a = simulate(ScenarioConfig(phase_L=1), SMALL)
    b = simulate(ScenarioConfig(phase_L=None), SMALL)
    np.testing.assert_allclose(a.zris, b.zris, rtol=1e-12)


def test_power_rescaling_matches_resimulation():
    sc = ScenarioConfig(N=2, omega=1)
    base = simulate(sc, SMALL)
    shifted = simulate(sc.with_(P_t=sc.P_t + 7.0), SMALL)
    np.testing.assert_allclose(base.scaled_db(7.0), shifted.snr, rtol=1e-12)


def test_direct_amplitude_carries_free_space_constant():
    sc = ScenarioConfig(omega=1)
    s = simulate(sc, SMALL)
    _, zd = simulate_elements(sc.elements(), SMALL, sc.direct, sc.direct_mobility(), sc.a)
    np.testing.assert_allclose(s.zd, zd * free_space(sc), rtol=1e-12)
    assert np.all(s.snr > s.gbar_ris * s.zris ** 2)


def test_sample_set_without_direct_link():
    s = SampleSet(np.array([1.0, 2.0]), np.array([5.0, 5.0]), 2.0, 100.0, 0)
    np.testing.assert_allclose(s.snr, [2.0, 8.0])
    assert s.n == 2


def test_empirical_cdf():
    x = np.arange(1, 101, dtype=float)
    e = empirical_cdf(x, grid=[0.5, 50.0, 100.0])
    np.testing.assert_allclose(e.cdf, [0.0, 0.5, 1.0])
    assert e.dkw == pytest.approx(math.sqrt(math.log(200) / 200))
    assert e.mean == pytest.approx(50.5)
    assert e(25.25) == pytest.approx(0.25, abs=0.01)
    with pytest.raises(ValueError):
        empirical_cdf(x, grid=[2.0, 1.0])
    with pytest.raises(ValueError):
        empirical_cdf([])


def test_default_grid_covers_tails():
    x = np.random.default_rng(0).exponential(size=100_000)
    g = default_grid(x)
    assert g[0] == x.min() and g[-1] == x.max()
    assert np.all(np.diff(g) >= 0)


def test_empirical_outage_and_ber(rng):
    x = rng.exponential(size=200_000)
    p, se = empirical_outage(x, 1.0)
    assert p == pytest.approx(1 - math.exp(-1), abs=4 * se)
    b, se = empirical_ber(x, BPSK)
    assert b == pytest.approx(0.5 * (1 - math.sqrt(0.5)), abs=4 * se)
    assert ber_numeric(empirical_cdf(x), BPSK) == pytest.approx(b, rel=0.02)
