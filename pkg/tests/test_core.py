import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sggle.core import (ConfigError, GLParams, MonotonicityConfig, NoiseConstants, SimConfig,
                        beta_threshold, validate_regime)


def test_threshold_value():
    assert beta_threshold(3.0) == pytest.approx(math.sqrt(7) / 3)
    assert beta_threshold(3.0) == pytest.approx(0.8819, abs=1e-4)


def test_regime_examples():
    r = validate_regime(GLParams(sigma=3, beta=0.5), NoiseConstants(p=4))
    assert r.beta_ok and r.sigma_ok and r.p_ok
    assert not validate_regime(GLParams(sigma=3, beta=0.0), NoiseConstants(p=4)).beta_ok
    r = validate_regime(GLParams(sigma=2, beta=0.5), NoiseConstants(p=4))
    assert not r.sigma_ok and not r.p_ok


def test_regime_is_pure():
    p, n = GLParams(sigma=2.5, beta=1.0), NoiseConstants(k2=0.01, p=3)
    assert validate_regime(p, n) == validate_regime(p, n)


def test_out_of_regime_construction_allowed():
    p = GLParams(sigma=1.5, beta=5.0, gamma=0.0)
    assert not p.in_regime


@pytest.mark.parametrize("kw", [dict(L1=0.0), dict(sigma=0.0), dict(gamma=-1.0),
                                dict(alpha=float("nan"))])
def test_params_rejected(kw):
    with pytest.raises(ConfigError):
        GLParams(**kw)


def test_threshold_decreasing_in_sigma():
    s = np.linspace(2.01, 20, 500)
    thr = np.array([beta_threshold(x) for x in s])
    assert np.all(np.diff(thr) < 0)


@given(st.floats(0.1, 10.0), st.floats(-3.0, 3.0))
def test_in_regime_matches_threshold(sigma, beta):
    p = GLParams(sigma=sigma, beta=beta)
    assert p.in_regime == (sigma > 2 and 0 < abs(beta) < math.sqrt(2 * sigma + 1) / sigma)


def test_noise_constants():
    with pytest.raises(ConfigError):
        NoiseConstants(k1=-1)
    n = NoiseConstants(k2=0.1, k4=0.5)
    assert n.k2_small(3.0) == (0.1 < 1.5 / 19)
    assert n.k4_small(0.5) and not n.k4_small(0.8)


def test_sim_config():
    c = SimConfig(dt=0.3, t_end=1.0)
    assert c.n_steps == 4
    t = c.grid_times()
    assert t[0] == 0 and t[-1] == 1.0 and t.size == 5
    with pytest.raises(ConfigError):
        SimConfig(dt=2.0, t_end=1.0)
    with pytest.raises(ConfigError):
        SimConfig(blowup_radius=0)
    with pytest.raises(ConfigError):
        SimConfig(seed=-1)


def test_monotonicity_config(params):
    m = MonotonicityConfig.derive(params)
    e = m.eps
    assert m.eps_tilde == pytest.approx(e[8] + e[10] + e[12] + e[14])
    assert m.eps_hat == pytest.approx(e[9] + e[11])
    c = 1 - 3 * 0.5 / math.sqrt(7)
    assert m.K(params) == pytest.approx(-c / 64 + m.eps_hat)
    assert m.contraction_valid(params, 0.0)
    with pytest.raises(ConfigError):
        MonotonicityConfig.derive(params, {8: 0.1})
    bad = dict(e)
    bad[9] = 1.0
    assert not MonotonicityConfig.derive(params, bad).contraction_valid(params, 0.0)
