import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sggle.core import ConfigError, GLParams, MonotonicityConfig
from sggle.inequalities import (DegeneratePair, MMatrix, RegimeError, lambda_beta,
                                lambda_beta_suite, lemma35_check, lemma36_bound, m_form_check,
                                m_form_ibp, monotonicity_34_check, negative_control_pairs,
                                okazawa_yokota_ratio, oy_bound, oy_extremal_factor, r_function,
                                replay, run_suite, sample_pairs)
from sggle.spectral import SpectralField, random_field
from sggle.young import r_prime


# -- pointwise dispersive inequality -------------------------------------------

def test_oy_examples(rng):
    z, w = rng.normal(size=3) + 1j * rng.normal(size=3), rng.normal(size=3) + 1j * rng.normal(size=3)
    r, b = okazawa_yokota_ratio(z, w, 2.0)
    assert b == 0 and r == pytest.approx(0, abs=1e-15)
    assert oy_bound(4.0) == pytest.approx(1 / math.sqrt(3))
    assert oy_bound(6.0) == pytest.approx(2 / math.sqrt(5))
    assert oy_bound(2 * 2 + 2) == pytest.approx(2 / math.sqrt(2 * 2 + 1))


def test_oy_degenerate():
    z = np.array([1.0 + 1j, 2.0])
    with pytest.raises(DegeneratePair):
        okazawa_yokota_ratio(z, z, 3.0)
    with pytest.raises(DegeneratePair):
        okazawa_yokota_ratio(z, np.zeros(2), 3.0)
    with pytest.raises(ValueError):
        okazawa_yokota_ratio(z, 2 * z, 1.0)


@settings(max_examples=300)
@given(st.integers(1, 8), st.floats(1.1, 12.0), st.integers(0, 2**32 - 1))
def test_oy_property(d, p, seed):
    g = np.random.default_rng(seed)
    z = g.normal(size=d) + 1j * g.normal(size=d)
    w = z * (g.uniform(0.1, 10) * np.exp(1j * g.uniform(-3, 3))) if seed % 2 else \
        g.normal(size=d) + 1j * g.normal(size=d)
    r, b = okazawa_yokota_ratio(z, w, p)
    assert r <= b + 1e-10


def test_oy_bound_nearly_attained():
    # in one dimension with w = rho e^{i theta} z the ratio approaches the bound
    p = 6.0
    rho = np.linspace(0.5, 2.0, 301)[:, None]
    th = np.linspace(-1.5, 1.5, 301)[None, :]
    w = (rho * np.exp(1j * th)).reshape(-1, 1)
    keep = np.abs(w[:, 0] - 1) > 1e-9
    r, b = okazawa_yokota_ratio(np.ones((keep.sum(), 1)), w[keep], p)
    assert r.max() > 0.95 * b[0]


# -- threshold -----------------------------------------------------------------

def test_lambda_beta_examples():
    assert lambda_beta(2, 0) == pytest.approx(1.0)
    assert lambda_beta(3, math.sqrt(7) / 3) == pytest.approx(0.0, abs=1e-15)
    assert lambda_beta(2, 2) == pytest.approx(3 - 2 * math.sqrt(5))
    assert np.allclose(MMatrix(2, 0).eigenvalues(), [1, 5])


@given(st.floats(0.1, 10), st.floats(-5, 5))
def test_lambda_beta_is_small_eigenvalue(s, b):
    m = MMatrix(s, b)
    assert m.lambda_beta == pytest.approx(m.eigenvalues()[0], abs=1e-9 * (1 + s))
    assert m.lambda_beta == pytest.approx(s + 1 - s * math.sqrt(1 + b * b), abs=1e-9 * (1 + s))


def test_lambda_beta_sign_grid():
    assert all(r.violations == 0 for r in lambda_beta_suite())


# -- m-form --------------------------------------------------------------------

def test_m_form_zero():
    r = m_form_check(SpectralField.zeros(4, 4), 3.0, 0.5)
    assert r.slack == 0


def test_m_form_real_field(rng):
    u = random_field(rng, 6, 6, real=True)
    r = m_form_check(u, 3.0, 0.0)
    mixed = r.terms["mixed"]
    assert r.terms["first"] == pytest.approx(-2 * 7 * mixed, rel=1e-10)
    assert r.slack == pytest.approx(-2 * 7 * mixed + 2 * mixed, rel=1e-10)
    assert r.slack < 0


def test_m_form_integration_by_parts(rng):
    u = random_field(rng, 6, 6, size=(5,))
    r = m_form_check(u, 3.0, 0.4)
    np.testing.assert_allclose(m_form_ibp(u, 3.0, 0.4), r.terms["first"], rtol=1e-10)


def test_m_form_samples(rng):
    u, _ = sample_pairs(rng, 1000, 6)
    assert m_form_check(u, 3.0, 0.5).ok


# -- Re I ----------------------------------------------------------------------

def test_lemma35_phi_zero(rng, params):
    u = random_field(rng, 6, 6, size=(10,))
    r = lemma35_check(u, SpectralField.zeros(6, 6, batch=(10,)), params)
    np.testing.assert_allclose(r.terms["m"], r.terms["Q"], rtol=1e-12)
    assert np.all(r.slack < -0.5 * r.scale)


def test_lemma35_equal_pair(rng, params):
    u = random_field(rng, 6, 6)
    r = lemma35_check(u, u, params)
    assert r.slack == 0 and r.scale == 0


def test_lemma35_sigma2(rng):
    p = GLParams(sigma=2.0, beta=0.9)
    u, phi = sample_pairs(rng, 10_000, 6)
    assert lemma35_check(u, phi, p).ok


def test_lemma35_regime(rng):
    u = random_field(rng, 4, 4)
    for beta in (0.0, 1.0):
        with pytest.raises(RegimeError):
            lemma35_check(u, u * 0.5, GLParams(sigma=3, beta=beta))


def test_lemma35_scaling(rng, params):
    u, phi = sample_pairs(rng, 50, 6)
    a = lemma35_check(u, phi, params)
    b = lemma35_check(u * 2.0, phi * 2.0, params)
    np.testing.assert_allclose(b.slack, 2.0 ** 8 * a.slack, rtol=1e-9, atol=1e-300)
    assert np.all(np.sign(a.slack) == np.sign(b.slack))


def test_negative_control_finds_violations(params):
    q = params.replace(beta=1.5 * params.beta_threshold)
    zeta = oy_extremal_factor(q.sigma, q.beta)
    assert abs(zeta) > 0
    u, phi = negative_control_pairs(np.random.default_rng(0), 20, 6, q)
    assert np.any(lemma35_check(u, phi, q, force=True).violations())


# -- derivative pairings -------------------------------------------------------

def test_lemma36_equal_pair(rng, params):
    m = MonotonicityConfig.derive(params)
    u = random_field(rng, 6, 6)
    r = lemma36_bound(u, u, m, params)
    assert r.re_pair == 0 and r.bound == 0


def test_lemma36_phi_zero(rng, params):
    m = MonotonicityConfig.derive(params)
    u, _ = sample_pairs(rng, 1000, 6)
    zero = SpectralField.zeros(6, 6, batch=(1000,))
    for which in ("J", "K", "JK"):
        r = lemma36_bound(u, zero, m, params, which)
        want = m.eps_tilde * r.terms["b2"] + m.eps_hat * r.terms["Q"] + m.constants.C89 * r.terms["a2"]
        np.testing.assert_allclose(r.bound, want, rtol=1e-12)
        assert r.ok


def test_lemma36_homogeneity(rng, params):
    m = MonotonicityConfig.derive(params)
    u, phi = sample_pairs(rng, 30, 6)
    s = params.sigma
    for c in (0.5, 2.0):
        a = lemma36_bound(u, phi, m, params)
        b = lemma36_bound(u * c, phi * c, m, params)
        np.testing.assert_allclose(b.re_pair, c ** 4 * a.re_pair, rtol=1e-9, atol=1e-300)
        np.testing.assert_allclose(b.terms["b2"], c ** 2 * a.terms["b2"], rtol=1e-12)
        np.testing.assert_allclose(b.terms["Q"], c ** (2 * s + 2) * a.terms["Q"], rtol=1e-9)
        np.testing.assert_allclose(b.terms["B"], c * a.terms["B"], rtol=1e-12)
        assert b.ok and a.ok


def test_lemma36_unset_constants(rng, params):
    u = random_field(rng, 4, 4)
    with pytest.raises(ConfigError):
        lemma36_bound(u, u, MonotonicityConfig(eps={}, constants=None), params)


# -- r(t) ----------------------------------------------------------------------

def test_r_function(params):
    m = MonotonicityConfig.derive(params)
    t = np.linspace(0, 1, 11)
    zero = np.zeros_like(t)
    r = r_function(t, zero, zero, m, params.gamma, 0.3)
    np.testing.assert_allclose(r, (2 * (m.constants.C89 + params.gamma) + 0.3) * t, rtol=1e-12)
    r2 = r_function(t, zero, zero, m, params.gamma, 0.6)
    np.testing.assert_allclose(r2 - r, 0.3 * t, atol=1e-12)
    g = np.random.default_rng(0)
    r3 = r_function(t, g.uniform(0, 2, 11), g.uniform(0, 9, 11), m, params.gamma, 0.1)
    assert r3[0] == 0 and np.all(np.diff(r3) > 0)


# -- combined bound ------------------------------------------------------------

def test_34_equal_pair(rng, params, linear_model):
    m = MonotonicityConfig.derive(params)
    u = random_field(rng, 6, 6)
    assert monotonicity_34_check(u, u, params, linear_model, m).slack == 0


def test_34_phi_zero(rng, params, linear_model):
    m = MonotonicityConfig.derive(params)
    u, _ = sample_pairs(rng, 1000, 6)
    zero = SpectralField.zeros(6, 6, batch=(1000,))
    r = monotonicity_34_check(u, zero, params, linear_model, m)
    k3 = linear_model.constants.k3
    rp = r_prime(m.constants, m.eps, params.gamma, k3, 0.0, 0.0)
    np.testing.assert_allclose(r.terms["noise"], k3 * u.l2_sq(), rtol=1e-12)
    np.testing.assert_allclose(r.terms["r_prime"], rp)
    assert r.ok


def test_34_regime(rng, params, linear_model):
    q = params.replace(beta=1.2)
    m = MonotonicityConfig.derive(q)
    u = random_field(rng, 4, 4)
    with pytest.raises(RegimeError):
        monotonicity_34_check(u, u * 0.5, q, linear_model, m)


def test_34_negative_control(params, linear_model):
    q = params.replace(beta=1.5 * params.beta_threshold)
    m = MonotonicityConfig.derive(q)
    u, phi = negative_control_pairs(np.random.default_rng(1), 50, 8, q)
    assert np.any(monotonicity_34_check(u, phi, q, linear_model, m, force=True).violations())


# -- suite ---------------------------------------------------------------------

def test_small_suite(params, linear_model):
    rows, wit = run_suite(params, linear_model, samples=2000, field_samples=300,
                          negative_control=True)
    assert all(r.violations == 0 for r in rows if not r.negative_control)
    neg = [r for r in rows if r.negative_control]
    assert neg and all(r.violations > 0 for r in neg)
    assert wit and all(w.check.endswith("_negative") for w in wit)
    w = wit[0]
    res = replay(w.check, w.params, w.u, w.phi, linear_model)
    assert float(res.slack) == pytest.approx(w.slack, rel=1e-12)
