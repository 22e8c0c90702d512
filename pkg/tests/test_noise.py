import math

import numpy as np
import pytest
from scipy import stats

from sggle.core import ConfigError
from sggle.noise import (JumpEvent, JumpModel, NoiseOperator, StepIntegrand, compensator,
                         estimate_noise_constants, g_apply, ito_isometry_test, martingale_paths,
                         sample_events, sample_jump_times, sample_mark)
from sggle.spectral import SpectralField, grid_for, random_field, to_physical


def test_model_validation():
    with pytest.raises(ConfigError):
        JumpModel(nu=(1.0,), h=(1.0, 2.0))
    with pytest.raises(ConfigError):
        JumpModel(nu=(0.0,), h=(1.0,))
    with pytest.raises(ConfigError):
        JumpModel(family="cubic")
    m = JumpModel(nu=(1.0, 3.0), h=(0.5, 1.0))
    assert m.Lambda == 4.0 and np.allclose(m.probs, [0.25, 0.75])


def test_linear_constants():
    m = JumpModel(nu=(1.0, 2.0), h=(0.3, 0.2), c=0.5)
    k = m.constants
    assert k.k1 == pytest.approx(0.25 * (0.09 + 0.08))
    assert k.k3 == k.k1 and k.k2 == 0 and k.k4 == 0
    assert m.satisfied_conditions() == {"C1": True, "C2": True, "C3": False}
    q = JumpModel(family="quadratic")
    assert q.satisfied_conditions()["C3"] and not q.satisfied_conditions()["C1"]


def test_jump_times_tiny_rate():
    rng = np.random.default_rng(0)
    assert sum(sample_jump_times(1e-9, 1.0, rng).size for _ in range(100)) == 0


def test_jump_count_mean():
    rng = np.random.default_rng(1)
    counts = np.array([sample_jump_times(2.0, 5.0, rng).size for _ in range(100_000)])
    assert abs(counts.mean() - 10) < 3 * math.sqrt(10 / 1e5)


def test_interarrival_ks():
    rng = np.random.default_rng(2)
    t = sample_jump_times(3.0, 2000.0, rng)
    gaps = np.diff(np.concatenate([[0.0], t]))
    assert np.all(gaps > 0)
    assert stats.kstest(gaps, "expon", args=(0, 1 / 3.0)).pvalue > 0.01


def test_marks():
    rng = np.random.default_rng(3)
    assert np.all(sample_mark(JumpModel(nu=(2.0,), h=(1.0,)), rng, 10) == 0)
    m = JumpModel(nu=(1.0, 3.0), h=(1.0, 1.0))
    draws = sample_mark(m, rng, 100_000)
    f = np.mean(draws == 1)
    assert abs(f - 0.75) < 3 * math.sqrt(0.75 * 0.25 / 1e5)
    u = JumpModel(nu=(1.0,) * 5, h=(1.0,) * 5)
    counts = np.bincount(sample_mark(u, rng, 50_000), minlength=5)
    assert stats.chisquare(counts).pvalue > 0.01


def test_sample_events_sorted():
    ev = sample_events(JumpModel(nu=(5.0, 1.0), h=(1.0, 1.0)), 3.0, np.random.default_rng(4))
    t = [e.time for e in ev]
    assert t == sorted(t) and all(isinstance(e, JumpEvent) for e in ev)


def test_g_apply(rng):
    u = random_field(rng, 5, 5)
    lin = JumpModel(nu=(1.0,), h=(2.0,), c=0.1)
    np.testing.assert_allclose(g_apply(lin, 0.0, u, 0).coeffs, 0.2 * u.coeffs)
    for m in (lin, JumpModel(family="quadratic", h=(2.0,))):
        assert np.all(g_apply(m, 0.0, SpectralField.zeros(5, 5), 0).coeffs == 0)


def test_quadratic_pointwise():
    m = JumpModel(family="quadratic", h=(0.8,), cap=5.0)
    op = NoiseOperator(m, 1, 1, spec=grid_for(1, 1, 3))
    plan = op.plan
    v = plan.backward(np.array([[1.0 + 0j]]))
    # g / h = u |u| / 2, so |g| = h / 2 wherever |u| = 1
    i = np.argmin(np.abs(np.abs(v) - 1))
    out = v * np.minimum(np.abs(v), m.cap) * 0.5 * m.h[0]
    assert abs(np.abs(out.ravel()[i]) - m.h[0] / 2 * np.abs(v.ravel()[i]) ** 2) < 1e-15


def test_compensator(rng):
    u = random_field(rng, 4, 4)
    lin = JumpModel(nu=(1.0, 2.0), h=(0.3, 0.2), c=0.5)
    np.testing.assert_allclose(compensator(lin, 0, u).coeffs, 0.5 * (0.3 + 0.4) * u.coeffs)
    q = JumpModel(nu=(1.0, 2.0), h=(0.3, 0.2), family="quadratic")
    want = g_apply(q, 0, u, 0).coeffs * 1.0 + g_apply(q, 0, u, 1).coeffs * 2.0
    np.testing.assert_allclose(compensator(q, 0, u).coeffs, want, atol=1e-15)
    np.testing.assert_allclose(compensator(q.scaled(2.0), 0, u).coeffs, 2 * want, atol=1e-15)
    assert np.all(compensator(q, 0, SpectralField.zeros(4, 4)).coeffs == 0)


def test_isometry_examples():
    rng = np.random.default_rng(5)
    m = JumpModel(nu=(1.5,), h=(1.0,))
    zero = StepIntegrand.constant(np.zeros(2), 1, 1.0)
    r = ito_isometry_test(m, zero, 1000, rng)
    assert r.lhs == 0 and r.rhs == 0
    c = np.array([1.0, 2.0j])
    xi = StepIntegrand.constant(c, 1, 2.0)
    assert xi.isometry_rhs(m.nu) == pytest.approx(5 * 1.5 * 2.0)
    r = ito_isometry_test(m, xi, 10_000, rng)
    assert r.isometry_ok and r.martingale_ok


def test_martingale_paths():
    m = JumpModel(nu=(1.0, 0.5), h=(1.0, 1.0))
    xi = StepIntegrand(np.array([0.0, 0.5, 1.0]), np.array([[[1.0], [2.0]], [[-1.0], [0.5j]]]))
    mean, se = martingale_paths(m, xi, 5000, np.random.default_rng(6))
    assert abs(mean.real[0]) <= 3 * se.real[0] and abs(mean.imag[0]) <= 3 * se.imag[0] + 1e-300


def test_step_integrand_validation():
    with pytest.raises(ValueError):
        StepIntegrand(np.array([0.0, 1.0, 0.5]), np.zeros((2, 1, 1)))


def test_estimate_constants(rng):
    m = JumpModel(nu=(1.0,), h=(1.0,), c=1.0)
    s = random_field(rng, 5, 5, size=(20,))
    k1, k2, k3, k4 = estimate_noise_constants(m, s)
    assert k1 == pytest.approx(1.0, rel=1e-12) and k2 == 0
    assert k3 == pytest.approx(1.0, rel=1e-12) and k4 == 0
    assert estimate_noise_constants(m, s * 2.0)[:2] == pytest.approx((k1, k2))
    zeros = SpectralField(np.concatenate([np.zeros((1, 5, 5)), s.coeffs]))
    assert estimate_noise_constants(m, zeros)[0] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        estimate_noise_constants(m, SpectralField(np.zeros((0, 5, 5))))


def test_linear_family_identity(rng):
    m = JumpModel(nu=(1.0, 2.0), h=(0.3, 0.2), c=0.5)
    s = random_field(rng, 4, 4, size=(10,))
    k1, k2, _, _ = estimate_noise_constants(m, s)
    assert k1 == pytest.approx(m.constants.k1, rel=1e-12) and k2 == 0
