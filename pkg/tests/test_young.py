import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sggle.core import GLParams, MonotonicityConfig
from sggle.gn import SAFETY, gn_constant, gn_ratio, gn_supremum
from sggle.young import (coercivity, default_eps, pair_coefficient, phi_weight, r_prime,
                         young_C, young_constants)


@settings(max_examples=50)
@given(st.floats(0.01, 10), st.floats(1.2, 8), st.floats(0.01, 10))
def test_young_C_is_sharp(eps, p, y):
    xstar = (y / (eps * p)) ** (1 / (p - 1))
    x = np.linspace(0, 2 * xstar, 200_001)
    best = np.max(x * y - eps * x ** p)
    bound = young_C(eps, p) * y ** (p / (p - 1))
    assert best <= bound * (1 + 1e-9)
    assert best >= bound * (1 - 1e-6)


def test_young_C_rejects():
    with pytest.raises(ValueError):
        young_C(1.0, 1.0)


def test_gn_trivial_and_bounded(rng):
    assert gn_supremum(2.0) == 1.0
    for r in (4.0, 6.0):
        G = gn_constant(r)
        for _ in range(20):
            a = rng.normal(size=(6, 6)) * np.exp(-rng.uniform(0, 1) * np.arange(6))[:, None]
            assert gn_ratio(a, r) <= G


def test_gn_scale_invariance(rng):
    a = rng.normal(size=(5, 5))
    assert gn_ratio(a, 6.0, L1=1.0, L2=1.0) == pytest.approx(gn_ratio(a, 6.0, L1=3.0, L2=3.0), rel=1e-10)
    assert gn_ratio(3 * a, 6.0) == pytest.approx(gn_ratio(a, 6.0), rel=1e-12)


def test_gn_table_values():
    # regression lock on the extremization at n = 16
    assert gn_supremum(4.0) == pytest.approx(0.6428, abs=2e-3)
    assert gn_supremum(6.0) == pytest.approx(0.5992, abs=2e-3)
    assert gn_constant(6.0) == pytest.approx(SAFETY * gn_supremum(6.0))


def test_pair_coefficient(params):
    j = 2 * np.linalg.norm(2 * params.lam1 + params.lam2)
    k = 2 * np.linalg.norm(params.lam1)
    assert pair_coefficient(params, "J") == pytest.approx(j)
    assert pair_coefficient(params, "JK") == pytest.approx(j + k)


def test_default_eps_gives_contraction(params):
    for beta_frac in (0.1, 0.5, 0.95):
        p = params.replace(beta=beta_frac * params.beta_threshold)
        for k4 in (0.0, 0.5, 1.5):
            m = MonotonicityConfig.derive(p, default_eps(p, k4), k4)
            assert m.contraction_valid(p, k4)


def test_constants_zero_without_derivative_terms():
    p = GLParams(sigma=3.0)
    c = young_constants(default_eps(p), 3.0, 0.0)
    assert c.C89 == c.C1011 == c.C1213 == c.C1415 == 0.0


def test_constants_monotone_in_kappa(params):
    e = default_eps(params)
    a, b = young_constants(e, 3.0, 0.1), young_constants(e, 3.0, 0.2)
    assert b.C89 > a.C89 and b.C1011 > a.C1011 and b.C1213 > a.C1213 and b.C1415 > a.C1415
    # C89 ~ kappa^(2 s / (s - 2))
    assert b.C89 / a.C89 == pytest.approx(2 ** 6, rel=1e-12)


def test_sigma_guard():
    with pytest.raises(ValueError):
        young_constants(default_eps(GLParams()), 2.0, 0.1)


def test_r_prime_and_weight(params):
    m = MonotonicityConfig.derive(params)
    c, e = m.constants, m.eps
    assert phi_weight(c, e, 0.0, 0.0) == 0.0
    assert r_prime(c, e, 0.1, 0.3, 0.0, 0.0) == pytest.approx(2 * (c.C89 + 0.1) + 0.3)
    w = phi_weight(c, e, 1.5, 2.0)
    p1, p2, p3 = c.exponents
    assert w == pytest.approx((e[13] + e[15]) * 2.25 + c.C1011 * 2 ** p1 + c.C1213 * 2 ** p2
                              + c.C1415 * 2 ** p3)
    assert p1 == 3.0 and p2 == pytest.approx(19 / 4) and p3 == pytest.approx(34 / 7)


def test_coercivity():
    assert coercivity(GLParams(sigma=3, beta=0.5)) == pytest.approx(1 - 1.5 / math.sqrt(7))
    assert coercivity(GLParams(sigma=3, beta=math.sqrt(7) / 3)) == pytest.approx(0, abs=1e-15)
