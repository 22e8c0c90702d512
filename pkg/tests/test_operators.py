import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sggle.core import DriftTerms, GLParams
from sggle.operators import (apply_A, eval_F_direct, eval_F_identity, eval_G, eval_T,
                             identity9_check)
from sggle.spectral import (GridSpec, MissingGradient, PhysicalGrid, SpectralField, grid_for,
                            random_field, to_physical)

PI = math.pi


def _grid(values):
    return PhysicalGrid(np.asarray(values, complex).reshape(1, 1), PI, PI)


def test_apply_A():
    u = SpectralField.mode(1, 1, 2, 2, amplitude=0.7)
    assert apply_A(u, GLParams(alpha=0)).coeffs[0, 0] == pytest.approx(-2 * 0.7)
    assert apply_A(u, GLParams(alpha=1)).coeffs[0, 0] == pytest.approx(-(1 + 1j) * 2 * 0.7)
    assert np.all(apply_A(SpectralField.zeros(2, 2), GLParams()).coeffs == 0)


def test_apply_A_linear(rng):
    p = GLParams(alpha=0.3)
    u, v = random_field(rng, 4, 4), random_field(rng, 4, 4)
    c = 1.5 - 2j
    np.testing.assert_allclose(apply_A(u * c + v, p).coeffs,
                               (apply_A(u, p) * c + apply_A(v, p)).coeffs, rtol=1e-15, atol=1e-14)


def test_eval_T_points():
    assert eval_T(_grid(0), GLParams()).values[0, 0] == 0
    assert eval_T(_grid(1), GLParams(beta=0, sigma=3)).values[0, 0] == -1
    assert eval_T(_grid(2j), GLParams(beta=1, sigma=2)).values[0, 0] == pytest.approx(-32 - 32j)


def test_T_homogeneity_and_energy_sign(rng):
    p = GLParams(beta=0.4, sigma=3)
    u = random_field(rng, 6, 6)
    spec = grid_for(6, 6, 3)
    g = to_physical(u, spec)
    g2 = to_physical(u * 1.7, spec)
    np.testing.assert_allclose(eval_T(g2, p).values, 1.7 ** 7 * eval_T(g, p).values, rtol=1e-12)
    Tu = eval_G(u, p, spec, DriftTerms(True, False, False)).t_part
    pairing = np.sum(Tu.coeffs * np.conj(u.coeffs)).real
    q = g.integrate(np.abs(g.values) ** 8)
    assert pairing == pytest.approx(-q, rel=1e-8)


def test_A_dissipative(rng):
    u = random_field(rng, 6, 6)
    a = apply_A(u, GLParams(alpha=2.0))
    assert np.sum(a.coeffs * np.conj(u.coeffs)).real == pytest.approx(-u.h1_sq(), rel=1e-14)


def test_F_examples(rng):
    p = GLParams(lambda1=(0.3 + 0.1j, -0.2j), lambda2=(0.5, 0.25 + 1j))
    spec = GridSpec(32, 32)
    assert np.all(eval_F_direct(to_physical(SpectralField.zeros(4, 4), spec, True), p).values == 0)
    ur = random_field(rng, 6, 6, real=True)
    g = to_physical(ur, spec, gradient=True)
    lam = 3 * p.lam1 + p.lam2
    want = (lam[0] * g.grad_x + lam[1] * g.grad_y) * g.values ** 2
    np.testing.assert_allclose(eval_F_direct(g, p).values, want, atol=1e-13)
    u = SpectralField.mode(1, 1, 4, 4)
    g = to_physical(u, spec, gradient=True)
    d = eval_F_direct(g, p).values
    assert np.max(np.abs(eval_F_identity(g, p).values - d)) < 1e-10 * np.max(np.abs(d))
    with pytest.raises(MissingGradient):
        eval_F_direct(to_physical(u, spec), p)


def test_F_identity_lambda1_zero(rng):
    p = GLParams(lambda1=(0, 0), lambda2=(0.5j, 0.2))
    g = to_physical(random_field(rng, 5, 5), GridSpec(24, 24), gradient=True)
    np.testing.assert_array_equal(eval_F_identity(g, p).values, eval_F_direct(g, p).values)


def test_F_cubic(rng, params):
    spec = grid_for(6, 6, 3)
    u = random_field(rng, 6, 6)
    a = eval_F_direct(to_physical(u, spec, True), params).values
    b = eval_F_direct(to_physical(u * -2.5, spec, True), params).values
    np.testing.assert_allclose(b, (-2.5) ** 3 * a, rtol=1e-12)


def test_identity9(rng):
    p = GLParams(lambda1=(0.3 + 0.1j, -0.2j), lambda2=(0.5, 0.25 + 1j))
    good, bad = identity9_check(random_field(rng, 8, 8, real=True), p)
    assert good < 1e-12 and bad < 1e-12
    good, bad = identity9_check(random_field(rng, 8, 8), p)
    assert good < 1e-10 and bad > 1e-2
    assert identity9_check(SpectralField.zeros(4, 4), p) == (0.0, 0.0)


def test_eval_G_parts(rng, params):
    u = random_field(rng, 6, 6)
    d = eval_G(u, params)
    np.testing.assert_array_equal(d.total.coeffs, d.a_part.coeffs + d.t_part.coeffs
                                  + d.gamma_part.coeffs + d.f_part.coeffs)
    z = eval_G(SpectralField.zeros(6, 6), params)
    assert all(np.all(x.coeffs == 0) for x in (z.a_part, z.t_part, z.gamma_part, z.f_part))


def test_eval_G_small_amplitude(rng):
    p = GLParams(alpha=0, beta=0, gamma=0.7, sigma=3)
    u = random_field(rng, 6, 6, amplitude=1e-4)
    d = eval_G(u, p)
    lin = d.a_part.coeffs + p.gamma * u.coeffs
    assert np.max(np.abs(d.total.coeffs - lin)) < 1e-10


def test_t_part_single_mode_quadrature():
    p = GLParams(beta=0.3, sigma=3)
    u = SpectralField.mode(1, 1, 3, 3)
    t = eval_G(u, p, terms=DriftTerms(True, False, False)).t_part.coeffs[0, 0]
    x = (np.arange(400) + 0.5) * PI / 400
    e = (2 / PI) * np.sin(x)[:, None] * np.sin(x)[None, :]
    brute = -(1 - 0.3j) * np.sum(e ** 8) * (PI / 400) ** 2
    assert t == pytest.approx(brute, rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_route_equivalence_property(seed):
    g = np.random.default_rng(seed)
    p = GLParams(lambda1=tuple(g.normal(size=2) + 1j * g.normal(size=2)),
                 lambda2=tuple(g.normal(size=2) + 1j * g.normal(size=2)))
    assert identity9_check(random_field(g, 6, 6), p)[0] < 1e-10
