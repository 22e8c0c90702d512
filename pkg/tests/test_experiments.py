import numpy as np
import pytest

from sggle.core import DriftTerms, GLParams, SimConfig
from sggle.experiments import (galerkin_scan, gaussian_bump, uniqueness_experiment,
                               write_contraction_csv, write_galerkin_csv)
from sggle.spectral import SpectralField


def test_gaussian_bump():
    u = gaussian_bump(8, 8, amplitude=2.0, phase=1.0)
    assert u.l2_sq() == pytest.approx(4.0, rel=1e-12)
    assert abs(u.coeffs[0, 0]) == np.max(np.abs(u.coeffs))


@pytest.fixture
def small():
    return SimConfig(n1=8, n2=8, dt=1e-3, t_end=0.1, n_paths=6, seed=4)


def test_zero_perturbation(small, params, linear_model):
    run = uniqueness_experiment(small, params, linear_model, gaussian_bump(8, 8), 0.0)
    assert np.all(run.omega_l2_sq == 0)
    assert not run.violations
    assert run.shared_noise()


def test_shared_noise_and_contraction(small, params, linear_model):
    run = uniqueness_experiment(small, params, linear_model, gaussian_bump(8, 8, phase=2.0), 1e-3)
    assert run.n_pairs == 6 and run.shared_noise()
    assert sum(len(j) for j in run.ensemble.jumps) > 0
    mc = run.mean_contraction
    assert mc[-1] < mc[0]
    assert not run.violations
    assert run.max_drift_increment <= small.dt * run.contraction_series[:, 0].min()
    np.testing.assert_allclose(run.omega_l2_sq[:, 0], 1e-6, rtol=1e-12)
    assert np.all(np.diff(run.r_series, axis=1) > 0)
    for i in range(run.n_pairs):
        a, b = run.u1_traj(i), run.u2_traj(i)
        assert [j.time for j in a.jump_log] == [j.time for j in b.jump_log]


def test_heat_contraction_nonincreasing(params):
    p = GLParams(alpha=0.0, beta=0.0, gamma=0.0, sigma=3.0)
    cfg = SimConfig(n1=6, n2=6, dt=1e-3, t_end=0.1, n_paths=3, seed=1)
    run = uniqueness_experiment(cfg, p, None, SpectralField.mode(1, 1, 6, 6), 1e-2,
                                terms=DriftTerms(False, False, False))
    assert np.all(np.diff(run.contraction_series, axis=1) <= 0)
    assert not run.violations


def test_delta_scaling(small, params, linear_model):
    u0 = gaussian_bump(8, 8, phase=2.0)
    a = uniqueness_experiment(small, params, linear_model, u0, 1e-4)
    b = uniqueness_experiment(small, params, linear_model, u0, 2e-4)
    np.testing.assert_allclose(b.omega_l2_sq, 4 * a.omega_l2_sq, rtol=1e-3)


def test_negative_delta(small, params, linear_model):
    with pytest.raises(ValueError):
        uniqueness_experiment(small, params, linear_model, gaussian_bump(8, 8), -1.0)


def test_contraction_csv(tmp_path, small, params, linear_model):
    run = uniqueness_experiment(small, params, linear_model, gaussian_bump(8, 8), 1e-3)
    path = tmp_path / "c.csv"
    write_contraction_csv(path, run)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,r,omega_l2_sq,contraction"
    assert len(lines) == run.times.size + 1


def test_galerkin_scan(tmp_path, params, linear_model):
    cfg = SimConfig(n1=4, n2=4, dt=1e-3, t_end=0.05, n_paths=4, seed=5)
    u0 = gaussian_bump(32, 32, phase=2.0)
    scan = galerkin_scan(cfg, params, linear_model, u0, levels=(4, 8, 16))
    assert scan.decreasing()
    assert set(scan.ensembles) == {4, 8, 16, 32}
    assert scan.table.spread("L31") < 1.2
    with pytest.raises(ValueError):
        galerkin_scan(cfg, params, linear_model, u0, levels=(4, 8))
    path = tmp_path / "g.csv"
    write_galerkin_csv(path, scan)
    assert path.read_text().splitlines()[0] == "n,discrepancy,lemma31_ratio,lemma32_ratio"
