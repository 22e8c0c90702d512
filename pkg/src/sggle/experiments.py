"""End-to-end studies: shared-noise contraction and Galerkin self-convergence."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import rng as rngmod
from .core import DriftTerms, GLParams, MonotonicityConfig, SimConfig
from .diagnostics import UniformityTable, uniformity_scan
from .inequalities import r_function
from .integrator import EnsembleResult, Trajectory, _draw_events, _tree_mean, simulate_ensemble
from .noise import JumpModel
from .spectral import SpectralField, get_transform, random_field

InitialData = SpectralField | Callable[[np.random.Generator], SpectralField]


def gaussian_bump(n1: int, n2: int, L1: float = math.pi, L2: float = math.pi,
                  width: float = 0.4, amplitude: float = 1.0, center=None,
                  phase: float = 0.0) -> SpectralField:
    """Sine projection of a Gaussian bump, normalized to ||u|| = amplitude."""
    cx, cy = center if center is not None else (L1 / 2, L2 / 2)
    M = 8 * max(n1, n2)
    plan = get_transform(n1, n2, M, M, L1, L2)
    x = np.arange(1, M + 1) * L1 / (M + 1)
    y = np.arange(1, M + 1) * L2 / (M + 1)
    g = np.exp(-((x[:, None] - cx) ** 2 + (y[None, :] - cy) ** 2) / (2 * width ** 2))
    g = g * np.exp(1j * phase * (x[:, None] / L1 + y[None, :] / L2))
    a = plan.forward(g)
    return SpectralField(a * (amplitude / np.sqrt(np.sum(np.abs(a) ** 2))), L1, L2)


# -- uniqueness ----------------------------------------------------------------

@dataclass(eq=False)
class ContractionRun:
    """Pairs (u1, u2) driven by identical jump events.

    Arrays carry a leading pair axis and a trailing time axis.  ``violations``
    lists (pair, t, increment) for drift-only steps on which the contraction
    series grew by more than ``tol``; steps containing a jump are listed in
    ``jump_increments`` and are not held to that test.
    ``max_drift_increment`` is the largest increment over all drift-only
    steps of conclusive pairs.
    """

    times: np.ndarray
    ensemble: EnsembleResult
    r_series: np.ndarray
    omega_l2_sq: np.ndarray
    contraction_series: np.ndarray
    violations: list[tuple[int, float, float]]
    jump_increments: list[tuple[int, float, float]]
    inconclusive: np.ndarray
    tol: float
    max_drift_increment: float = 0.0

    @property
    def n_pairs(self) -> int:
        return self.r_series.shape[0]

    def u1_traj(self, i: int = 0) -> Trajectory:
        return self.ensemble.trajectory(i)

    def u2_traj(self, i: int = 0) -> Trajectory:
        return self.ensemble.trajectory(self.n_pairs + i)

    def shared_noise(self) -> bool:
        P = self.n_pairs
        return all(self.ensemble.jumps[i] is not None and
                   [(j.time, j.mark_index) for j in self.ensemble.jumps[i]]
                   == [(j.time, j.mark_index) for j in self.ensemble.jumps[P + i]]
                   for i in range(P))

    @property
    def mean_contraction(self) -> np.ndarray:
        ok = ~self.inconclusive
        if not np.any(ok):
            return np.full(self.times.shape, np.nan)
        return _tree_mean(self.contraction_series[ok])


def _perturbation(seed: int, i: int, n1: int, n2: int, L1: float, L2: float) -> np.ndarray:
    g = rngmod.stream(seed, i, rngmod.PERTURB)
    return random_field(g, n1, n2, L1, L2, 2.0, 1.0).coeffs


def uniqueness_experiment(config: SimConfig, params: GLParams, model: JumpModel | None,
                          u0: InitialData, delta: float, mono: MonotonicityConfig | None = None,
                          terms: DriftTerms = DriftTerms(), slack: float = 1.0,
                          threads: int | None = None) -> ContractionRun:
    """Evolve u1 from u0 and u2 = u0 + delta * v (||v|| = 1) under shared jumps.

    The pair count is ``config.n_paths``; each pair draws its perturbation
    and events from the streams of its own index.  r(t) is integrated
    along the u2 trajectory.  A drift-only step counts as a violation when
    the contraction series grows by more than slack * dt * (its value at 0).
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    mono = mono or MonotonicityConfig.derive(params, k4=model.constants.k4 if model else 0.0)
    P, n1, n2 = config.n_paths, config.n1, config.n2
    if callable(u0):
        base = np.stack([u0(rngmod.stream(config.seed, i, rngmod.INITIAL)).resized(n1, n2).coeffs
                         for i in range(P)])
    else:
        base = np.broadcast_to(u0.resized(n1, n2).coeffs, (P, n1, n2))
    pert = np.stack([_perturbation(config.seed, i, n1, n2, params.L1, params.L2) for i in range(P)])
    init = np.concatenate([base, base + delta * pert])
    events = _draw_events(model, config.t_end, config.seed, range(P))
    events = list(events) + list(events)
    omega = []

    def observe(k, t, u):
        omega.append(np.sum(np.abs(u[:P] - u[P:]) ** 2, axis=(-2, -1)))

    cfg2 = config.replace(n_paths=2 * P)
    res = simulate_ensemble(cfg2, params, model, SpectralField(init, params.L1, params.L2), terms,
                            events=events, threads=threads, observer=observe)
    om = np.stack(omega, axis=1)
    k3 = model.constants.k3 if model is not None else 0.0
    s = res.series
    r = r_function(res.times, s.l2_sq[P:], s.h1_sq[P:], mono, params.gamma, k3)
    contraction = np.exp(-r) * om
    inconclusive = ~np.isnan(res.stopped_at[:P]) | ~np.isnan(res.stopped_at[P:])
    tol = slack * config.dt * contraction[:, :1]
    inc = np.diff(contraction, axis=1)
    violations, jumps = [], []
    worst = -np.inf
    t = res.times
    for i in range(P):
        if inconclusive[i]:
            continue
        jt = np.array([j.time for j in res.jumps[i]])
        has_jump = np.zeros(t.size - 1, bool)
        if jt.size:
            idx = np.searchsorted(t, jt, side="left") - 1
            has_jump[np.clip(idx, 0, t.size - 2)] = True
        for k in np.flatnonzero(has_jump):
            jumps.append((i, float(t[k + 1]), float(inc[i, k])))
        if np.any(~has_jump):
            worst = max(worst, float(np.max(inc[i, ~has_jump])))
        bad = np.flatnonzero(~has_jump & (inc[i] > tol[i]))
        violations.extend((i, float(t[k + 1]), float(inc[i, k])) for k in bad)
    return ContractionRun(t, res, r, om, contraction, violations, jumps, inconclusive,
                          float(slack * config.dt), worst)


def write_contraction_csv(path, run: ContractionRun) -> None:
    """Pair-averaged series over conclusive pairs."""
    ok = ~run.inconclusive
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "r", "omega_l2_sq", "contraction"])
        if not np.any(ok):
            return
        r = _tree_mean(run.r_series[ok])
        om = _tree_mean(run.omega_l2_sq[ok])
        c = _tree_mean(run.contraction_series[ok])
        for k, t in enumerate(run.times):
            w.writerow(["%.17g" % v for v in (t, r[k], om[k], c[k])])


# -- Galerkin scan -------------------------------------------------------------

@dataclass(eq=False)
class GalerkinScan:
    levels: tuple[int, ...]
    discrepancy: np.ndarray       # mean over paths of ||u_n(T) - u_2n(T)||
    discrepancy_se: np.ndarray
    table: UniformityTable
    ensembles: dict

    def decreasing(self) -> bool:
        return bool(np.all(np.diff(self.discrepancy) < 0))

    def rows(self) -> list[tuple[int, float, float, float]]:
        return [(n, float(d), self.table.stats[n][0].ratio, self.table.stats[n][1].ratio)
                for n, d in zip(self.levels, self.discrepancy)]


def galerkin_scan(config: SimConfig, params: GLParams, model: JumpModel | None, u0: InitialData,
                  levels: Sequence[int] = (8, 16, 32), terms: DriftTerms = DriftTerms(),
                  p: float = 4.0, threads: int | None = None) -> GalerkinScan:
    """Runs at every level n and at 2 max(n), all with the same seed.

    Jump events depend only on the seed and path index, so every level sees
    the same noise; u_n(0) is the truncation of the same initial field.
    """
    levels = tuple(sorted(int(n) for n in levels))
    if len(levels) < 3:
        raise ValueError("need at least three levels")
    runs = {}
    for n in sorted(set(levels) | {2 * n for n in levels}):
        cfg = config.replace(n1=n, n2=n)
        runs[n] = simulate_ensemble(cfg, params, model, u0, terms, threads=threads)
    disc, se = [], []
    for n in levels:
        lo, hi = runs[n], runs[2 * n]
        ok = np.isnan(lo.stopped_at) & np.isnan(hi.stopped_at)
        pad = np.zeros_like(hi.final)
        pad[:, :n, :n] = lo.final
        d = np.sqrt(np.sum(np.abs(pad - hi.final) ** 2, axis=(-2, -1)))[ok]
        disc.append(float(_tree_mean(d)) if d.size else np.nan)
        se.append(float(np.std(d, ddof=1) / np.sqrt(d.size)) if d.size > 1 else 0.0)
    table = uniformity_scan({n: runs[n] for n in levels}, p, params.sigma)
    return GalerkinScan(levels, np.array(disc), np.array(se), table, runs)


def write_galerkin_csv(path, scan: GalerkinScan) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "discrepancy", "lemma31_ratio", "lemma32_ratio"])
        for n, d, r1, r2 in scan.rows():
            w.writerow([n, "%.17g" % d, "%.17g" % r1, "%.17g" % r2])
