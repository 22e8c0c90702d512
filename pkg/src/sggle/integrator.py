"""Time stepping of the Galerkin jump SDE.

Between jumps the state follows a Lawson (integrating-factor) Euler step

    u <- exp(L h) * (u + h N(u)),

where L = -(1 + i alpha) mu + gamma (minus c sum nu_i h_i for the linear
noise family, whose compensator is linear) is diagonal in the sine basis,
and N collects the projected nonlinearity together with any nonlinear
compensator.  Jumps are applied at their exact sampled times with the
left-limit state as input, so the compound Poisson part is exact in law.

Paths are advanced in lockstep batches.  Each path draws its events from
its own counter-based stream, and the batch composition is fixed by a
chunk size that does not depend on the number of worker threads, so
ensemble output is reproducible bit for bit.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import rng as rngmod
from .core import DriftTerms, GLParams, SimConfig
from .noise import JumpEvent, JumpModel, NoiseOperator, sample_events
from .operators import abs2, bdot, pow_sigma
from .spectral import GridSpec, SpectralField, eigenvalues, get_transform, grid_for

CHUNK = 64
FIELDS = ("l2_sq", "h1_sq", "l2s2_pow", "mixed", "lap_sq")


class InsufficientSnapshots(ValueError):
    pass


@dataclass(frozen=True)
class EnergyRecord:
    t: float
    l2_sq: float
    h1_sq: float
    l2s2_pow: float
    mixed: float
    lap_sq: float = 0.0


@dataclass(eq=False)
class EnergySeries:
    """Struct-of-arrays energy records; arrays share a trailing time axis."""

    t: np.ndarray
    l2_sq: np.ndarray
    h1_sq: np.ndarray
    l2s2_pow: np.ndarray
    mixed: np.ndarray
    lap_sq: np.ndarray

    def records(self) -> list[EnergyRecord]:
        if self.l2_sq.ndim != 1:
            raise ValueError("records() needs a single path")
        return [EnergyRecord(float(self.t[i]), *(float(getattr(self, f)[i]) for f in FIELDS))
                for i in range(self.t.size)]

    def path(self, i: int) -> "EnergySeries":
        return EnergySeries(self.t, *(getattr(self, f)[i] for f in FIELDS))

    def take(self, idx) -> "EnergySeries":
        return EnergySeries(self.t, *(getattr(self, f)[idx] for f in FIELDS))


@dataclass(eq=False)
class JumpRecord:
    """One realized jump: left limit and post-jump state with their energies."""

    time: float
    mark_index: int
    pre: EnergyRecord
    post: EnergyRecord
    pre_state: np.ndarray | None = None
    post_state: np.ndarray | None = None


@dataclass(eq=False)
class Trajectory:
    """A single path.  ``series`` holds records at grid times; ``jumps`` the
    left-limit and post-jump records at jump times."""

    times: np.ndarray
    series: EnergySeries
    snap_times: np.ndarray
    snapshots: np.ndarray
    jumps: list[JumpRecord]
    stopped_at: float | None
    nonfinite: bool
    L1: float
    L2: float
    terms: DriftTerms = DriftTerms()
    snap_every: int = 0

    @property
    def records(self) -> list[EnergyRecord]:
        return self.series.records()

    @property
    def jump_log(self) -> list[JumpEvent]:
        return [JumpEvent(j.time, j.mark_index) for j in self.jumps]

    @property
    def states(self) -> list[SpectralField]:
        return [SpectralField(s, self.L1, self.L2) for s in self.snapshots]

    @property
    def final(self) -> SpectralField:
        return SpectralField(self.snapshots[-1], self.L1, self.L2)

    def all_times(self) -> np.ndarray:
        return np.union1d(self.times, [j.time for j in self.jumps])


@dataclass(eq=False)
class EnsembleResult:
    times: np.ndarray
    series: EnergySeries              # arrays (P, K+1)
    final: np.ndarray                 # (P, n1, n2)
    initial: np.ndarray               # (P, n1, n2)
    stopped_at: np.ndarray            # (P,), nan where never stopped
    nonfinite: np.ndarray             # (P,) bool
    jumps: list[list[JumpRecord]]
    L1: float
    L2: float
    snap_times: np.ndarray | None = None
    snapshots: np.ndarray | None = None  # (S, P, n1, n2)
    terms: DriftTerms = DriftTerms()
    snap_every: int = 0

    @property
    def n_paths(self) -> int:
        return self.final.shape[0]

    def trajectory(self, i: int) -> Trajectory:
        if self.snapshots is not None:
            st, snaps = self.snap_times, self.snapshots[:, i]
        else:
            st = self.times[[0, -1]]
            snaps = np.stack([self.initial[i], self.final[i]])
        stop = self.stopped_at[i]
        return Trajectory(self.times, self.series.path(i), st, snaps, self.jumps[i],
                          None if math.isnan(stop) else float(stop), bool(self.nonfinite[i]),
                          self.L1, self.L2, self.terms, self.snap_every)


# -- drift evaluation ----------------------------------------------------------

class DriftEvaluator:
    """Nonlinear drift N(u) for the Lawson step plus grid energy quadratures."""

    def __init__(self, params: GLParams, model: JumpModel | None, n1: int, n2: int,
                 terms: DriftTerms = DriftTerms(), spec: GridSpec | None = None):
        self.params, self.model, self.terms = params, model, terms
        self.spec = spec or grid_for(n1, n2, params.sigma)
        self.plan = get_transform(n1, n2, self.spec.M1, self.spec.M2, params.L1, params.L2)
        self.w = self.plan.weight
        self.mu = eigenvalues(n1, n2, params.L1, params.L2)
        self.use_F = terms.derivative and bool(np.any(params.lam1) or np.any(params.lam2))
        self.quad_comp = (model is not None and model.family == "quadratic" and model.nu_h > 0)
        lin = -(1 + 1j * params.alpha) * self.mu
        if terms.gain:
            lin = lin + params.gamma
        if model is not None and model.family == "linear":
            lin = lin - model.c * model.nu_h
        self.lin = lin
        self.noise = NoiseOperator(model, n1, n2, params.L1, params.L2, self.spec,
                                   params.sigma) if model is not None else None

    @property
    def has_nonlinearity(self) -> bool:
        return self.terms.cubic or self.use_F or self.quad_comp

    def evaluate(self, coeffs: np.ndarray):
        """Return (N, Q, mixed, reF, reC) for a batch of coefficient arrays.

        Q = int |u|^(2 sigma + 2), mixed = int |u|^(2 sigma)|grad u|^2,
        reF = Re int F(u) conj(u), reC = Re int comp(u) conj(u) for the
        nonlinear compensator (zero otherwise).
        """
        p = self.params
        v, gx, gy = self.plan.backward(coeffs, gradient=True)
        s2 = abs2(v)
        us = pow_sigma(s2, p.sigma)
        w = self.w
        Q = w * np.sum(us * s2, axis=(-2, -1))
        mixed = w * np.sum(us * (abs2(gx) + abs2(gy)), axis=(-2, -1))
        zero = np.zeros(v.shape[:-2])
        reF, reC = zero, zero
        if not self.has_nonlinearity:
            return np.zeros_like(coeffs), Q, mixed, reF, reC
        out = np.zeros_like(v)
        if self.terms.cubic:
            out += (-(1 - 1j * p.beta)) * us * v
        if self.use_F:
            F = (bdot(2 * p.lam1 + p.lam2, gx, gy) * s2
                 + bdot(p.lam1, np.conj(gx), np.conj(gy)) * (v * v))
            out += F
            reF = w * np.sum((F * np.conj(v)).real, axis=(-2, -1))
        if self.quad_comp:
            mod = np.sqrt(s2)
            cap = self.model.cap
            q = v * (np.minimum(mod, cap) if math.isfinite(cap) else mod) * (0.5 * self.model.nu_h)
            out -= q
            reC = w * np.sum((q * np.conj(v)).real, axis=(-2, -1))
        return self.plan.forward(out), Q, mixed, reF, reC

    def propagator(self, h) -> np.ndarray:
        h = np.asarray(h, float)
        return np.exp(self.lin * h.reshape(h.shape + (1, 1)))

    def linear_integrals(self, v: np.ndarray, h) -> tuple[np.ndarray, np.ndarray]:
        """Exact int_0^h of ||e^{Ls} v||^2 and ||grad e^{Ls} v||^2 ds, per row."""
        h = np.asarray(h, float).reshape(np.shape(h) + (1, 1))
        lam = 2 * self.lin.real
        x = lam * h
        with np.errstate(over="ignore", invalid="ignore"):
            phi = np.where(np.abs(x) < 1e-8, h * (1 + x / 2), np.expm1(x) / np.where(lam == 0, 1, lam))
        a2 = abs2(v) * phi
        return np.sum(a2, axis=(-2, -1)), np.sum(self.mu * a2, axis=(-2, -1))


def _spectral_energy(coeffs, mu):
    a2 = abs2(coeffs)
    return (np.sum(a2, axis=(-2, -1)), np.sum(mu * a2, axis=(-2, -1)),
            np.sum(mu * mu * a2, axis=(-2, -1)))


# -- single-step API -----------------------------------------------------------

def drift_step(u: SpectralField, dt: float, params: GLParams, model: JumpModel | None = None,
               terms: DriftTerms = DriftTerms(), spec: GridSpec | None = None) -> SpectralField:
    """One Lawson-Euler step of the drift (compensator included)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    ev = DriftEvaluator(params, model, u.n1, u.n2, terms, spec)
    N = ev.evaluate(u.coeffs)[0] if ev.has_nonlinearity else 0.0
    out = ev.propagator(dt) * (u.coeffs + dt * N)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("non-finite state after drift step")
    return u.with_coeffs(out)


def apply_jump(u: SpectralField, event: JumpEvent, model: JumpModel, t: float | None = None,
               spec: GridSpec | None = None, sigma: float = 3.0) -> SpectralField:
    """u(tau) = u(tau-) + P_n g(tau, u(tau-), z)."""
    op = NoiseOperator(model, u.n1, u.n2, u.L1, u.L2, spec, sigma)
    return u.with_coeffs(u.coeffs + op.jump(u.coeffs, model.h[event.mark_index]))


# -- batched path simulation ---------------------------------------------------

Events = Sequence[tuple[np.ndarray, np.ndarray]]  # per path (times, marks)
Observer = Callable[[int, float, np.ndarray], None]


def _draw_events(model: JumpModel | None, t_end: float, seed: int, paths: Sequence[int]):
    out = []
    for p in paths:
        if model is None or model.is_zero:
            out.append((np.empty(0), np.empty(0, np.int64)))
            continue
        ev = sample_events(model, t_end, rngmod.stream(seed, p, rngmod.NOISE))
        out.append((np.array([e.time for e in ev]), np.array([e.mark_index for e in ev], np.int64)))
    return out


def _run_batch(u0: np.ndarray, events: Events, config: SimConfig, ev: DriftEvaluator,
               keep_jump_states: bool, snap_every: int, observer: Observer | None):
    P = u0.shape[0]
    tg = config.grid_times()
    K = tg.size - 1
    mu = ev.mu
    model = ev.model
    R = config.blowup_radius
    u = np.array(u0, complex)
    ser = {f: np.zeros((P, K + 1)) for f in FIELDS}
    stopped = np.zeros(P, bool)
    nonfinite = np.zeros(P, bool)
    stopped_at = np.full(P, np.nan)
    jptr = np.zeros(P, np.int64)
    jumps: list[list[JumpRecord]] = [[] for _ in range(P)]
    jt = [e[0] for e in events]
    jm = [e[1] for e in events]
    snaps, snap_t = [], []
    E_dt = ev.propagator(config.dt)
    need_N = ev.has_nonlinearity

    def record(k, coeffs, Q, mixed):
        l2, h1, lap = _spectral_energy(coeffs, mu)
        ser["l2_sq"][:, k], ser["h1_sq"][:, k], ser["lap_sq"][:, k] = l2, h1, lap
        ser["l2s2_pow"][:, k], ser["mixed"][:, k] = Q, mixed

    def energy_rec(t, coeffs, Q, mixed):
        l2, h1, lap = _spectral_energy(coeffs, mu)
        return EnergyRecord(t, float(l2), float(h1), float(Q), float(mixed), float(lap))

    def next_jump(i):
        return jt[i][jptr[i]] if jptr[i] < jt[i].size else math.inf

    for k in range(K + 1):
        t0 = tg[k]
        N, Q, mixed, _, _ = ev.evaluate(u)
        record(k, u, Q, mixed)
        if observer is not None:
            observer(k, t0, u)
        if snap_every and (k % snap_every == 0 or k == K):
            snaps.append(u.copy())
            snap_t.append(t0)
        if k == K:
            break
        t1 = tg[k + 1]
        cur = np.full(P, t0)
        first = True
        while True:
            live = np.flatnonzero(~stopped & (cur < t1))
            if live.size == 0:
                break
            nxt = np.array([next_jump(i) for i in live])
            target = np.minimum(nxt, t1)
            h = target - cur[live]
            full_step = first and live.size == P and np.all(target == t1) and abs(t1 - t0 - config.dt) < 1e-15
            E = E_dt if full_step else ev.propagator(h)
            if need_N:
                new = E * (u[live] + h[:, None, None] * N[live])
            else:
                new = E * u[live]
            ok = np.all(np.isfinite(new), axis=(-2, -1))
            if not np.all(ok):
                bad = live[~ok]
                stopped[bad] = True
                nonfinite[bad] = True
                stopped_at[bad] = target[~ok]
            good = live[ok]
            u[good] = new[ok]
            cur[live] = target
            first = False
            l2 = np.sum(abs2(u[good]), axis=(-2, -1))
            hit = good[l2 >= R]
            stopped[hit] = True
            stopped_at[hit] = cur[hit]
            # jumps landing in this sub-step
            jumping = good[(nxt[ok] <= t1) & (target[ok] == nxt[ok])]
            jumping = jumping[~stopped[jumping]]
            if jumping.size == 0:
                continue
            marks = np.array([jm[i][jptr[i]] for i in jumping])
            hvals = np.asarray(model.h)[marks]
            pre = u[jumping].copy()
            Npre, Qpre, mpre, _, _ = ev.evaluate(pre)
            post = pre + ev.noise.jump(pre, hvals)
            okj = np.all(np.isfinite(post), axis=(-2, -1))
            post[~okj] = pre[~okj]
            Npost, Qpost, mpost, _, _ = ev.evaluate(post)
            u[jumping] = post
            N[jumping] = Npost
            for r, i in enumerate(jumping):
                t = float(cur[i])
                jumps[i].append(JumpRecord(
                    t, int(marks[r]),
                    energy_rec(t, pre[r], Qpre[r], mpre[r]),
                    energy_rec(t, post[r], Qpost[r], mpost[r]),
                    pre[r].copy() if keep_jump_states else None,
                    post[r].copy() if keep_jump_states else None))
                jptr[i] += 1
                if not okj[r]:
                    stopped[i] = nonfinite[i] = True
                    stopped_at[i] = t
                elif np.sum(abs2(post[r])) >= R:
                    stopped[i] = True
                    stopped_at[i] = t
    series = EnergySeries(tg, *(ser[f] for f in FIELDS))
    snap_arr = np.stack(snaps) if snaps else None
    return series, u, stopped_at, nonfinite, jumps, (np.array(snap_t) if snaps else None), snap_arr


def _threads(threads: int | None) -> int:
    if threads is None:
        env = os.environ.get("SGGLE_THREADS")
        threads = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(threads))


def simulate_ensemble(config: SimConfig, params: GLParams, model: JumpModel | None,
                      u0, terms: DriftTerms = DriftTerms(), *, events: Events | None = None,
                      threads: int | None = None, chunk: int = CHUNK,
                      keep_jump_states: bool = False, observer: Observer | None = None,
                      spec: GridSpec | None = None, path_offset: int = 0) -> EnsembleResult:
    """Simulate ``config.n_paths`` independent paths.

    ``u0`` is a SpectralField (shared by all paths, or with a leading path
    axis) or a callable ``u0(rng) -> SpectralField`` drawn from each path's
    own initial-condition stream.  ``events`` overrides the sampled jumps.
    An ``observer`` sees the whole batch at every grid time and forces a
    single chunk.
    """
    P, n1, n2 = config.n_paths, config.n1, config.n2
    paths = range(path_offset, path_offset + P)
    if callable(u0):
        init = np.stack([u0(rngmod.stream(config.seed, p, rngmod.INITIAL)).resized(n1, n2).coeffs
                         for p in paths])
    else:
        a = u0.resized(n1, n2).coeffs
        init = np.broadcast_to(a, (P, n1, n2)).copy() if a.ndim == 2 else np.array(a)
    if init.shape != (P, n1, n2):
        raise ValueError(f"initial data shape {init.shape} does not match {(P, n1, n2)}")
    if events is None:
        events = _draw_events(model, config.t_end, config.seed, paths)
    if len(events) != P:
        raise ValueError("need one event list per path")
    ev = DriftEvaluator(params, model, n1, n2, terms, spec)
    if observer is not None:
        chunk = P
    bounds = [(s, min(s + chunk, P)) for s in range(0, P, chunk)]

    def work(b):
        s, e = b
        # overflow inside a path is expected; it is caught and flagged as non-finite
        with np.errstate(over="ignore", invalid="ignore"):
            return _run_batch(init[s:e], events[s:e], config, ev, keep_jump_states,
                              config.snap_every, observer)

    nt = _threads(threads)
    if nt > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(nt) as pool:
            parts = list(pool.map(work, bounds))
    else:
        parts = [work(b) for b in bounds]
    tg = parts[0][0].t
    series = EnergySeries(tg, *(np.concatenate([getattr(p[0], f) for p in parts]) for f in FIELDS))
    snaps = None
    if parts[0][6] is not None:
        snaps = np.concatenate([p[6] for p in parts], axis=1)
    return EnsembleResult(
        times=tg, series=series,
        final=np.concatenate([p[1] for p in parts]),
        initial=init,
        stopped_at=np.concatenate([p[2] for p in parts]),
        nonfinite=np.concatenate([p[3] for p in parts]),
        jumps=[j for p in parts for j in p[4]],
        L1=params.L1, L2=params.L2,
        snap_times=parts[0][5], snapshots=snaps, terms=terms,
        snap_every=config.snap_every,
    )


def simulate_path(config: SimConfig, params: GLParams, model: JumpModel | None,
                  u0: SpectralField, rng: np.random.Generator | None = None,
                  terms: DriftTerms = DriftTerms(), events: list[JumpEvent] | None = None,
                  spec: GridSpec | None = None) -> Trajectory:
    """Single path with full bookkeeping (jump states kept).

    Jumps are drawn from ``rng`` when given, otherwise from the stream of
    path 0 under ``config.seed``.
    """
    cfg = config.replace(n_paths=1)
    if events is None and rng is not None:
        events = sample_events(model, cfg.t_end, rng) if model is not None and not model.is_zero else []
    ev_arr = None
    if events is not None:
        ev_arr = [(np.array([e.time for e in events], float),
                   np.array([e.mark_index for e in events], np.int64))]
    res = simulate_ensemble(cfg, params, model, u0, terms, events=ev_arr, threads=1,
                            keep_jump_states=True, spec=spec)
    return res.trajectory(0)


# -- Ito energy identity -------------------------------------------------------

def ito_energy_terms(traj: Trajectory, params: GLParams, model: JumpModel | None,
                     spec: GridSpec | None = None) -> dict[str, np.ndarray]:
    """Cumulative terms of the energy identity at each grid time.

    Every drift segment [a, b] between consecutive grid and jump times is
    handled as in the time stepper: the nonlinear pairings are taken at the
    left state, and the linear terms are integrated exactly along
    e^{L s} v with v = e^{-L h} u(b-).  Jump terms use the stored left
    limits and are exact.
    """
    if traj.snap_every != 1:
        raise InsufficientSnapshots("the residual needs a snapshot at every grid step (snap_every=1)")
    n1, n2 = traj.snapshots.shape[-2:]
    ev = DriftEvaluator(params, model, n1, n2, traj.terms, spec)
    tg = traj.times
    K = tg.size - 1
    keys = ("grad", "gain", "power", "I1", "I2_jump", "I2_comp", "I3")
    cum = {k: np.zeros(K + 1) for k in keys}
    acc = dict.fromkeys(keys, 0.0)
    gamma = params.gamma if traj.terms.gain else 0.0
    lin_comp = model.c * model.nu_h if (model is not None and model.family == "linear") else 0.0
    jumps = sorted(traj.jumps, key=lambda j: j.time)
    ji = 0
    stop = traj.stopped_at if traj.stopped_at is not None else math.inf
    last = K
    for k in range(K):
        a_t, b_t = tg[k], tg[k + 1]
        if b_t > stop:
            last = k
            break
        left = traj.snapshots[k]
        segs = []
        while ji < len(jumps) and jumps[ji].time <= b_t:
            segs.append(jumps[ji])
            ji += 1
        t_prev = a_t
        for j in segs + [None]:
            t_next = j.time if j is not None else b_t
            right = j.pre_state if j is not None else traj.snapshots[k + 1]
            if j is not None and right is None:
                raise InsufficientSnapshots("jump left limits were not kept")
            h = t_next - t_prev
            if h > 0:
                _, Q, _, reF, reC = ev.evaluate(left)
                v = ev.propagator(-h) * right
                il2, ih1 = ev.linear_integrals(v, h)
                acc["grad"] += -2 * float(ih1)
                acc["gain"] += 2 * gamma * float(il2)
                acc["power"] += -2 * h * float(Q) if traj.terms.cubic else 0.0
                acc["I2_comp"] += -2 * lin_comp * float(il2) - 2 * h * float(reC)
                acc["I3"] += 2 * h * float(reF)
            if j is not None:
                g = j.post_state - j.pre_state
                acc["I1"] += float(np.sum(abs2(g)))
                acc["I2_jump"] += 2 * float(np.sum((j.pre_state * np.conj(g)).real))
                left = j.post_state
                t_prev = t_next
        for key in keys:
            cum[key][k + 1] = acc[key]
    for key in keys:
        cum[key][last + 1:] = np.nan
    cum["valid"] = np.arange(K + 1) <= last
    return cum


def ito_energy_residual(traj: Trajectory, params: GLParams, model: JumpModel | None,
                        spec: GridSpec | None = None) -> float:
    """max_t |lhs - rhs| of the energy identity, divided by sup ||u||^2."""
    cum = ito_energy_terms(traj, params, model, spec)
    valid = cum["valid"]
    l2 = traj.series.l2_sq[valid]
    rhs = l2[0] + sum(cum[k][valid] for k in
                      ("grad", "gain", "power", "I1", "I2_jump", "I2_comp", "I3"))
    scale = max(float(np.max(l2)), max((j.post.l2_sq for j in traj.jumps), default=0.0))
    if scale == 0.0:
        return float(np.max(np.abs(l2 - rhs)))
    return float(np.max(np.abs(l2 - rhs)) / scale)


# -- ensemble statistics -------------------------------------------------------

def _tree_mean(x: np.ndarray) -> np.ndarray:
    """Pairwise mean over the path axis in path-index order."""
    x = np.asarray(x, float)
    n = x.shape[0]
    while x.shape[0] > 1:
        if x.shape[0] % 2:
            x = np.concatenate([x[:-2], x[-2:-1] + x[-1:]])
        x = x[0::2] + x[1::2]
    return x[0] / n


@dataclass(eq=False)
class EnsembleStats:
    times: np.ndarray
    mean: dict[str, np.ndarray]
    var: dict[str, np.ndarray]
    se: dict[str, np.ndarray]
    sup_l2_mean: float
    sup_l2_se: float
    blowup_frequency: float
    n_paths: int


def path_sup(result: EnsembleResult, field_name: str = "l2_sq") -> np.ndarray:
    """Per-path supremum over grid times, jump left limits and post-jump values."""
    sup = np.max(getattr(result.series, field_name), axis=1)
    for i, js in enumerate(result.jumps):
        for j in js:
            sup[i] = max(sup[i], getattr(j.pre, field_name), getattr(j.post, field_name))
    return sup


def ensemble_stats(result: EnsembleResult) -> EnsembleStats:
    P = result.n_paths
    mean, var, se = {}, {}, {}
    for f in FIELDS:
        x = getattr(result.series, f)
        m = _tree_mean(x)
        v = _tree_mean((x - m) ** 2) * (P / (P - 1)) if P > 1 else np.zeros_like(m)
        mean[f], var[f], se[f] = m, v, np.sqrt(v / P)
    sup = path_sup(result)
    sm = float(_tree_mean(sup))
    ss = float(np.sqrt(_tree_mean((sup - sm) ** 2) * P / (P - 1) / P)) if P > 1 else 0.0
    return EnsembleStats(result.times, mean, var, se, sm, ss,
                         float(np.mean(~np.isnan(result.stopped_at))), P)
