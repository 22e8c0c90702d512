"""Finite-atom Poisson random measure and the jump coefficient g(t, u, z).

Marks are indexed 0..m-1.  With finite total intensity Lambda = sum nu_i the
random measure is a compound Poisson process: jump times form a rate-Lambda
Poisson process and marks are drawn independently with P(i) = nu_i / Lambda.

Two coefficient families are provided:

* ``linear``: g(u, z_i) = c h_i u.
* ``quadratic``: g(u, z_i)(x) = h_i u(x) min(|u(x)|, cap) / 2, evaluated on
  the padded grid and projected.  Below the cap its Wirtinger derivatives
  have moduli 3 h |u| / 4 and h |u| / 4, so |Dg| = h |u|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import ConfigError, NoiseConstants
from .spectral import GridSpec, SpectralField, get_transform, grid_for

FAMILIES = ("linear", "quadratic")


@dataclass(frozen=True)
class JumpEvent:
    time: float
    mark_index: int


@dataclass(frozen=True)
class JumpModel:
    nu: tuple[float, ...] = (1.0,)
    h: tuple[float, ...] = (0.1,)
    family: str = "linear"
    c: float = 1.0
    cap: float = math.inf
    p: float = 2.0
    marks: tuple[str, ...] | None = None

    def __post_init__(self):
        nu = tuple(float(x) for x in np.atleast_1d(self.nu))
        h = tuple(float(x) for x in np.atleast_1d(self.h))
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "h", h)
        if len(nu) != len(h) or not nu:
            raise ConfigError("nu and h must be nonempty and of equal length")
        if any(x <= 0 for x in nu):
            raise ConfigError("nu weights must be positive")
        if any(x < 0 for x in h):
            raise ConfigError("h values must be nonnegative")
        if self.family not in FAMILIES:
            raise ConfigError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if not self.cap > 0:
            raise ConfigError("cap must be positive")
        if self.marks is not None and len(self.marks) != len(nu):
            raise ConfigError("marks must match nu in length")

    @property
    def m(self) -> int:
        return len(self.nu)

    @property
    def Lambda(self) -> float:
        return float(sum(self.nu))

    @property
    def probs(self) -> np.ndarray:
        nu = np.asarray(self.nu)
        return nu / nu.sum()

    @property
    def nu_h(self) -> float:
        """sum nu_i h_i, the compensator multiplier."""
        return float(np.dot(self.nu, self.h))

    @property
    def nu_h2(self) -> float:
        return float(np.dot(self.nu, np.square(self.h)))

    @property
    def is_zero(self) -> bool:
        return self.nu_h == 0.0 or (self.family == "linear" and self.c == 0.0)

    @property
    def constants(self) -> NoiseConstants:
        """Constants in the growth and Lipschitz conditions.

        Exact for the linear family.  For the quadratic family the bounds
        |g| <= h cap |u| / 2 and |Dg| <= h cap give finite constants only when
        the cap is finite.
        """
        if self.family == "linear":
            k1 = self.c ** 2 * self.nu_h2
            return NoiseConstants(k1=k1, k2=0.0, k3=k1, k4=0.0, p=self.p)
        k1 = self.nu_h2 * self.cap ** 2 / 4
        return NoiseConstants(k1=k1, k2=0.0, k3=4 * k1, k4=0.0, p=self.p)

    def scaled(self, factor: float) -> "JumpModel":
        """Same model with every nu_i multiplied by ``factor``."""
        return JumpModel(tuple(factor * x for x in self.nu), self.h, self.family,
                         self.c, self.cap, self.p, self.marks)

    def satisfied_conditions(self) -> dict[str, bool]:
        """Which of the growth (C1), Lipschitz (C2) and derivative (C3)
        conditions this family satisfies with finite constants."""
        if self.family == "linear":
            # |Dg| = c h does not vanish at u = 0, so |Dg| <= h |u| fails
            # near zero unless c h = 0.
            return {"C1": True, "C2": True, "C3": self.c == 0.0 or self.nu_h == 0.0}
        finite = math.isfinite(self.cap)
        return {"C1": finite, "C2": finite, "C3": True}


def sample_jump_times(Lam: float, t_end: float, rng: np.random.Generator) -> np.ndarray:
    """Arrival times in [0, t_end] of a rate-``Lam`` Poisson process."""
    if Lam <= 0:
        raise ValueError("intensity must be positive")
    out = []
    t = 0.0
    batch = max(8, int(Lam * t_end * 1.2) + 8)
    while True:
        gaps = rng.exponential(1.0 / Lam, size=batch)
        times = t + np.cumsum(gaps)
        keep = times[times <= t_end]
        out.append(keep)
        if keep.size < batch:
            break
        t = times[-1]
    return np.concatenate(out)


def sample_mark(model: JumpModel, rng: np.random.Generator, size=None):
    if model.m == 1:
        return 0 if size is None else np.zeros(size, dtype=np.int64)
    return rng.choice(model.m, size=size, p=model.probs)


def sample_events(model: JumpModel, t_end: float, rng: np.random.Generator) -> list[JumpEvent]:
    times = sample_jump_times(model.Lambda, t_end, rng)
    marks = np.atleast_1d(sample_mark(model, rng, size=times.size))
    return [JumpEvent(float(t), int(i)) for t, i in zip(times, marks)]


class NoiseOperator:
    """Batched evaluation of P_n g and the compensator on coefficient arrays."""

    def __init__(self, model: JumpModel, n1: int, n2: int, L1: float = math.pi,
                 L2: float = math.pi, spec: GridSpec | None = None, sigma: float = 3.0):
        self.model = model
        self.n1, self.n2 = n1, n2
        if model.family == "quadratic":
            self.spec = spec or grid_for(n1, n2, sigma)
            self.plan = get_transform(n1, n2, self.spec.M1, self.spec.M2, L1, L2)

    def shape(self, coeffs: np.ndarray) -> np.ndarray:
        """g / h, the mark-independent part of the coefficient."""
        if self.model.family == "linear":
            return self.model.c * coeffs
        v = self.plan.backward(coeffs)
        mod = np.abs(v)
        cap = self.model.cap
        out = v * (np.minimum(mod, cap) if math.isfinite(cap) else mod) * 0.5
        return self.plan.forward(out)

    def jump(self, coeffs: np.ndarray, h_values) -> np.ndarray:
        """P_n g(u, z) with per-row mark weights ``h_values``."""
        h = np.asarray(h_values, dtype=float)
        return self.shape(coeffs) * h.reshape(h.shape + (1, 1))

    def compensator(self, coeffs: np.ndarray) -> np.ndarray:
        return self.model.nu_h * self.shape(coeffs)

    def l2z_sq(self, coeffs: np.ndarray) -> np.ndarray:
        """||P_n g(u)||^2 in L^2(Z, nu; H) = sum_i nu_i ||P_n g(u, z_i)||^2."""
        s = self.shape(coeffs)
        return self.model.nu_h2 * np.sum(np.abs(s) ** 2, axis=(-2, -1))


def g_apply(model: JumpModel, t: float, u: SpectralField, mark_index: int,
            spec: GridSpec | None = None) -> SpectralField:
    op = NoiseOperator(model, u.n1, u.n2, u.L1, u.L2, spec)
    return u.with_coeffs(op.shape(u.coeffs) * model.h[mark_index])


def compensator(model: JumpModel, t: float, u: SpectralField,
                spec: GridSpec | None = None) -> SpectralField:
    """sum_i nu_i P_n g(t, u, z_i)."""
    return u.with_coeffs(NoiseOperator(model, u.n1, u.n2, u.L1, u.L2, spec).compensator(u.coeffs))


# -- statistical checks --------------------------------------------------------

@dataclass(frozen=True)
class StepIntegrand:
    """Deterministic step process xi(r, z_i) = values[j, i] on (t_{j-1}, t_j].

    ``values`` has shape (intervals, marks, d) with complex entries.
    """

    breaks: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.breaks, float)
        v = np.asarray(self.values, complex)
        if v.ndim == 2:
            v = v[..., None]
        if b.ndim != 1 or b.size != v.shape[0] + 1 or np.any(np.diff(b) <= 0) or b[0] != 0:
            raise ValueError("breaks must start at 0, increase, and bracket every interval")
        object.__setattr__(self, "breaks", b)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, vec, n_marks: int, t_end: float) -> "StepIntegrand":
        vec = np.atleast_1d(np.asarray(vec, complex))
        return cls(np.array([0.0, t_end]), np.broadcast_to(vec, (1, n_marks, vec.size)).copy())

    def at(self, t: np.ndarray, marks: np.ndarray) -> np.ndarray:
        j = np.searchsorted(self.breaks, t, side="left") - 1
        return self.values[np.clip(j, 0, self.values.shape[0] - 1), marks]

    def compensator_integral(self, nu: Sequence[float]) -> np.ndarray:
        """sum_i nu_i int_0^T xi(r, z_i) dr."""
        dt = np.diff(self.breaks)
        return np.einsum("j,jid,i->d", dt, self.values, np.asarray(nu, float))

    def isometry_rhs(self, nu: Sequence[float]) -> float:
        dt = np.diff(self.breaks)
        return float(np.einsum("j,jid,i->", dt, np.abs(self.values) ** 2, np.asarray(nu, float)))


def compensated_integrals(model: JumpModel, xi: StepIntegrand, n_paths: int,
                          rng: np.random.Generator) -> np.ndarray:
    """Samples of int int xi d(eta - nu dt) over [0, T], shape (n_paths, d)."""
    t_end = xi.breaks[-1]
    drift = xi.compensator_integral(model.nu)
    out = np.empty((n_paths, xi.values.shape[-1]), complex)
    for k in range(n_paths):
        times = sample_jump_times(model.Lambda, t_end, rng)
        marks = np.atleast_1d(sample_mark(model, rng, size=times.size))
        out[k] = xi.at(times, marks).sum(axis=0) - drift
    return out


@dataclass(frozen=True)
class IsometryResult:
    lhs: float
    rhs: float
    rel_err: float
    se: float  # standard error of rel_err
    mean: np.ndarray = field(repr=False)
    mean_se: np.ndarray = field(repr=False)

    @property
    def isometry_ok(self) -> bool:
        if self.rhs == 0:
            return self.lhs == 0
        return abs(self.rel_err) <= 3 * self.se

    @property
    def martingale_ok(self) -> bool:
        """Real and imaginary parts of every component within 3 SE of zero."""
        z = np.concatenate([self.mean.real, self.mean.imag])
        s = np.concatenate([self.mean_se.real, self.mean_se.imag])
        return bool(np.all(np.abs(z) <= 3 * s + 1e-300))


def ito_isometry_test(model: JumpModel, xi: StepIntegrand, n_paths: int,
                      rng: np.random.Generator) -> IsometryResult:
    """Monte-Carlo E|I(xi)|^2 against the exact sum_i nu_i int ||xi||^2."""
    samples = compensated_integrals(model, xi, n_paths, rng)
    sq = np.sum(np.abs(samples) ** 2, axis=1)
    lhs = float(sq.mean())
    rhs = xi.isometry_rhs(model.nu)
    se = float(sq.std(ddof=1) / math.sqrt(n_paths)) if n_paths > 1 else math.inf
    mean = samples.mean(axis=0)
    mse = (samples.real.std(axis=0, ddof=1) + 1j * samples.imag.std(axis=0, ddof=1)) / math.sqrt(n_paths)
    if rhs == 0:
        return IsometryResult(lhs, rhs, 0.0, 0.0, mean, mse)
    return IsometryResult(lhs, rhs, lhs / rhs - 1.0, se / rhs, mean, mse)


def estimate_noise_constants(model: JumpModel, samples: SpectralField,
                             spec: GridSpec | None = None, rtol: float = 1e-12):
    """Empirical (k1, k2, k3, k4) covering every sample.

    k1 is the smallest ratio ||g(u)||^2 / ||u||^2 in the sample and k2 the
    smallest gradient weight that covers the remaining excess; k3, k4 are
    obtained the same way from consecutive sample differences.  Zero fields
    and zero differences are skipped.
    """
    a = samples.coeffs.reshape((-1,) + samples.shape)
    if a.shape[0] == 0:
        raise ValueError("empty sample")
    op = NoiseOperator(model, samples.n1, samples.n2, samples.L1, samples.L2, spec)
    mu = samples.mu

    def fit(g2, l2, h1):
        keep = l2 > 0
        if not np.any(keep):
            raise ValueError("sample contains only zero fields")
        g2, l2, h1 = g2[keep], l2[keep], h1[keep]
        k1 = float(np.min(g2 / l2))
        excess = np.maximum(g2 - k1 * l2, 0.0)
        k2 = float(np.max(excess / h1))
        if k2 <= rtol * max(k1, 1e-300) or np.all(excess <= rtol * g2):
            k2 = 0.0
        return k1, k2

    l2 = np.sum(np.abs(a) ** 2, axis=(-2, -1))
    h1 = np.sum(mu * np.abs(a) ** 2, axis=(-2, -1))
    k1, k2 = fit(op.l2z_sq(a), l2, h1)
    if a.shape[0] < 2:
        return k1, k2, math.nan, math.nan
    s = op.shape(a)
    ds = np.diff(s, axis=0)
    da = np.diff(a, axis=0)
    dg2 = model.nu_h2 * np.sum(np.abs(ds) ** 2, axis=(-2, -1))
    dl2 = np.sum(np.abs(da) ** 2, axis=(-2, -1))
    dh1 = np.sum(mu * np.abs(da) ** 2, axis=(-2, -1))
    k3, k4 = fit(dg2, dl2, dh1)
    return k1, k2, k3, k4


def martingale_paths(model: JumpModel, xi: StepIntegrand, n_paths: int,
                     rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Mean and standard error of the compensated integral."""
    s = compensated_integrals(model, xi, n_paths, rng)
    se = (s.real.std(axis=0, ddof=1) + 1j * s.imag.std(axis=0, ddof=1)) / math.sqrt(n_paths)
    return s.mean(axis=0), se

