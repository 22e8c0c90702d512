"""Model parameters, noise constants and run configuration.

Everything here is an immutable value object.  Parameters outside the
well-posedness regime are accepted and flagged by :func:`validate_regime`
rather than rejected, so the inequality checks can be run on both sides of
the thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

# Placeholder for the Burkholder-Davis-Gundy constant in the k2 smallness
# condition 3/2 - (2*C1**2 + 1)*k2 > 0.  The true constant is not computable
# from the available information; the flag derived from it is advisory.
BDG_PLACEHOLDER = 3.0


class ConfigError(ValueError):
    """Invalid parameter or configuration value."""


def beta_threshold(sigma: float) -> float:
    """Upper bound sqrt(2*sigma + 1)/sigma on |beta|."""
    return math.sqrt(2.0 * sigma + 1.0) / sigma


def _complex2(v) -> tuple[complex, complex]:
    v = tuple(complex(x) for x in v)
    if len(v) != 2:
        raise ConfigError(f"expected a complex 2-vector, got {len(v)} components")
    return v  # type: ignore[return-value]


@dataclass(frozen=True)
class GLParams:
    """Constants of the generalized Ginzburg-Landau drift on (0, L1) x (0, L2).

    ``lambda1`` and ``lambda2`` are complex 2-vectors multiplying gradients
    through the bilinear (non-conjugating) dot product.
    """

    alpha: float = 0.0
    beta: float = 0.5
    gamma: float = 1.0
    sigma: float = 3.0
    lambda1: tuple[complex, complex] = (0j, 0j)
    lambda2: tuple[complex, complex] = (0j, 0j)
    L1: float = math.pi
    L2: float = math.pi

    def __post_init__(self):
        object.__setattr__(self, "lambda1", _complex2(self.lambda1))
        object.__setattr__(self, "lambda2", _complex2(self.lambda2))
        for name in ("alpha", "beta", "gamma", "sigma", "L1", "L2"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ConfigError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.L1 <= 0 or self.L2 <= 0:
            raise ConfigError("domain lengths L1, L2 must be positive")
        if self.sigma <= 0:
            raise ConfigError("sigma must be positive")
        if self.gamma < 0:
            raise ConfigError("gamma must be nonnegative")

    @property
    def lam1(self) -> np.ndarray:
        return np.asarray(self.lambda1, dtype=complex)

    @property
    def lam2(self) -> np.ndarray:
        return np.asarray(self.lambda2, dtype=complex)

    @property
    def beta_threshold(self) -> float:
        return beta_threshold(self.sigma)

    @property
    def in_regime(self) -> bool:
        return 0.0 < abs(self.beta) < self.beta_threshold and self.sigma > 2.0

    def replace(self, **changes) -> "GLParams":
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        values.update(changes)
        return GLParams(**values)


@dataclass(frozen=True)
class NoiseConstants:
    """Growth constants k1, k2 and Lipschitz constants k3, k4 of the noise
    coefficient, with the moment order p."""

    k1: float = 0.0
    k2: float = 0.0
    k3: float = 0.0
    k4: float = 0.0
    p: float = 2.0

    def __post_init__(self):
        for name in ("k1", "k2", "k3", "k4"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative")
        if self.p < 1:
            raise ConfigError("moment order p must be >= 1")

    def k2_small(self, c1: float = BDG_PLACEHOLDER) -> bool:
        return self.k2 < 1.5 / (2.0 * c1 * c1 + 1.0)

    def k4_small(self, eps_tilde: float) -> bool:
        return self.k4 < 2.0 - 2.0 * eps_tilde


@dataclass(frozen=True)
class RegimeReport:
    beta_ok: bool
    sigma_ok: bool
    p_ok: bool
    k_small_ok: bool
    gamma_ok: bool = True

    @property
    def all_ok(self) -> bool:
        return self.beta_ok and self.sigma_ok and self.p_ok and self.k_small_ok


def validate_regime(params: GLParams, noise: NoiseConstants) -> RegimeReport:
    """Report which well-posedness hypotheses hold; never raises."""
    s = params.sigma
    return RegimeReport(
        beta_ok=0.0 < abs(params.beta) < beta_threshold(s),
        sigma_ok=s > 2.0,
        p_ok=2.0 <= noise.p < 2.0 * s,
        k_small_ok=noise.k2_small(),
        gamma_ok=params.gamma > 0.0,
    )


@dataclass(frozen=True)
class DriftTerms:
    """Switches for the non-dissipative parts of the drift.

    The linear operator (1 + i alpha) Laplacian is always on.  ``none()``
    gives the pure heat-type problem used by the closed-form checks.
    """

    cubic: bool = True
    gain: bool = True
    derivative: bool = True

    @classmethod
    def none(cls) -> "DriftTerms":
        return cls(False, False, False)


@dataclass(frozen=True)
class SimConfig:
    n1: int = 8
    n2: int = 8
    dt: float = 1e-3
    t_end: float = 1.0
    blowup_radius: float = 1e6
    seed: int = 0
    n_paths: int = 1
    snap_every: int = 0  # 0 keeps only the initial and final states

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise ConfigError("n1, n2 must be >= 1")
        if not (0 < self.dt < self.t_end):
            raise ConfigError("need 0 < dt < t_end")
        if self.blowup_radius <= 0:
            raise ConfigError("blowup_radius must be positive")
        if self.n_paths < 1:
            raise ConfigError("n_paths must be >= 1")
        if not (0 <= int(self.seed) < 2**64):
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.snap_every < 0:
            raise ConfigError("snap_every must be >= 0")

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.t_end / self.dt - 1e-9))

    def grid_times(self) -> np.ndarray:
        t = np.arange(self.n_steps + 1) * self.dt
        t[-1] = self.t_end
        return t

    def replace(self, **changes) -> "SimConfig":
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        values.update(changes)
        return SimConfig(**values)


EPS_KEYS = (8, 9, 10, 11, 12, 13, 14, 15)


@dataclass(frozen=True)
class MonotonicityConfig:
    """Young-inequality splitting parameters and the constants they induce.

    ``eps`` maps the index i to eps_i for i in 8..15.  ``constants`` is
    derived from ``eps``, the model parameters and Gagliardo-Nirenberg
    constants (see :mod:`sggle.young`); build instances with :meth:`derive`.
    """

    eps: Mapping[int, float]
    constants: "object" = field(repr=False)

    @classmethod
    def derive(cls, params: GLParams, eps: Mapping[int, float] | None = None,
               k4: float = 0.0) -> "MonotonicityConfig":
        from .young import default_eps, young_constants, pair_coefficient

        eps = dict(default_eps(params, k4) if eps is None else eps)
        eps = {int(k): float(v) for k, v in eps.items()}
        missing = [k for k in EPS_KEYS if k not in eps]
        if missing:
            raise ConfigError(f"missing eps_{missing[0]}")
        if any(v <= 0 for v in eps.values()):
            raise ConfigError("all eps_i must be positive")
        consts = young_constants(eps, params.sigma, pair_coefficient(params, "JK"))
        return cls(eps=eps, constants=consts)

    @property
    def eps_tilde(self) -> float:
        e = self.eps
        return e[8] + e[10] + e[12] + e[14]

    @property
    def eps_hat(self) -> float:
        return self.eps[9] + self.eps[11]

    def K(self, params: GLParams) -> float:
        """Coefficient of the L^(2 sigma + 2) term in the combined bound."""
        s = params.sigma
        c = 1.0 - s * abs(params.beta) / math.sqrt(2 * s + 1)
        return -c * 2.0 ** (-2 * s) + self.eps_hat

    def contraction_valid(self, params: GLParams, k4: float) -> bool:
        return self.K(params) < 0 and -2 + 2 * self.eps_tilde + k4 < 0
