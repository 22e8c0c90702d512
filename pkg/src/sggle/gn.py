"""Numerical Gagliardo-Nirenberg constants in two dimensions.

For f in H^1_0 of a planar domain,

    ||f||_r <= G_r ||f||^(2/r) ||grad f||^(1 - 2/r),   2 <= r < inf.

Both sides scale the same way under dilations, so G_r does not depend on
the rectangle.  We estimate it by maximizing the ratio over real
band-limited sine series with L-BFGS-B from several localized starts, then
multiply by a safety factor to cover the gap between the band-limited
supremum and the true constant.  The derivation and the resulting table
are documented in docs/young_constants.md.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from .spectral import eigenvalues, get_transform

SAFETY = 1.25
_WIDTHS = (0.2, 0.4, 0.8, 1.5)


def _objective(r: float, plan, mu: np.ndarray):
    c, w = plan.c, plan.weight
    S1, S2 = plan.S1, plan.S2
    n1, n2 = mu.shape

    def f(x):
        a = x.reshape(n1, n2)
        u = c * (S1 @ a @ S2.T)
        au = np.abs(u)
        I = w * np.sum(au ** r)
        l2 = np.sum(a * a)
        h1 = np.sum(mu * a * a)
        val = (math.log(I) - math.log(l2) - 0.5 * (r - 2) * math.log(h1)) / r
        gI = w * c * (S1.T @ (au ** (r - 2) * u) @ S2) * r
        grad = gI / (r * I) - 2 * a / (r * l2) - (r - 2) / r * mu * a / h1
        return -val, -grad.ravel()

    return f


def _start(width: float, n1: int, n2: int, L1: float, L2: float, plan) -> np.ndarray:
    x = np.arange(1, plan.M1 + 1) * L1 / (plan.M1 + 1)
    y = np.arange(1, plan.M2 + 1) * L2 / (plan.M2 + 1)
    g = np.exp(-((x[:, None] - L1 / 2) ** 2 + (y[None, :] - L2 / 2) ** 2) / (2 * width ** 2))
    return plan.forward(g).real.ravel()


def gn_ratio(coeffs: np.ndarray, r: float, M: int | None = None,
             L1: float = math.pi, L2: float = math.pi) -> float:
    """||f||_r / (||f||^(2/r) ||grad f||^(1-2/r)) for a real or complex series."""
    n1, n2 = coeffs.shape
    M = M or 8 * max(n1, n2)
    plan = get_transform(n1, n2, M, M, L1, L2)
    u = plan.backward(coeffs)
    I = plan.weight * np.sum(np.abs(u) ** r)
    l2 = np.sum(np.abs(coeffs) ** 2)
    h1 = np.sum(eigenvalues(n1, n2, L1, L2) * np.abs(coeffs) ** 2)
    return float(I ** (1 / r) / (l2 ** (1 / r) * h1 ** (0.5 - 1 / r)))


@lru_cache(maxsize=64)
def gn_supremum(r: float, n: int = 16, M: int | None = None) -> float:
    """Best ratio found over real n x n sine series (no safety factor)."""
    if r < 2:
        raise ValueError("r must be >= 2")
    if r == 2:
        return 1.0
    M = M or 8 * n
    L = math.pi
    plan = get_transform(n, n, M, M, L, L)
    mu = eigenvalues(n, n, L, L)
    f = _objective(float(r), plan, mu)
    best = 0.0
    for width in _WIDTHS:
        x0 = _start(width, n, n, L, L, plan)
        res = minimize(f, x0, jac=True, method="L-BFGS-B",
                       options={"maxiter": 400, "gtol": 1e-10})
        best = max(best, math.exp(-res.fun))
    return best


def gn_constant(r: float, n: int = 16, safety: float = SAFETY) -> float:
    """Safety-inflated Gagliardo-Nirenberg constant used by the bounds."""
    return safety * gn_supremum(round(float(r), 12), n)
