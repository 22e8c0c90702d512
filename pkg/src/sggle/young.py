"""Explicit constants for the local monotonicity bound of the derivative terms.

With w = u - phi, a = ||w||, b = ||grad w||, Q = ||w||_{2s+2}^{2s+2},
A = ||phi||, B = ||grad phi|| and s = sigma, the pairings of the two
derivative nonlinearities satisfy pointwise

    |pairing| <= kappa (|w|^3|grad w| + |w|^3|grad phi|
                        + |w|^2|phi||grad phi| + |w||grad w||phi|^2),

and each of the four integrals is split by Hoelder, Gagliardo-Nirenberg
and Young into eps_i-weighted pieces:

    X1 <= e8 b^2 + e9 Q + C(e8, e9) a^2
    X2 <= e10 b^2 + e11 Q + C(e10, e11) B^(2s/(s-1)) a^2
    X3 <= e12 b^2 + (e13 A^2 + C(e12, e13) B^((7s-2)/(s+1))) a^2
    X4 <= e14 b^2 + (e15 A^2 + C(e14, e15) B^((10s+4)/(s+4))) a^2

The closed forms of the C's are in :func:`young_constants`; the derivation
is written out in docs/young_constants.md.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .core import GLParams
from .gn import gn_constant


def young_C(eps: float, p: float) -> float:
    """Smallest C with x y <= eps x^p + C y^(p/(p-1)) for all x, y >= 0."""
    if p <= 1:
        raise ValueError("Young exponent must exceed 1")
    return (p - 1) / p * (eps * p) ** (-1.0 / (p - 1))


def _cnorm(v) -> float:
    return float(np.sqrt(np.sum(np.abs(np.asarray(v)) ** 2)))


def pair_coefficient(params: GLParams, which: str = "JK") -> float:
    """kappa for the F1 pairing ("J"), the F2 pairing ("K") or their sum."""
    j = 2 * _cnorm(2 * params.lam1 + params.lam2)
    k = 2 * _cnorm(params.lam1)
    return {"J": j, "K": k, "JK": j + k}[which]


def coercivity(params: GLParams) -> float:
    """c = 1 - sigma |beta| / sqrt(2 sigma + 1); positive inside the regime."""
    s = params.sigma
    return 1.0 - s * abs(params.beta) / math.sqrt(2 * s + 1)


def default_eps(params: GLParams, k4: float = 0.0) -> dict[int, float]:
    """A splitting that makes both contraction conditions hold with margin.

    Three quarters of the admissible budgets are spent: e8 + e10 + e12 + e14
    = 0.75 (1 - k4 / 2) and e9 + e11 = 0.75 c 2^(-2 sigma).  The cubic
    term's share e8 gets half of its budget because C(e8, e9) grows fastest
    as e8 shrinks.  Outside the regime c <= 0 and a small positive
    placeholder replaces the second budget.
    """
    s = params.sigma
    c = coercivity(params)
    q_budget = 0.75 * (c if c > 0 else 0.1) * 2.0 ** (-2 * s)
    g_budget = 0.75 * max(1.0 - k4 / 2, 0.05)
    return {8: g_budget / 2, 9: q_budget / 2, 10: g_budget / 6, 11: q_budget / 2,
            12: g_budget / 6, 13: 0.5, 14: g_budget / 6, 15: 0.5}


@dataclass(frozen=True)
class YoungConstants:
    sigma: float
    kappa: float
    C89: float
    C1011: float
    C1213: float
    C1415: float
    gn: Mapping[str, float]

    @property
    def exponents(self) -> tuple[float, float, float]:
        s = self.sigma
        return 2 * s / (s - 1), (7 * s - 2) / (s + 1), (10 * s + 4) / (s + 4)


def young_constants(eps: Mapping[int, float], sigma: float, kappa: float,
                    gn_modes: int = 16) -> YoungConstants:
    s = float(sigma)
    if s <= 2:
        raise ValueError("the splitting needs sigma > 2")
    e = {int(k): float(v) for k, v in eps.items()}
    r1 = (8 * s - 4) / (s - 2)
    r2 = (16 * s - 8) / (3 * s)
    r3 = 3 * s / (s + 1)
    r4 = 12 * s / (s - 2)
    G = {"6": gn_constant(6, gn_modes), "r1": gn_constant(r1, gn_modes),
         "r2": gn_constant(r2, gn_modes), "r3": gn_constant(r3, gn_modes),
         "r4": gn_constant(r4, gn_modes)}

    # X1: ||w||_6^6 <= Q^(2/s) a^((2s-4)/s) by Hoelder interpolation.
    C89 = young_C(e[9], s / 2) * (kappa ** 2 / (4 * e[8])) ** (s / (s - 2))

    # X2: ||w||_6^3 <= G6^(3/2) a^(1/2) b * Q^(1/(2s)) a^((s-2)/(2s)).
    C1011 = (young_C(e[11], s) * (1 / (4 * e[10])) ** (s / (s - 1))
             * (kappa * G["6"] ** 1.5) ** (2 * s / (s - 1)))

    # X3: Hoelder (2, r1, r2/2), GN on phi in L^r1 and w in L^r2, then Young
    # with exponent 2/theta on b and 3s/(s-2) on A.
    theta = (5 * s - 4) / (4 * s - 2)
    K3 = young_C(e[12], 2 / theta) * (kappa * G["r1"] * G["r2"] ** 2) ** ((8 * s - 4) / (3 * s))
    C1213 = young_C(e[13], 3 * s / (s - 2)) * K3 ** (3 * s / (2 * s + 2))

    # X4: Hoelder (2, r3, r4/2), GN on w in L^r3 and phi in L^r4.
    K4 = (young_C(e[14], 3 * s / (2 * s - 1)) * (kappa * G["r3"]) ** (3 * s / (s + 1))
          * G["r4"] ** (6 * s / (s + 1)))
    C1415 = young_C(e[15], 2 * (s + 1) / (s - 2)) * K4 ** (2 * (s + 1) / (s + 4))
    return YoungConstants(s, kappa, C89, C1011, C1213, C1415, G)


def phi_weight(consts: YoungConstants, eps: Mapping[int, float], A: np.ndarray,
               B: np.ndarray) -> np.ndarray:
    """Coefficient of ||w||^2 in the bound, without the C89 and gamma part."""
    p1, p2, p3 = consts.exponents
    A = np.asarray(A, float)
    B = np.asarray(B, float)
    return ((eps[13] + eps[15]) * A ** 2 + consts.C1011 * B ** p1
            + consts.C1213 * B ** p2 + consts.C1415 * B ** p3)


def r_prime(consts: YoungConstants, eps: Mapping[int, float], gamma: float, k3: float,
            A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Integrand of r(t) given ||phi|| = A and ||grad phi|| = B."""
    return 2 * (consts.C89 + gamma + phi_weight(consts, eps, A, B)) + k3
