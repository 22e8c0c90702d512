"""Linear operator A, nonlinearities T and F, and the Galerkin drift.

A u = (1 + i alpha) Laplacian u acts diagonally on coefficients.  T and F
are evaluated pointwise on a padded grid and projected back.  F has two
algebraically equivalent pointwise forms: the product-rule expansion of
lambda1 . grad(|u|^2 u) + (lambda2 . grad u)|u|^2, and the regrouped form
((2 lambda1 + lambda2) . grad u)|u|^2 + (lambda1 . grad conj(u)) u^2.
The regrouped form with grad u in place of grad conj(u) is also available
for comparison; it differs from F on genuinely complex fields.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DriftTerms, GLParams
from .spectral import (GridSpec, MissingGradient, PhysicalGrid, SpectralField,
                       get_transform, grid_for, to_physical, to_spectral)


def bdot(lam: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    # bilinear, no conjugation of lam
    return lam[0] * gx + lam[1] * gy


def abs2(z: np.ndarray) -> np.ndarray:
    return z.real * z.real + z.imag * z.imag


def pow_sigma(s2: np.ndarray, sigma: float) -> np.ndarray:
    """|u|^(2 sigma) from |u|^2, using integer powers when possible."""
    if float(sigma).is_integer():
        return s2 ** int(sigma)
    return s2 ** sigma


def apply_A(u: SpectralField, params: GLParams) -> SpectralField:
    return u.with_coeffs(-(1 + 1j * params.alpha) * u.mu * u.coeffs)


def eval_T(grid: PhysicalGrid, params: GLParams) -> PhysicalGrid:
    v = grid.values
    out = -(1 - 1j * params.beta) * pow_sigma(abs2(v), params.sigma) * v
    return PhysicalGrid(out, grid.L1, grid.L2)


def _need_grad(grid: PhysicalGrid):
    if not grid.has_gradient:
        raise MissingGradient("F(u) needs collocated gradients")


def eval_F_direct(grid: PhysicalGrid, params: GLParams) -> PhysicalGrid:
    """lambda1 . (2|u|^2 grad u + u^2 grad conj u) + (lambda2 . grad u)|u|^2."""
    _need_grad(grid)
    v, gx, gy = grid.values, grid.grad_x, grid.grad_y
    s2, v2 = abs2(v), v * v
    cube_x = 2 * s2 * gx + v2 * np.conj(gx)
    cube_y = 2 * s2 * gy + v2 * np.conj(gy)
    out = bdot(params.lam1, cube_x, cube_y) + bdot(params.lam2, gx, gy) * s2
    return PhysicalGrid(out, grid.L1, grid.L2)


def eval_F_identity(grid: PhysicalGrid, params: GLParams, unconjugated: bool = False) -> PhysicalGrid:
    """((2 lambda1 + lambda2) . grad u)|u|^2 + (lambda1 . grad conj u) u^2.

    ``unconjugated=True`` drops the conjugate in the last gradient.
    """
    _need_grad(grid)
    v, gx, gy = grid.values, grid.grad_x, grid.grad_y
    lead = bdot(2 * params.lam1 + params.lam2, gx, gy) * abs2(v)
    if unconjugated:
        tail = bdot(params.lam1, gx, gy)
    else:
        tail = bdot(params.lam1, np.conj(gx), np.conj(gy))
    return PhysicalGrid(lead + tail * v * v, grid.L1, grid.L2)


@dataclass(frozen=True, eq=False)
class DriftDecomposition:
    a_part: SpectralField
    t_part: SpectralField
    gamma_part: SpectralField
    f_part: SpectralField
    total: SpectralField


def eval_G(u: SpectralField, params: GLParams, spec: GridSpec | None = None,
           terms: DriftTerms = DriftTerms()) -> DriftDecomposition:
    """P_n G(u) with its parts; switched-off parts are returned as zero."""
    spec = spec or grid_for(u.n1, u.n2, params.sigma)
    zero = u.with_coeffs(np.zeros_like(u.coeffs))
    a_part = apply_A(u, params)
    gamma_part = u * params.gamma if terms.gain else zero
    grid = to_physical(u, spec, gradient=terms.derivative)
    t_part = to_spectral(eval_T(grid, params), u.n1, u.n2, spec.method) if terms.cubic else zero
    f_part = (to_spectral(eval_F_direct(grid, params), u.n1, u.n2, spec.method)
              if terms.derivative else zero)
    total = u.with_coeffs(a_part.coeffs + t_part.coeffs + gamma_part.coeffs + f_part.coeffs)
    return DriftDecomposition(a_part, t_part, gamma_part, f_part, total)


def identity9_check(u: SpectralField, params: GLParams,
                    spec: GridSpec | None = None) -> tuple[float, float]:
    """Max pointwise discrepancy between the F routes, relative to max |F|.

    Returns (regrouped form with conjugate, regrouped form without it).
    """
    spec = spec or grid_for(u.n1, u.n2, params.sigma)
    grid = to_physical(u, spec, gradient=True)
    ref = eval_F_direct(grid, params).values
    scale = np.max(np.abs(ref), initial=0.0)
    if scale == 0.0:
        return 0.0, 0.0
    good = eval_F_identity(grid, params).values
    bad = eval_F_identity(grid, params, unconjugated=True).values
    return (float(np.max(np.abs(good - ref)) / scale),
            float(np.max(np.abs(bad - ref)) / scale))


class NonlinearDrift:
    """Batched P_n(T(u) + F(u)) on coefficient arrays, for the time stepper."""

    def __init__(self, params: GLParams, n1: int, n2: int, spec: GridSpec | None = None,
                 terms: DriftTerms = DriftTerms()):
        self.params, self.terms = params, terms
        self.spec = spec or grid_for(n1, n2, params.sigma)
        self.plan = get_transform(n1, n2, self.spec.M1, self.spec.M2, params.L1, params.L2)
        self.use_F = terms.derivative and bool(np.any(params.lam1) or np.any(params.lam2))
        self.active = terms.cubic or self.use_F
        self.weight = self.plan.weight

    def grid(self, coeffs: np.ndarray):
        return self.plan.backward(coeffs, gradient=self.use_F)

    def pointwise(self, v, gx=None, gy=None) -> np.ndarray:
        p = self.params
        s2 = abs2(v)
        out = np.zeros_like(v)
        if self.terms.cubic:
            out += (-(1 - 1j * p.beta)) * pow_sigma(s2, p.sigma) * v
        if self.use_F:
            lead = bdot(2 * p.lam1 + p.lam2, gx, gy) * s2
            out += lead + bdot(p.lam1, np.conj(gx), np.conj(gy)) * (v * v)
        return out

    def __call__(self, coeffs: np.ndarray) -> np.ndarray:
        if not self.active:
            return np.zeros_like(coeffs)
        g = self.grid(coeffs)
        vals = self.pointwise(*g) if self.use_F else self.pointwise(g)
        return self.plan.forward(vals)
