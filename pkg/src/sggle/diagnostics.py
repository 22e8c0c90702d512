"""Monte-Carlo energy statistics and their behavior under mode refinement.

Each statistic is a per-path functional of the energy records (a supremum
over time plus time integrals by the trapezoid rule on the record grid),
averaged over paths and divided by a scale built from the initial data.
The suprema also visit jump left limits and post-jump values, since a
jump can spike a norm between two grid times.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .integrator import EnsembleResult, _tree_mean
from .spectral import eigenvalues

LEMMAS = ("L31", "L32", "L33")


class EmptyEnsemble(ValueError):
    pass


@dataclass(frozen=True)
class LemmaStatistic:
    lemma_id: str
    value: float
    se: float
    n_modes: tuple[int, int]
    rhs_scale: float
    ratio: float

    def __post_init__(self):
        if self.lemma_id not in LEMMAS:
            raise ValueError(f"unknown statistic {self.lemma_id!r}")
        if self.value < 0 or self.se < 0 or self.rhs_scale < 1:
            raise ValueError("statistic out of range")


def _trapz(y: np.ndarray, t: np.ndarray) -> np.ndarray:
    return np.sum(0.5 * (y[:, 1:] + y[:, :-1]) * np.diff(t), axis=1)


def _sup(result: EnsembleResult, field: str, power: float = 1.0) -> np.ndarray:
    x = getattr(result.series, field)
    sup = np.max(x, axis=1)
    for i, js in enumerate(result.jumps):
        for j in js:
            sup[i] = max(sup[i], getattr(j.pre, field), getattr(j.post, field))
    return sup ** power if power != 1.0 else sup


def _initial_norms(result: EnsembleResult) -> tuple[np.ndarray, np.ndarray]:
    a = result.initial
    mu = eigenvalues(a.shape[-2], a.shape[-1], result.L1, result.L2)
    p2 = np.abs(a) ** 2
    return np.sum(p2, axis=(-2, -1)), np.sum(mu * p2, axis=(-2, -1))


def _aggregate(lemma: str, per_path: np.ndarray, result: EnsembleResult, scale: float) -> LemmaStatistic:
    P = per_path.size
    m = float(_tree_mean(per_path))
    se = float(np.sqrt(_tree_mean((per_path - m) ** 2) / (P - 1))) if P > 1 else 0.0
    n1, n2 = result.final.shape[-2:]
    return LemmaStatistic(lemma, max(m, 0.0), se, (n1, n2), scale, max(m, 0.0) / scale)


def _check(result: EnsembleResult):
    if result.n_paths == 0:
        raise EmptyEnsemble("ensemble has no paths")


def lemma31_statistic(result: EnsembleResult) -> LemmaStatistic:
    """E[sup ||u||^2 + int ||grad u||^2 + int ||u||_{2s+2}^{2s+2}] / (E||u0||^2 + 1)."""
    _check(result)
    s = result.series
    per_path = _sup(result, "l2_sq") + _trapz(s.h1_sq, s.t) + _trapz(s.l2s2_pow, s.t)
    l2, _ = _initial_norms(result)
    return _aggregate("L31", per_path, result, float(np.mean(l2)) + 1.0)


def lemma32_statistic(result: EnsembleResult) -> LemmaStatistic:
    """E[sup ||grad u||^2 + int ||Lap u||^2 + int int |u|^(2s)|grad u|^2] / (E||grad u0||^2 + 1)."""
    _check(result)
    s = result.series
    per_path = _sup(result, "h1_sq") + _trapz(s.lap_sq, s.t) + _trapz(s.mixed, s.t)
    _, h1 = _initial_norms(result)
    return _aggregate("L32", per_path, result, float(np.mean(h1)) + 1.0)


def lemma33_statistic(result: EnsembleResult, p: float, sigma: float | None = None) -> LemmaStatistic:
    """p-th moment version; the time integrals carry the weight ||grad u||^(p-2).

    At p = 2 every weight is exactly one and the value equals
    :func:`lemma32_statistic`.
    """
    _check(result)
    if p < 2 or (sigma is not None and p >= 2 * sigma):
        raise ValueError(f"p={p} outside [2, 2 sigma)")
    s = result.series
    q = (p - 2) / 2
    wgt = s.h1_sq ** q
    per_path = (_sup(result, "h1_sq", p / 2) + _trapz(wgt * s.lap_sq, s.t)
                + _trapz(wgt * s.mixed, s.t))
    _, h1 = _initial_norms(result)
    return _aggregate("L33", per_path, result, float(np.mean(h1 ** (p / 2))) + 1.0)


def all_statistics(result: EnsembleResult, p: float = 4.0, sigma: float | None = None) -> list[LemmaStatistic]:
    return [lemma31_statistic(result), lemma32_statistic(result), lemma33_statistic(result, p, sigma)]


@dataclass(frozen=True)
class UniformityTable:
    levels: tuple[int, ...]
    stats: Mapping[int, tuple[LemmaStatistic, ...]]

    def ratios(self, lemma: str) -> np.ndarray:
        i = LEMMAS.index(lemma)
        return np.array([self.stats[n][i].ratio for n in self.levels])

    def spread(self, lemma: str) -> float:
        """max ratio / min ratio over the levels (1 when all ratios vanish)."""
        r = self.ratios(lemma)
        if np.all(r == 0):
            return 1.0
        return float(np.max(r) / np.min(r)) if np.min(r) > 0 else float("inf")

    def rows(self) -> list[LemmaStatistic]:
        return [s for n in self.levels for s in self.stats[n]]


def uniformity_scan(ensembles: Mapping[int, EnsembleResult], p: float = 4.0,
                    sigma: float | None = None) -> UniformityTable:
    """Statistic ratios per truncation level (keyed by n)."""
    if len(ensembles) < 3:
        raise ValueError("need at least three truncation levels")
    levels = tuple(sorted(ensembles))
    return UniformityTable(levels, {n: tuple(all_statistics(ensembles[n], p, sigma)) for n in levels})


def write_lemma_csv(path, stats: Iterable[LemmaStatistic]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lemma", "n1", "n2", "value", "se", "rhs_scale", "ratio"])
        for s in stats:
            w.writerow([s.lemma_id, s.n_modes[0], s.n_modes[1], "%.17g" % s.value,
                        "%.17g" % s.se, "%.17g" % s.rhs_scale, "%.17g" % s.ratio])
