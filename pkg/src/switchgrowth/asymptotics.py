"""Finite-horizon brackets for ``lim alpha_t / t`` and growth-exponent diagnostics.

``beta`` is subadditive, so ``lim beta_t / t = inf_t beta_t / t`` and every
computed ``t`` yields a certified upper bound.  Lower bounds come from words
``W``: ``alpha_{m|W|} >= ||W^m||``, hence ``lim alpha_t / t >= lim ||W^m|| / (m |W|)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .classify import word_growth_coefficient
from .core import SwitchingWord, SystemParams, build_generators, word_product
from .growth import DEFAULT_PRUNE_TOL, GrowthSeries, brute_force, growth_series

DEFAULT_PATTERN_MAX = 12
DEFAULT_ARGMAX_T = 14


@dataclass(frozen=True, eq=False)
class SlopeBracket:
    lower: float
    upper: float
    witness_word: SwitchingWord | None
    upper_t: int
    running_upper: np.ndarray

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "upper_t": self.upper_t,
                "witness_word": None if self.witness_word is None else str(self.witness_word)}


def pattern_words(q_max: int) -> list[SwitchingWord]:
    """Words for ``A0 A1^q``, ``q = 1..q_max`` (``A1`` acts first)."""
    return [SwitchingWord((1,) * q + (0,)) for q in range(1, q_max + 1)]


def default_candidate_words(params: SystemParams, pattern_max: int = DEFAULT_PATTERN_MAX,
                            argmax_t: int = DEFAULT_ARGMAX_T) -> list[SwitchingWord]:
    words = []
    if params.angle is not None:
        words += pattern_words(max(pattern_max, params.angle.q))
    for t in range(1, argmax_t + 1):
        res = brute_force(params, t)
        words += [res.alpha_word, res.beta_word]
    seen, unique = set(), []
    for w in words:
        if w.letters not in seen:
            seen.add(w.letters)
            unique.append(w)
    return unique


def running_upper(series: GrowthSeries) -> np.ndarray:
    """``min_{1<=s<=t} (beta_s + eps_s + 1) / s`` for each ``t >= 1`` (index 0 is ``inf``)."""
    t = np.arange(len(series.beta), dtype=float)
    vals = np.full(len(t), np.inf)
    vals[1:] = (series.beta[1:] + series.eps[1:] + 1.0) / t[1:]
    return np.minimum.accumulate(vals)


def slope_bracket(params: SystemParams, T: int, candidate_words: Sequence | None = None,
                  prune_tol: float = DEFAULT_PRUNE_TOL,
                  series: GrowthSeries | None = None) -> SlopeBracket:
    """Two-sided bracket on ``lim alpha_t / t`` from a horizon ``T`` and candidate words."""
    if T < 1:
        raise ValueError("T must be >= 1")
    if series is None or series.T < T:
        series = growth_series(params, T, prune_tol)
    run = running_upper(series)[:T + 1]
    upper_t = int(np.argmin(run[1:]) + 1)
    if candidate_words is None:
        candidate_words = default_candidate_words(params)
    a0, a1 = build_generators(params)
    lower, witness = 0.0, None
    for w in candidate_words:
        w = w if isinstance(w, SwitchingWord) else SwitchingWord(tuple(w))
        if len(w) == 0:
            continue
        val = word_growth_coefficient(word_product(w, a0, a1)) / len(w)
        if val > lower:
            lower, witness = val, w
    return SlopeBracket(lower, float(run[T]), witness, upper_t, run)


Sequence_ = Callable[[np.ndarray], np.ndarray] | Sequence[float] | np.ndarray


def _evaluate(seq, t: np.ndarray) -> np.ndarray:
    if callable(seq):
        return np.asarray(seq(t.astype(float)), dtype=float) * np.ones_like(t, dtype=float)
    arr = np.asarray(seq, dtype=float)
    if arr.shape[0] == len(t) + 1:
        return arr[t]
    return arr[:len(t)]


@dataclass(frozen=True, eq=False)
class OscillationReport:
    t: np.ndarray
    beta_over_a: np.ndarray
    beta_over_b: np.ndarray
    exponent: np.ndarray

    @staticmethod
    def _extreme(values, t, fn):
        i = int(fn(values))
        return float(values[i]), int(t[i])

    @property
    def inf_beta_over_a(self) -> tuple[float, int]:
        return self._extreme(self.beta_over_a, self.t, np.argmin)

    @property
    def sup_beta_over_b(self) -> tuple[float, int]:
        return self._extreme(self.beta_over_b, self.t, np.argmax)

    @property
    def exponent_range(self) -> tuple[float, int, float, int]:
        m = self.t >= 2
        lo, tlo = self._extreme(self.exponent[m], self.t[m], np.argmin)
        hi, thi = self._extreme(self.exponent[m], self.t[m], np.argmax)
        return lo, tlo, hi, thi

    @property
    def exponent_spread(self) -> float:
        lo, _, hi, _ = self.exponent_range
        return hi - lo

    def running(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        v = getattr(self, name)
        return np.minimum.accumulate(v), np.maximum.accumulate(v)

    def to_dict(self) -> dict:
        ia, ta = self.inf_beta_over_a
        sb, tb = self.sup_beta_over_b
        lo, tlo, hi, thi = self.exponent_range
        return {"inf_beta_over_a": ia, "argmin_t": ta, "sup_beta_over_b": sb, "argmax_t": tb,
                "exponent_min": lo, "exponent_min_t": tlo, "exponent_max": hi,
                "exponent_max_t": thi}


def oscillation_report(params: SystemParams, T: int, a, b, prune_tol: float = DEFAULT_PRUNE_TOL,
                       series: GrowthSeries | None = None) -> OscillationReport:
    """Tabulate ``beta/a``, ``beta/b`` and ``log(alpha_mid)/log t`` for ``t = 1..T``."""
    if T < 2:
        raise ValueError("T must be >= 2")
    if series is None or series.T < T:
        series = growth_series(params, T, prune_tol)
    t = np.arange(1, T + 1)
    av, bv = _evaluate(a, t), _evaluate(b, t)
    if np.any(av <= 0) or np.any(bv <= 0):
        raise ValueError("a and b must be positive on [1, T]")
    beta = series.beta[1:T + 1]
    mid = 0.5 * (series.alpha_lo[1:T + 1] + series.alpha_hi[1:T + 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        expo = np.where(t >= 2, np.log(mid) / np.log(np.maximum(t, 2)), np.nan)
    return OscillationReport(t, beta / av, beta / bv, expo)


def log_a(t):
    return 1.0 + np.log(t)


def sublinear_b(t):
    return t / (1.0 + np.log(t))
