"""Heuristic convergence verdicts for partial-sum sequences.

Finitely many terms cannot decide convergence.  Instead the partial sums over
the last two dyadic blocks [N/4, N] are fitted against a small set of growth
models, and a verdict is issued only when the best model explains the data to
within a relative residual threshold.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

DEFAULT_THRESHOLD = 0.05


class Verdict(str, enum.Enum):
    CONVERGES = "ConvergesLikely"
    DIVERGES = "DivergesLikely"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class GrowthModel:
    """Best-fitting model: kind is bounded-Cauchy, logarithmic, power or geometric.

    ``parameter`` is the Cauchy decay exponent (or rate, for a geometric
    tail), the power exponent, or the geometric growth rate; None for the
    logarithmic model.  ``residual`` is relative to the variation of the
    partial sums over the fitted window.
    """

    kind: str
    parameter: float | None
    residual: float
    detail: str = ""

    @property
    def divergent(self) -> bool:
        return self.kind != "bounded-Cauchy"


@dataclass(frozen=True)
class SeriesVerdict:
    partial_sums: np.ndarray
    verdict: Verdict
    model: GrowthModel
    start_index: int = 1

    @property
    def truncation(self) -> int:
        """Largest index included in the last partial sum."""
        return self.start_index + self.partial_sums.size - 1

    @property
    def last(self) -> float:
        return float(self.partial_sums[-1])

    def partial_sum(self, n: int) -> float:
        """Σ of the terms with index ≤ n."""
        return float(self.partial_sums[n - self.start_index])

    def doubling_increments(self) -> np.ndarray:
        """S(2^k) - S(2^{k-1}) for every dyadic pair inside the window."""
        return doubling_increments(self.partial_sums, self.start_index)

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "model": self.model.kind,
            "parameter": self.model.parameter,
            "fit_residual": self.model.residual,
            "last_partial_sum": self.last,
            "truncation": self.truncation,
        }


def doubling_increments(partial_sums, start_index=1) -> np.ndarray:
    s = np.asarray(partial_sums)
    top = start_index + s.size - 1
    out = []
    m = 1
    while 2 * m <= top:
        if m >= start_index:
            out.append(s[2 * m - start_index] - s[m - start_index])
        m *= 2
    return np.asarray(out)


def _sample_indices(lo: int, hi: int, count: int = 160) -> np.ndarray:
    if hi - lo + 1 <= count:
        return np.arange(lo, hi + 1)
    return np.unique(np.round(np.geomspace(lo, hi, count)).astype(np.int64))


def _linear_fit(basis: np.ndarray, y: np.ndarray):
    """Least squares y ≈ A + B·basis; returns (A, B, rms residual)."""
    design = np.column_stack([np.ones_like(basis), basis])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    res = y - design @ coef
    return coef[0], coef[1], float(np.sqrt(np.mean(res**2)))


def _profile_fit(make_basis, y, lo, hi, want_positive_b):
    """Fit y ≈ A + B·basis(θ) over θ ∈ [lo, hi] (variable projection)."""

    def objective(theta):
        basis = make_basis(theta)
        if not np.all(np.isfinite(basis)) or np.ptp(basis) == 0:
            return math.inf
        _, b, rms = _linear_fit(basis, y)
        if want_positive_b and b <= 0:
            return math.inf
        return rms

    grid = np.linspace(lo, hi, 48)
    vals = np.array([objective(t) for t in grid])
    if not np.any(np.isfinite(vals)):
        return None, math.inf
    k = int(np.nanargmin(vals))
    a, c = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    best_t, best_v = grid[k], vals[k]
    if c > a:
        opt = minimize_scalar(objective, bounds=(a, c), method="bounded", options={"xatol": 1e-10 * max(1.0, abs(c))})
        if opt.success and opt.fun < best_v:
            best_t, best_v = float(opt.x), float(opt.fun)
    return best_t, best_v


def fit_growth(n: np.ndarray, s: np.ndarray) -> list[GrowthModel]:
    """All candidate models for partial sums ``s`` at indices ``n``, best first."""
    n = n.astype(float)
    variation = float(s[-1] - s[0])
    scale = max(abs(variation), 1e-300)
    y = (s - s[0]) / scale
    nmax = n[-1]
    models = []

    # bounded with power-law Cauchy tail: S ≈ A - B n^{-κ}
    t, v = _profile_fit(lambda k: -((n / nmax) ** (-k)), y, 0.05, 12.0, True)
    if t is not None:
        models.append(GrowthModel("bounded-Cauchy", t, v, "power tail"))
    # bounded with geometric tail: S ≈ A - B e^{-λ n}
    lam_hi = min(5.0, 700.0 / nmax)
    t, v = _profile_fit(lambda lam: -np.exp(-lam * (n - n[0])), y, 1e-6, lam_hi, True)
    if t is not None:
        models.append(GrowthModel("bounded-Cauchy", t, v, "geometric tail"))
    # logarithmic
    _, b, rms = _linear_fit(np.log(n), y)
    models.append(GrowthModel("logarithmic", None, rms if b > 0 else math.inf))
    # power growth
    t, v = _profile_fit(lambda beta: (n / nmax) ** beta, y, 0.05, 4.0, True)
    if t is not None:
        models.append(GrowthModel("power", t, v))
    # geometric growth
    t, v = _profile_fit(lambda lam: np.exp(lam * (n - nmax)), y, 1e-6, lam_hi, True)
    if t is not None:
        models.append(GrowthModel("geometric", t, v))
    models.sort(key=lambda m: m.residual)
    return models


def assess_series(terms, start_index: int = 1, threshold: float = DEFAULT_THRESHOLD) -> SeriesVerdict:
    """Partial sums of ``terms`` (first term has index ``start_index``) with a verdict."""
    terms = np.asarray(terms, dtype=float)
    if terms.size < 8:
        raise ValueError("need at least 8 terms to assess a series")
    with np.errstate(over="ignore", invalid="ignore"):
        s = np.cumsum(terms)
    s.flags.writeable = False
    top = start_index + s.size - 1

    if not np.all(np.isfinite(s)):
        return SeriesVerdict(s, Verdict.DIVERGES, GrowthModel("power", math.inf, 0.0, "infinite partial sums"), start_index)

    lo = max(start_index, top // 4)
    idx = _sample_indices(lo, top)
    window = s[idx - start_index]
    variation = window[-1] - window[0]
    if abs(variation) <= 1e-13 * max(abs(window[-1]), 1e-300):
        # the sums are constant to rounding over the whole window
        return SeriesVerdict(s, Verdict.CONVERGES, GrowthModel("bounded-Cauchy", math.inf, 0.0, "stationary"), start_index)

    models = fit_growth(idx, window)
    best = models[0]
    if not best.residual <= threshold:
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.DIVERGES if best.divergent else Verdict.CONVERGES
    return SeriesVerdict(s, verdict, best, start_index)
