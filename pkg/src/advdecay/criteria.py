"""Series criteria for intermediate solutions and the Euler comparison results.

Two series decide whether the half-linear equation has intermediate
solutions (assuming ΣΦ*(1/a) < ∞ and Σb = ∞):

    J1 = Σ_n b_n Φ( Σ_{k>n} Φ*(1/a_k) ),     J2 = Σ_n Φ*( (1/a_{n+1}) Σ_{k≤n} b_k ).

J1 + J2 < ∞ rules intermediate solutions out; J1 + J2 = ∞ gives them as soon
as the equation is nonoscillatory.  For the advanced equation the same sums
are taken with a_{k+p-1} and a_{n+p} (``shifted=True``).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    Constant,
    EquationSpec,
    FactorialShift,
    PhiMap,
    PowerShift,
)
from .exceptions import ConfigurationError, NumericOverflowError
from .growth import SeriesVerdict, Verdict, assess_series

DEFAULT_N_POWER = 100_000
DEFAULT_N_FACTORIAL = 50


class Existence(str, enum.Enum):
    NO_INTERMEDIATE = "NoIntermediate"
    INTERMEDIATE_IF_NONOSC = "IntermediateIfNonosc"
    INCONCLUSIVE = "Inconclusive"


class SturmVerdict(str, enum.Enum):
    EXISTS = "Exists"
    NOT_EXISTS = "NotExists"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class CriterionReport:
    j1: SeriesVerdict
    j2: SeriesVerdict
    combined: Existence
    shifted: bool
    truncation: int
    hp1: tuple
    warnings: tuple = field(default=())

    def as_dict(self) -> dict:
        return {
            "J1": self.j1.as_dict(),
            "J2": self.j2.as_dict(),
            "combined": self.combined.value,
            "shifted": self.shifted,
            "truncation": self.truncation,
            "hp1": [v.as_dict() for v in self.hp1],
            "warnings": list(self.warnings),
        }


def _has_factorial(spec):
    return isinstance(spec.a, FactorialShift) or isinstance(spec.b, FactorialShift)


def _max_truncation(spec: EquationSpec, a_offset: int) -> int | None:
    """Largest N for which a_{N+offset} and b_N are both defined."""
    limits = []
    if spec.a.domain_stop is not None:
        limits.append(spec.a.domain_stop - a_offset)
    if spec.b.domain_stop is not None:
        limits.append(spec.b.domain_stop)
    return min(limits) if limits else None


def default_truncation(spec: EquationSpec, shifted: bool = False) -> int:
    if _has_factorial(spec):
        n = DEFAULT_N_FACTORIAL
    else:
        n = DEFAULT_N_POWER
    cap = _max_truncation(spec, spec.p if shifted else 1)
    return n if cap is None else min(n, cap)


def check_hp1(spec: EquationSpec, N: int | None = None) -> tuple[SeriesVerdict, SeriesVerdict]:
    """Verdicts for ΣΦ*(1/a_i) < ∞ and Σ b_i = ∞ from partial sums up to N."""
    s = spec.start_index
    if N is None:
        N = default_truncation(spec)
    if N < s + 10:
        raise ConfigurationError(f"N must be at least start index + 10 = {s + 10}, got {N}")
    n = np.arange(s, N + 1)
    inv_a = np.exp(-spec.a.log_values(n) / spec.alpha)
    with np.errstate(over="ignore"):
        b = np.exp(spec.b.log_values(n))
    return assess_series(inv_a, s), assess_series(b, s)


def _log_tail(seq, start, alpha):
    tail = seq.inverse_power_tail(start, 1.0 / alpha)
    return math.log(tail) if tail > 0 else -math.inf


def criterion_series(spec: EquationSpec, N: int | None = None, shifted: bool = False,
                     log_scale: bool = False) -> CriterionReport:
    """Partial sums of J1 and J2 up to N and the combined existence verdict.

    All arithmetic is carried out on logarithms of the coefficients.  Factorial
    families are limited to N ≤ 50 unless ``log_scale`` is set, mirroring the
    range in which their values are representable comfortably.
    """
    s, p, alpha = spec.start_index, spec.p, spec.alpha
    if N is None:
        N = default_truncation(spec, shifted)
    if _has_factorial(spec) and N > DEFAULT_N_FACTORIAL and not log_scale:
        raise NumericOverflowError(
            f"factorial coefficients overflow the linear range beyond n={DEFAULT_N_FACTORIAL}"
            f" (requested N={N}); enable log-scale diagnostics",
            index=DEFAULT_N_FACTORIAL + 1,
        )
    hp1_conv, hp1_div = check_hp1(spec, N)
    warnings = []
    if hp1_conv.verdict is not Verdict.CONVERGES:
        warnings.append(f"sum of Phi*(1/a) is {hp1_conv.verdict.value}, expected convergence")
    if hp1_div.verdict is not Verdict.DIVERGES:
        warnings.append(f"sum of b is {hp1_div.verdict.value}, expected divergence")

    inner_a = spec.a.shifted(p - 1) if shifted else spec.a
    outer_a = spec.a.shifted(p) if shifted else spec.a.shifted(1)
    n = np.arange(s, N + 1)
    log_b = spec.b.log_values(n)

    # J1: inner tails Σ_{k>n} Φ*(1/ã_k), summed to N plus a modelled remainder
    k = np.arange(s + 1, N + 1)
    log_terms = -inner_a.log_values(k) / alpha
    log_rev = np.logaddexp.accumulate(log_terms[::-1])[::-1]
    log_rem = _log_tail(inner_a, N + 1, alpha)
    log_inner = np.append(np.logaddexp(log_rev, log_rem), log_rem)
    with np.errstate(over="ignore"):
        j1_terms = np.exp(log_b + alpha * log_inner)

    # J2: Φ*((1/â_n) Σ_{k≤n} b_k)
    log_cum_b = np.logaddexp.accumulate(log_b)
    with np.errstate(over="ignore"):
        j2_terms = np.exp((log_cum_b - outer_a.log_values(n)) / alpha)

    j1 = assess_series(j1_terms, s)
    j2 = assess_series(j2_terms, s)
    if j1.verdict is Verdict.CONVERGES and j2.verdict is Verdict.CONVERGES:
        combined = Existence.NO_INTERMEDIATE
    elif Verdict.DIVERGES in (j1.verdict, j2.verdict):
        combined = Existence.INTERMEDIATE_IF_NONOSC
    else:
        combined = Existence.INCONCLUSIVE
    return CriterionReport(j1, j2, combined, shifted, N, (hp1_conv, hp1_div), tuple(warnings))


def euler_threshold(alpha: float) -> float:
    """(1/(1+α))^{α+1}: the Euler weight n^{1+α} is nonoscillatory iff γ ≤ this."""
    alpha = PhiMap(alpha).alpha
    return (1.0 / (1.0 + alpha)) ** (alpha + 1.0)


def euler_spec(gamma: float, alpha: float, p: int = 1, start_index: int | None = None,
               form: str = "advanced") -> EquationSpec:
    """Euler-type equations with constant b ≡ γ.

    form="advanced": weight (n-p+1)^{1+α}, advance p (starts at n = p).
    form="halflinear": weight n^{1+α}, advance 1.
    form="criteria": weight n^{1+α}, advance p (the form used for the series).
    """
    if form == "advanced":
        a = PowerShift(1.0, 1 - p, 1.0 + alpha)
        return EquationSpec(a, Constant(gamma), PhiMap(alpha), p, p if start_index is None else start_index)
    if form == "halflinear":
        return EquationSpec(PowerShift(1.0, 0, 1.0 + alpha), Constant(gamma), PhiMap(alpha), 1,
                            1 if start_index is None else start_index)
    if form == "criteria":
        return EquationSpec(PowerShift(1.0, 0, 1.0 + alpha), Constant(gamma), PhiMap(alpha), p,
                            1 if start_index is None else start_index)
    raise ConfigurationError(f"unknown Euler form {form!r}")


def euler_transform(gamma: float, alpha: float) -> EquationSpec:
    """Equation satisfied by y_n = n^{1+α}Φ(Δx_n) for the half-linear Euler equation.

    Δ(Φ̃*(Δy_n)) + γ^{1/α}(n+1)^{-(1+α)/α} Φ̃*(y_{n+1}) = 0, i.e. exponent 1/α,
    weight a ≡ 1 and advance 1.
    """
    if not gamma > 0:
        raise ConfigurationError("gamma must be positive")
    alpha = PhiMap(alpha).alpha
    b = PowerShift(gamma ** (1.0 / alpha), 1, -(1.0 + alpha) / alpha)
    return EquationSpec(Constant(1.0), b, PhiMap(1.0 / alpha), 1, 1)


@dataclass(frozen=True)
class SturmReport:
    verdict: SturmVerdict
    sup_b: float
    inf_b: float
    threshold: float
    weight_above: bool
    weight_below: bool
    divergence: SeriesVerdict | None
    window: tuple

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "sup_b": self.sup_b,
            "inf_b": self.inf_b,
            "threshold": self.threshold,
            "weight_above": self.weight_above,
            "weight_below": self.weight_below,
            "divergence": None if self.divergence is None else self.divergence.as_dict(),
            "window": list(self.window),
        }


def sturm_corollary(spec: EquationSpec, N: int, horizon: int | None = None) -> SturmReport:
    """Existence test by comparison with the Euler weight n^{1+α}.

    The shifted weight a_{n+p-1} (the weight of the companion half-linear
    equation) is compared with n^{1+α} on [N, horizon]:

    * a_{n+p-1} ≥ n^{1+α}, ΣΦ*(n/a_{n+p}) = ∞, inf b > 0 and sup b below the
      Euler constant: intermediate solutions exist;
    * a_{n+p-1} ≤ n^{1+α} and inf b above the Euler constant: they do not.
    """
    alpha, p = spec.alpha, spec.p
    if N < max(p, spec.start_index):
        raise ConfigurationError(f"N must be at least max(p, start index), got {N}")
    if horizon is None:
        horizon = max(16 * N, DEFAULT_N_POWER)
        cap = _max_truncation(spec, p)
        if cap is not None:
            horizon = min(horizon, cap)
    if horizon < N + 32:
        raise ConfigurationError("sturm_corollary needs a window of at least 32 indices")
    thr = euler_threshold(alpha)
    n = np.arange(N, horizon + 1)
    b = spec.b.values(n)
    sup_b, inf_b = float(b.max()), float(b.min())

    weight = spec.a.shifted(p - 1)
    comparable = isinstance(weight, (PowerShift, Constant))
    if not comparable:
        return SturmReport(SturmVerdict.INCONCLUSIVE, sup_b, inf_b, thr, False, False, None, (N, horizon))
    exponent = weight.exponent if isinstance(weight, PowerShift) else 0.0
    log_w = weight.log_values(n)
    log_e = (1.0 + alpha) * np.log(n.astype(float))
    slack = 1e-12 * np.maximum(1.0, np.abs(log_e))
    above = bool(np.all(log_w >= log_e - slack) and exponent >= 1.0 + alpha)
    below = bool(np.all(log_w <= log_e + slack) and exponent <= 1.0 + alpha)

    divergence = None
    if above:
        terms = np.exp((np.log(n.astype(float)) - spec.a.log_values(n + p)) / alpha)
        divergence = assess_series(terms, N)
        if divergence.verdict is Verdict.DIVERGES and inf_b > 0 and sup_b < thr:
            return SturmReport(SturmVerdict.EXISTS, sup_b, inf_b, thr, above, below, divergence, (N, horizon))
    if below and inf_b > thr:
        return SturmReport(SturmVerdict.NOT_EXISTS, sup_b, inf_b, thr, above, below, divergence, (N, horizon))
    return SturmReport(SturmVerdict.INCONCLUSIVE, sup_b, inf_b, thr, above, below, divergence, (N, horizon))
