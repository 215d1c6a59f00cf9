"""Forward marching of the advanced-argument equation and its residual.

The stencil {n, n+1, n+2, n+p} gives three regimes:

* p = 1: explicit in (x, x^{[1]}),
* p = 2: x_{n+2} enters both the difference and the reaction term, so each
  step solves a strictly increasing scalar equation,
* p ≥ 3: x_{n+p} appears only in the reaction term and is solved explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import EquationSpec, Trajectory, phi
from .exceptions import (
    ConfigurationError,
    DivergenceError,
    NumericOverflowError,
)

_BRACKET_LIMIT = 1e9


@dataclass(frozen=True)
class InitialData:
    """Seed segment for `simulate`.

    kind="values": the first values x_{n₀}, x_{n₀+1}, ... (two for p ≤ 2, p for p ≥ 3).
    kind="quasidiff" (p = 1 only): the pair (x_{n₀}, x^{[1]}_{n₀}).
    """

    start_index: int
    segment: tuple
    kind: str = "values"

    def __init__(self, start_index: int, segment: Sequence[float], kind: str = "values"):
        seg = tuple(float(v) for v in segment)
        if not all(math.isfinite(v) for v in seg):
            raise ConfigurationError("initial data must be finite")
        if kind not in ("values", "quasidiff"):
            raise ConfigurationError(f"initial data kind must be 'values' or 'quasidiff', got {kind!r}")
        object.__setattr__(self, "start_index", int(start_index))
        object.__setattr__(self, "segment", seg)
        object.__setattr__(self, "kind", kind)

    def required_length(self, p: int) -> int:
        return 2 if p <= 2 else p

    def check(self, spec: EquationSpec):
        need = self.required_length(spec.p)
        if self.kind == "quasidiff" and spec.p != 1:
            raise ConfigurationError("quasidifference seeding is only defined for p = 1")
        if len(self.segment) != need:
            raise ConfigurationError(
                f"p = {spec.p} needs {need} initial entries, got {len(self.segment)}"
            )
        if self.start_index < spec.start_index:
            raise ConfigurationError("initial data start before the equation's start index")


@dataclass(frozen=True)
class StepRoot:
    """Diagnostics of one implicit p = 2 step.

    The unknown is the increment d = x_{n+2} - x_{n+1}; ``t`` is the new
    value x_{n+1} + d and ``quasidiff`` is a_{n+1}Φ(d).  ``lo``/``hi`` and
    ``g_lo``/``g_hi`` describe the initial sign-changing bracket in d.
    """

    index: int
    t: float
    increment: float
    quasidiff: float
    lo: float
    hi: float
    g_lo: float
    g_hi: float
    g_t: float
    iterations: int


def _pow(u, e):
    try:
        return math.copysign(abs(u) ** e, u)
    except OverflowError:
        return math.copysign(math.inf, u)


def solve_advanced_step(a_n, a_n1, b_n, x_n, x_n1, alpha, index=0, q_n=None) -> StepRoot:
    """Solve a_{n+1}Φ(d) + b_nΦ(x_{n+1} + d) = x^{[1]}_n for the increment d.

    The left side is strictly increasing in d, so any sign-changing bracket
    contains the unique root.  Working with the increment rather than the
    new value keeps full relative precision when d is small compared with
    x_{n+1}.  ``q_n`` defaults to a_nΦ(x_{n+1} - x_n).  The bracket is
    bisected to floating-point resolution and polished by one safeguarded
    secant step.
    """
    rhs = a_n * _pow(x_n1 - x_n, alpha) if q_n is None else q_n

    def g(d):
        return a_n1 * _pow(d, alpha) + b_n * _pow(x_n1 + d, alpha) - rhs

    half = 2.0 * abs(x_n1 - x_n) + 1.0
    lo, hi = -half, half
    g_lo, g_hi = g(lo), g(hi)
    while g_lo > 0 or g_hi < 0:
        if g_lo > 0:
            lo *= 2.0
            g_lo = g(lo)
        if g_hi < 0:
            hi *= 2.0
            g_hi = g(hi)
        if max(abs(lo), abs(hi)) > _BRACKET_LIMIT:
            raise DivergenceError(f"p=2 step at n={index}: bracket exceeded {_BRACKET_LIMIT:g}")
    if not (math.isfinite(g_lo) and math.isfinite(g_hi)):
        raise NumericOverflowError(f"non-finite bracket value at n={index}", index=index)
    blo, bhi, gblo, gbhi = lo, hi, g_lo, g_hi

    it = 0
    while it < 2000:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g_mid = g(mid)
        it += 1
        if g_mid == 0.0:
            lo = hi = mid
            g_lo = g_hi = 0.0
            break
        if g_mid < 0:
            lo, g_lo = mid, g_mid
        else:
            hi, g_hi = mid, g_mid

    d = lo if abs(g_lo) <= abs(g_hi) else hi
    g_d = g(d)
    if g_hi != g_lo:
        cand = lo - g_lo * (hi - lo) / (g_hi - g_lo)
        if lo <= cand <= hi:
            g_c = g(cand)
            if abs(g_c) < abs(g_d):
                d, g_d = cand, g_c
    return StepRoot(index, x_n1 + d, d, a_n1 * _pow(d, alpha), blo, bhi, gblo, gbhi, g_d, it)


def _coeff_lists(spec: EquationSpec, start: int, stop: int):
    n = np.arange(start, stop + 1)
    return spec.a.values(n).tolist(), spec.b.values(n).tolist()


def simulate(spec: EquationSpec, init: InitialData, horizon: int, *, diagnostics: list | None = None,
             stop_on_nonpositive: bool = False) -> Trajectory:
    """March the equation forward from ``init`` up to index ``horizon``.

    If ``diagnostics`` is a list, one `StepRoot` per implicit step is appended
    to it (p = 2 only).  With ``stop_on_nonpositive`` the march ends at the
    first non-positive value (used by shooting; the returned window then ends
    at that value).
    """
    init.check(spec)
    s, p, alpha = init.start_index, spec.p, spec.alpha
    if horizon <= s + p:
        raise ConfigurationError(f"horizon must exceed start index + p = {s + p}")
    inv = 1.0 / alpha

    if p == 1:
        a, b = _coeff_lists(spec, s, horizon)
        x0 = init.segment[0]
        if init.kind == "quasidiff":
            q = init.segment[1]
            x1 = x0 + _pow(q / a[0], inv)
        else:
            x1 = init.segment[1]
            q = a[0] * _pow(x1 - x0, alpha)
        xs = [x0, x1]
        qs = [q]
        x = x1
        for i in range(1, horizon - s):
            if stop_on_nonpositive and x <= 0:
                break
            q = q - b[i - 1] * _pow(x, alpha)
            x = x + _pow(q / a[i], inv)
            if not (math.isfinite(x) and math.isfinite(q)):
                raise NumericOverflowError(f"non-finite value at n={s + i + 1}", index=s + i + 1)
            qs.append(q)
            xs.append(x)
        return Trajectory(s, xs, qs)

    if p == 2:
        # q is carried from the root so that the summed equation holds to rounding
        a, b = _coeff_lists(spec, s, horizon)
        xs = list(init.segment)
        qs = [a[0] * _pow(xs[1] - xs[0], alpha)]
        for i in range(0, horizon - s - 1):
            if stop_on_nonpositive and xs[-1] <= 0:
                break
            root = solve_advanced_step(a[i], a[i + 1], b[i], xs[i], xs[i + 1], alpha,
                                       index=s + i + 2, q_n=qs[i])
            if diagnostics is not None:
                diagnostics.append(root)
            if not (math.isfinite(root.t) and math.isfinite(root.quasidiff)):
                raise NumericOverflowError(f"non-finite value at n={s + i + 2}", index=s + i + 2)
            xs.append(root.t)
            qs.append(root.quasidiff)
        return Trajectory(s, xs, qs)

    # p ≥ 3
    a, b = _coeff_lists(spec, s, horizon)
    xs = list(init.segment)
    qs = [a[i] * _pow(xs[i + 1] - xs[i], alpha) for i in range(p - 1)]
    for i in range(0, horizon - s - p + 1):
        if stop_on_nonpositive and xs[-1] <= 0:
            break
        t = _pow((qs[i] - qs[i + 1]) / b[i], inv)
        if not math.isfinite(t):
            raise NumericOverflowError(f"non-finite value at n={s + i + p}", index=s + i + p)
        xs.append(t)
        qs.append(a[i + p - 1] * _pow(xs[i + p] - xs[i + p - 1], alpha))
    return Trajectory(s, xs, qs)


def residual(spec: EquationSpec, traj: Trajectory, scale: str = "none") -> np.ndarray:
    """r_n = a_{n+1}Φ(Δx_{n+1}) - a_nΦ(Δx_n) + b_nΦ(x_{n+p}) for each evaluable n.

    ``scale`` is "none" (raw), "b" (divided by b_n) or "local" (divided by the
    sum of the absolute values of the three terms, zero-safe).
    The first entry corresponds to n = traj.start_index.
    """
    x = traj.values
    reach = max(spec.p, 2)
    count = x.size - reach
    if count < 1:
        raise ConfigurationError(f"trajectory too short: residuals need index n+{reach}")
    s = traj.start_index
    q = traj.quasidiff
    n = np.arange(s, s + count)
    bn = spec.b.values(n)
    react = bn * phi(x[spec.p: spec.p + count], spec.phi)
    r = q[1: count + 1] - q[:count] + react
    if scale == "none":
        return r
    if scale == "b":
        return r / bn
    if scale == "local":
        mag = np.abs(q[1: count + 1]) + np.abs(q[:count]) + np.abs(react)
        return np.divide(r, mag, out=np.zeros_like(r), where=mag > 0)
    raise ConfigurationError(f"unknown residual scale {scale!r}")


def telescoped_quasidiff(spec: EquationSpec, traj: Trajectory, j: int, k: int) -> tuple[float, float]:
    """Return (x^{[1]}_k - x^{[1]}_j, -Σ_{i=j}^{k-1} b_iΦ(x_{i+p})) for checking the summation identity."""
    if k + spec.p - 1 > traj.end_index:
        raise ConfigurationError(f"k = {k} needs x up to index {k + spec.p - 1}, window ends at {traj.end_index}")
    lhs = traj.quasidiff_at(k) - traj.quasidiff_at(j)
    i = np.arange(j, k)
    terms = spec.b.values(i) * phi(traj.values[i + spec.p - traj.start_index], spec.phi)
    return lhs, -float(math.fsum(terms))
