"""Envelope operators linking intermediate solutions of the advanced equation
and of its half-linear companion.

Forward: from an intermediate solution x of the advanced equation, the map

    z^{[1]}_n = x^{[1]}_{n0} - Σ_{k=n0}^{n-1} b_k Φ(u_{k+1}),
    z_n       = -Σ_{i≥n} Φ*(z^{[1]}_i / a_{i+p-1})

sends the order interval M·x_{n+p-1} ≤ u_n ≤ x_{n+p-1} into itself, and its
fixed points solve Δ(a_{n+p-1}Φ(Δz_n)) + b_nΦ(z_{n+1}) = 0.

Reverse: from an intermediate solution y of the companion equation, anchored
at n1 = n0 + p,

    w^{[1]}_n = y^{[1]}_{n1} - Σ_{k=n1}^{n-1} b_k Φ(u_{k+p}),
    w_n       = -Σ_{i≥n} Φ*(w^{[1]}_i / a_i)

maps y_{n-p+1} ≤ u_n ≤ H·y_{n-p+1} into itself, and fixed points solve the
advanced equation.

The infinite sums are cut at the end of the base window.  The missing tail is
replaced by the envelope value scaled with the current quasidifference ratio,
clamped to the envelope interval; that interval is reported as the truncation
uncertainty.  Fixed points are located by damped Picard iteration.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .classify import ClassificationReport, classify
from .core import EquationSpec, Trajectory, phi, phi_star, sigma_alpha
from .exceptions import (
    ConfigurationError,
    HypothesisError,
    InstabilityError,
    PreconditionError,
    TruncationError,
)
from .recursion import residual

M_CLAMP = 1.0 - 1e-6
H_CLAMP = 1.0 + 1e-6
TAIL_FRACTION = 0.1


class Direction(str, enum.Enum):
    FORWARD = "ForwardToHalfLinear"
    REVERSE = "ReverseToAdvanced"

    @classmethod
    def parse(cls, value) -> "Direction":
        if isinstance(value, cls):
            return value
        key = str(value).lower()
        if key in ("forward", cls.FORWARD.value.lower()):
            return cls.FORWARD
        if key in ("reverse", cls.REVERSE.value.lower()):
            return cls.REVERSE
        raise ConfigurationError(f"direction must be 'forward' or 'reverse', got {value!r}")


@dataclass(frozen=True)
class Envelope:
    """Order interval [lower, upper] on the window [start, stop] plus anchor data.

    ``base`` is the normalized base trajectory (base = scale·original) and
    ``constant`` is M (forward) or H (reverse); ``bound`` is L or Λ.
    """

    direction: Direction
    base: Trajectory
    scale: float
    start: int
    stop: int
    lower: np.ndarray
    upper: np.ndarray
    constant: float
    bound: float
    anchor: int
    anchor_quasidiff: float
    spec: EquationSpec

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.start, self.stop + 1)

    @property
    def target_spec(self) -> EquationSpec:
        """Equation solved by fixed points of the operator."""
        if self.direction is Direction.FORWARD:
            return self.spec.halflinear().with_start(self.start)
        return self.spec

    def violation(self, u: np.ndarray) -> float:
        """Largest overshoot outside [lower, upper], relative to the upper envelope."""
        over = np.maximum(u - self.upper, self.lower - u)
        return float(max(0.0, np.max(over / self.upper)))

    def as_dict(self) -> dict:
        return {
            "direction": self.direction.value,
            "window": [self.start, self.stop],
            "constant": self.constant,
            "bound": self.bound,
            "anchor": self.anchor,
            "anchor_quasidiff": self.anchor_quasidiff,
            "scale": self.scale,
        }


@dataclass(frozen=True)
class OperatorImage:
    """T(u): values and quasidifferences on the window, with the tail used."""

    values: np.ndarray
    quasidiff: np.ndarray
    tail: float
    tail_interval: tuple


def _check_base(base: Trajectory):
    x = base.values
    if x.size < 8:
        raise PreconditionError("base trajectory needs at least 8 values")
    if not (np.all(x > 0) and np.all(np.diff(x) < 0)):
        raise PreconditionError("base trajectory must be positive and strictly decreasing")


def _normalize(base: Trajectory, alpha: float):
    top = float(base.values[0])
    lam = 1.0 if top <= 1.0 else 1.0 / top
    return (base if lam == 1.0 else base.scaled(lam, alpha)), lam


def _window_sum_max(b, weights, count, lo, hi):
    """max over n ∈ [lo, hi] of Σ_{j<count} b[n+j]·weights[n+j] (arrays indexed by offset)."""
    if count <= 0 or hi < lo:
        return 0.0
    terms = b * weights
    c = np.concatenate([[0.0], np.cumsum(terms)])
    sums = c[lo + count: hi + count + 1] - c[lo: hi + 1]
    return float(np.max(sums)) if sums.size else 0.0


def build_envelope(direction, base: Trajectory, spec: EquationSpec, anchor: int | None = None) -> Envelope:
    """Envelope constants and bounds for the chosen direction.

    Forward: ``base`` is an intermediate solution of the advanced equation,
    n0 = ``anchor`` (default: its first index).  Reverse: ``base`` is an
    intermediate solution of the companion half-linear equation and the
    anchor is n1 = n0 + p.  The base is first rescaled so that its values lie
    in (0, 1].

    L (or Λ) is the larger of the b-sum over the p-1 indices at the anchor and
    the window maximum of the b·Φ(base)-weighted sums; M and H take equality in
    their defining inequalities.
    """
    direction = Direction.parse(direction)
    _check_base(base)
    alpha, p = spec.alpha, spec.p
    base, lam = _normalize(base, alpha)
    s, E = base.start_index, base.end_index
    x = base.values

    if direction is Direction.FORWARD:
        n0 = s if anchor is None else int(anchor)
        stop = E - p
        if not s <= n0 < stop - 4:
            raise ConfigurationError(f"anchor {n0} leaves no window inside base indices [{s}, {E}]")
        # here quasidiff is that of the advanced equation
        q0 = base.quasidiff_at(n0)
        if not q0 < 0:
            raise PreconditionError("base quasidifference at the anchor must be negative")
        idx = np.arange(n0, stop + 1)
        b = spec.b.values(np.arange(n0, E + 1))
        anchor_sum = float(np.sum(b[: p - 1]))
        weights = phi(_shifted(x, s, n0, E, p), alpha)
        last = E - 2 * p + 2 - n0            # keep i + p ≤ E
        L = max(anchor_sum, _window_sum_max(b, weights, p - 1, 0, min(stop - n0, last)))
        M = float(phi_star(abs(q0) / (L + abs(q0)), alpha))
        M = min(M, M_CLAMP)
        upper = x[idx + p - 1 - s].copy()
        lower = M * upper
        return Envelope(direction, base, lam, n0, stop, lower, upper, M, L, n0, q0, spec)

    # reverse: base solves the companion, recompute its quasidifference there
    half = spec.halflinear()
    base = Trajectory.from_values(x, half, s)
    n0 = s if anchor is None else int(anchor) - p
    n1 = n0 + p
    if not s <= n0 or n1 >= E - p - 4:
        raise ConfigurationError(f"anchor {n1} leaves no window inside base indices [{s}, {E}]")
    Y = abs(base.quasidiff_at(n1))
    idx = np.arange(n1, E + 1)
    # Σ_{i=n-p+1}^{n-1} b_i: offsets measured from n1-p+1
    first = n1 - p + 1
    b = spec.b.values(np.arange(first, E))
    anchor_sum = float(np.sum(b[: p - 1]))
    weights = phi(x[np.arange(first, E) + 1 - s], alpha)
    Lam = max(anchor_sum, _window_sum_max(b, weights, p - 1, 0, E - n1))
    if not Lam < Y:
        raise HypothesisError(
            f"reverse envelope needs the b-window bound {Lam:.6g} below |y^[1]| = {Y:.6g}"
            f" at anchor {n1}; choose a later anchor"
        )
    H = float(phi_star(Y / (Y - Lam), alpha))
    H = max(H, H_CLAMP)
    lower = x[idx - p + 1 - s].copy()
    upper = H * lower
    return Envelope(direction, base, lam, n1, E, lower, upper, H, Lam, n1, base.quasidiff_at(n1), spec)


def _shifted(x, s, n0, E, p):
    """x_{i+p} for i ∈ [n0, E], zero where the index leaves the base window."""
    i = np.arange(n0, E + 1) + p
    out = np.zeros(i.size)
    ok = i <= E
    out[ok] = x[i[ok] - s]
    return out


def _tail_sum(increments: np.ndarray, tail: float) -> np.ndarray:
    """v_n = tail + Σ_{i≥n} increments_i (reverse cumulative sum)."""
    return tail + np.cumsum(increments[::-1])[::-1]


def apply_T_forward(u, env: Envelope, spec: EquationSpec | None = None) -> OperatorImage:
    """Forward operator on the normalized window [n0, stop]."""
    if env.direction is not Direction.FORWARD:
        raise ConfigurationError("apply_T_forward needs a forward envelope")
    spec = env.spec if spec is None else spec
    u = np.asarray(u, dtype=float)
    if u.shape != env.upper.shape:
        raise ConfigurationError(f"u must have {env.upper.size} entries on the window")
    alpha, p = spec.alpha, spec.p
    n0, stop = env.start, env.stop
    base = env.base
    idx = env.indices

    terms = spec.b.values(idx[:-1]) * phi(u[1:], alpha)
    z1 = env.anchor_quasidiff - np.concatenate([[0.0], np.cumsum(terms)])
    dz = phi_star(z1 / spec.a.values(idx + p - 1), alpha)

    # tail z_{stop+1}: follow the base with the current quasidifference ratio
    x_tail = base.value_at(stop + p)
    ratio = float(phi_star(abs(z1[-1]) / abs(base.quasidiff_at(stop + p - 1)), alpha))
    ratio = min(max(ratio, env.constant), 1.0)
    tail = ratio * x_tail
    z = _tail_sum(-dz, tail)
    _check_tail(tail, z)
    return OperatorImage(z, z1, tail, (env.constant * x_tail, x_tail))


def apply_T_reverse(u, env: Envelope, spec: EquationSpec | None = None) -> OperatorImage:
    """Reverse operator on the normalized window [n1, stop].

    w^{[1]} is available up to m = stop - p + 1; beyond m the output follows
    the base, w_n = ρ·y_{n-p+1}, with the same clamped ratio ρ used for the
    truncated tail.
    """
    if env.direction is not Direction.REVERSE:
        raise ConfigurationError("apply_T_reverse needs a reverse envelope")
    spec = env.spec if spec is None else spec
    u = np.asarray(u, dtype=float)
    if u.shape != env.upper.shape:
        raise ConfigurationError(f"u must have {env.upper.size} entries on the window")
    alpha, p = spec.alpha, spec.p
    n1, stop = env.start, env.stop
    base = env.base
    m = stop - p + 1
    nn = np.arange(n1, m + 1)

    terms = spec.b.values(nn[:-1]) * phi(u[nn[:-1] + p - n1], alpha)
    w1 = env.anchor_quasidiff - np.concatenate([[0.0], np.cumsum(terms)])
    dw = phi_star(w1 / spec.a.values(nn), alpha)

    rho = float(phi_star(abs(w1[-1]) / abs(base.quasidiff_at(m - p + 1)), alpha))
    rho = min(max(rho, 1.0), env.constant)
    y_tail = base.value_at(m - p + 2)
    tail = rho * y_tail
    w = _tail_sum(-dw, tail)
    ext = rho * base.values[np.arange(m + 1, stop + 1) - p + 1 - base.start_index]
    _check_tail(tail, w)
    return OperatorImage(np.concatenate([w, ext]), w1, tail, (y_tail, env.constant * y_tail))


def _check_tail(tail, z):
    if tail > TAIL_FRACTION * z[0]:
        raise TruncationError(
            f"truncated tail {tail:.3g} exceeds {TAIL_FRACTION:.0%} of the window-start value"
            f" {z[0]:.3g}; extend the base trajectory"
        )


def apply_T(u, env: Envelope, spec: EquationSpec | None = None) -> OperatorImage:
    if env.direction is Direction.FORWARD:
        return apply_T_forward(u, env, spec)
    return apply_T_reverse(u, env, spec)


def lemma_est_tail(base: Trajectory, spec: EquationSpec, n: int) -> float:
    """Upper bound for Σ_{i≥n} Φ*((1/a_{i+p-1}) Σ_{k<i} b_kΦ(base_{k+p})).

    σ_α·[Σ_{i≥n} Φ*((B(p-1) + |x^{[1]}_{m0}|)/a_{i+p-1}) + base_{n+p-1}] with
    B the largest b on the base window and m0 the first base index.  The
    first sum is evaluated through the coefficient family's tail formula.
    """
    x = base.values
    if np.any(x > 1.0) or np.any(x <= 0):
        raise PreconditionError("lemma_est_tail needs base values in (0, 1]; rescale first")
    alpha, p = spec.alpha, spec.p
    s, E = base.start_index, base.end_index
    if not s <= n <= E - p + 1:
        raise ConfigurationError(f"n must lie in [{s}, {E - p + 1}]")
    B = float(np.max(spec.b.values(np.arange(s, E + 1)))) if p > 1 else 0.0
    c = B * (p - 1) + abs(base.quasidiff_at(s))
    series = spec.a.shifted(p - 1).inverse_power_tail(n, 1.0 / alpha, scale=c)
    return sigma_alpha(alpha) * (series + float(x[n + p - 1 - s]))


@dataclass
class FixedPointRun:
    """Outcome of `iterate_T`.

    ``residuals`` are envelope-weighted sup norms ‖(T(u) - u)/upper‖ and
    ``violations`` the relative overshoot of each image outside the envelope.
    ``solution`` is the last image scaled back to the base's original size.
    """

    direction: Direction
    converged: bool
    iterations: int
    residuals: list
    violations: list
    truncation_index: int
    tail_bound: float
    solution: Trajectory | None
    equation_residual: float
    classification: ClassificationReport | None
    envelope: Envelope
    iterates: list = field(default_factory=list, repr=False)
    lemma_bound: float = math.nan

    def as_dict(self) -> dict:
        return {
            "direction": self.direction.value,
            "converged": self.converged,
            "iterations": self.iterations,
            "final_residual": self.residuals[-1] if self.residuals else math.nan,
            "max_violation": max(self.violations) if self.violations else 0.0,
            "truncation_index": self.truncation_index,
            "tail_bound": self.tail_bound,
            "lemma_bound": self.lemma_bound,
            "equation_residual": self.equation_residual,
            "classification": None if self.classification is None else self.classification.as_dict(),
            "envelope": self.envelope.as_dict(),
        }


def _seed(env: Envelope, seed) -> np.ndarray:
    if isinstance(seed, str):
        key = seed.lower()
        if key == "upper":
            return env.upper.copy()
        if key == "lower":
            return env.lower.copy()
        if key == "midpoint":
            return 0.5 * (env.lower + env.upper)
        raise ConfigurationError(f"seed must be upper, lower, midpoint or an array, got {seed!r}")
    u = np.asarray(seed, dtype=float) * env.scale
    if u.shape != env.upper.shape:
        raise ConfigurationError(f"seed array must have {env.upper.size} entries")
    return u


def _solution(env: Envelope, image: OperatorImage) -> Trajectory:
    alpha = env.spec.alpha
    target = env.target_spec
    if env.direction is Direction.FORWARD:
        values = np.append(image.values, image.tail)
    else:
        values = image.values
    traj = Trajectory.from_values(values, target, env.start)
    return traj if env.scale == 1.0 else traj.scaled(1.0 / env.scale, alpha)


def iterate_T(direction, env: Envelope, spec: EquationSpec | None = None, seed="upper",
              max_iter: int = 200, tol: float = 1e-6, damping: float = 0.5,
              keep_iterates: bool = False) -> FixedPointRun:
    """Damped Picard iteration u ← (1-θ)u + θ·T(u) from the chosen seed.

    Stops when ‖(T(u) - u)/upper‖∞ < tol.  On convergence the last image is
    checked against the target equation (relative residual per index) and
    classified.  Reaching ``max_iter`` returns ``converged=False``.
    """
    direction = Direction.parse(direction)
    if direction is not env.direction:
        raise ConfigurationError("direction does not match the envelope")
    spec = env.spec if spec is None else spec
    if not 0.0 < damping <= 1.0:
        raise ConfigurationError("damping must lie in (0, 1]")
    if not tol > 0 or max_iter < 1:
        raise ConfigurationError("tol must be positive and max_iter at least 1")

    u = _seed(env, seed)
    residuals, violations, iterates = [], [], []
    converged = False
    image = None
    it = 0
    for it in range(1, max_iter + 1):
        image = apply_T(u, env, spec)
        viol = env.violation(image.values)
        violations.append(viol)
        if viol > 10 * tol:
            raise InstabilityError(f"iterate {it} left the envelope by {viol:.3g} (relative)")
        r = float(np.max(np.abs(image.values - u) / env.upper))
        residuals.append(r)
        if keep_iterates:
            iterates.append(image.values.copy())
        if r < tol:
            converged = True
            break
        u = (1.0 - damping) * u + damping * image.values

    width = image.tail_interval[1] - image.tail_interval[0]
    try:
        lemma = lemma_est_tail(env.base, spec, env.stop - spec.p + 1) if direction is Direction.FORWARD else math.nan
    except (PreconditionError, ConfigurationError):
        lemma = math.nan

    solution, eq_res, report = None, math.nan, None
    if converged:
        solution = _solution(env, image)
        target = env.target_spec
        eq_res = float(np.max(np.abs(residual(target, solution, scale="local"))))
        report = classify(solution, target)
    return FixedPointRun(direction, converged, it, residuals, violations, env.stop,
                         width / env.scale, solution, eq_res, report, env, iterates, lemma)
