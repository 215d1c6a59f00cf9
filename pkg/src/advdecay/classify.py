"""Asymptotic classification of trajectories and shooting for decaying solutions.

With ΣΦ*(1/a) < ∞ every nonoscillatory solution either tends to a nonzero
limit, or tends to zero with x^{[1]} → -∞ (intermediate), or tends to zero with
x^{[1]} bounded (dominated decay).  `classify` turns those limits into
finite-window tests; `shoot_halflinear` searches the initial quasidifference
for the boundary between eventually-crossing and positive trajectories.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .core import EquationSpec, Trajectory, phi
from .exceptions import ConfigurationError, NumericalError
from .recursion import InitialData, simulate

MIN_WINDOW = 8
FLAT_DECREASE = 1e-4
STABLE_QUASIDIFF = 1e-3
SCAN_POINTS = 16
MAX_DOUBLINGS = 60


class Asymptotics(str, enum.Enum):
    OSCILLATORY = "Oscillatory"
    POSITIVE_LIMIT = "PositiveLimit"
    INTERMEDIATE = "Intermediate"
    DOMINATED_DECAY = "DominatedDecay"
    INCONCLUSIVE = "Inconclusive"


class ShootOutcome(str, enum.Enum):
    FOUND = "Found"
    OSCILLATORY_REGIME = "OscillatoryRegime"
    BRACKET_FAILURE = "BracketFailure"


@dataclass(frozen=True)
class ClassificationReport:
    verdict: Asymptotics
    last_sign_change: int | None
    tail_value: float
    tail_quasidiff: float
    quasidiff_trend: float
    thresholds: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "last_sign_change": self.last_sign_change,
            "tail_value": self.tail_value,
            "tail_quasidiff": self.tail_quasidiff,
            "quasidiff_trend": self.quasidiff_trend,
            "thresholds": dict(self.thresholds),
        }


def _last_sign_change(x: np.ndarray, offset: int) -> int | None:
    sgn = np.sign(x)
    flips = np.nonzero(sgn[1:] != sgn[:-1])[0]
    if flips.size == 0:
        return None
    return int(flips[-1] + 1 + offset)


def classify(traj: Trajectory, spec: EquationSpec, eps_x: float | None = None,
             q_min: float | None = None, burn_in: int | None = None) -> ClassificationReport:
    """Classify the asymptotic behaviour visible on the trajectory window.

    Defaults: ``burn_in`` is 10·p (reduced so that at least MIN_WINDOW entries
    remain), ``eps_x`` is 10⁻³·|x| at the first index and ``q_min`` is |x^{[1]}|
    at the first index after the burn-in.  The tests look at the last quarter
    of the post-burn-in window.
    """
    x = np.asarray(traj.values)
    q = np.asarray(traj.quasidiff)
    if burn_in is None:
        burn_in = max(0, min(10 * spec.p, x.size - MIN_WINDOW))
    if burn_in < 0 or x.size < burn_in + MIN_WINDOW:
        raise ConfigurationError(
            f"classification needs at least burn_in + {MIN_WINDOW} = {burn_in + MIN_WINDOW}"
            f" values, got {x.size}"
        )
    x_ref = abs(x[0]) if x[0] != 0 else float(np.max(np.abs(x)))
    if eps_x is None:
        eps_x = 1e-3 * x_ref
    body = x[burn_in:]
    qbody = q[min(burn_in, q.size - 1):]
    if q_min is None:
        q_min = abs(qbody[0])
    thresholds = {"eps_x": eps_x, "q_min": q_min, "burn_in": burn_in}

    change = _last_sign_change(body, traj.start_index + burn_in)
    if change is not None or np.any(body == 0):
        if change is None:
            change = int(traj.start_index + burn_in + np.nonzero(body == 0)[0][0])
        return ClassificationReport(Asymptotics.OSCILLATORY, change, float(x[-1]), float(q[-1]), math.nan, thresholds)

    # the equation is odd, so a negative solution behaves like its mirror image
    sign = 1.0 if body[-1] > 0 else -1.0
    body = sign * body
    qbody = sign * qbody

    quarter = max(2, body.size // 4)
    xt = body[-quarter:]
    qt = np.abs(qbody[-min(quarter, qbody.size):])
    tail_x, tail_q = float(xt[-1]), float(sign * qbody[-1])
    idx = np.arange(qt.size, dtype=float)
    slope = float(np.polyfit(idx, qt, 1)[0]) if qt.size >= 2 else 0.0
    trend = slope * qt.size / max(qt[-1], 1e-300)
    q_change = (qt[-1] - qt[0]) / max(abs(qt[-1]), 1e-300)
    x_decrease = (xt[0] - xt[-1]) / xt[0]
    decreasing = bool(np.all(np.diff(xt) < 0))

    def report(verdict):
        return ClassificationReport(verdict, None, sign * tail_x, tail_q, trend, thresholds)

    if tail_x >= eps_x and abs(x_decrease) < FLAT_DECREASE:
        return report(Asymptotics.POSITIVE_LIMIT)
    if tail_x < eps_x and decreasing:
        growing = slope > 0 and q_change >= STABLE_QUASIDIFF
        if abs(tail_q) > q_min and growing:
            return report(Asymptotics.INTERMEDIATE)
        if q_change < STABLE_QUASIDIFF and tail_q < 0:
            return report(Asymptotics.DOMINATED_DECAY)
    return report(Asymptotics.INCONCLUSIVE)


# ---------------------------------------------------------------------------
# shooting


@dataclass(frozen=True)
class ShotRecord:
    c: float
    crossed: bool
    length: int


@dataclass(frozen=True)
class ShootResult:
    critical_quasidiff: float
    trajectory: Trajectory | None
    bracket: tuple
    outcome: ShootOutcome
    scan: tuple = ()
    bisections: int = 0

    def as_dict(self) -> dict:
        return {
            "outcome": self.outcome.value,
            "critical_quasidiff": self.critical_quasidiff,
            "bracket": list(self.bracket),
            "bisections": self.bisections,
            "scan": [{"c": s.c, "crossed": s.crossed, "length": s.length} for s in self.scan],
        }


def scan_quasidiffs(spec: EquationSpec, x_start: float, count: int = SCAN_POINTS) -> np.ndarray:
    """Negative initial quasidifferences with log-spaced magnitudes.

    The largest magnitude, 2·a_{n₀}Φ(x_start), drives the second value below
    zero at once; the smallest is 10⁻⁶ of it.
    """
    top = 2.0 * spec.a(spec.start_index) * phi(x_start, spec.phi)
    return -top * np.logspace(-6.0, 0.0, count)


def shoot_once(spec: EquationSpec, x_start: float, c: float, horizon: int) -> Trajectory:
    init = InitialData(spec.start_index, (x_start, c), kind="quasidiff")
    return simulate(spec, init, horizon, stop_on_nonpositive=True)


def _crosses(traj: Trajectory) -> bool:
    return bool(traj.values[-1] <= 0)


def positive_decreasing_prefix(traj: Trajectory) -> Trajectory:
    """Truncate at the first index where positivity or strict decrease fails."""
    x = traj.values
    ok = (x[1:] > 0) & (np.diff(x) < 0)
    bad = np.nonzero(~ok)[0]
    stop = traj.end_index if bad.size == 0 else traj.start_index + int(bad[0])
    return traj.truncated(stop)


def shoot_halflinear(spec: EquationSpec, x_start: float = 1.0, horizon: int = 10_000,
                     max_bisections: int = 60, scan_points: int = SCAN_POINTS) -> ShootResult:
    """Bisect on c = x^{[1]}_{n₀} < 0 for the decaying solution with x_{n₀} = x_start.

    A trajectory that reaches x ≤ 0 before the horizon had c too negative; one
    that stays positive had c not negative enough.  The returned trajectory is
    shot at the bracket midpoint and truncated where positivity or strict
    decrease first fails.
    """
    if spec.p != 1:
        raise ConfigurationError("shoot_halflinear needs a half-linear spec (p = 1); use spec.halflinear()")
    if not x_start > 0:
        raise ConfigurationError("x_start must be positive")

    scan = []
    for c in scan_quasidiffs(spec, x_start, scan_points):
        traj = shoot_once(spec, x_start, float(c), horizon)
        scan.append(ShotRecord(float(c), _crosses(traj), len(traj)))
    scan.sort(key=lambda r: r.c)            # most negative first
    if all(r.crossed for r in scan):
        return ShootResult(math.nan, None, (scan[0].c, scan[-1].c), ShootOutcome.OSCILLATORY_REGIME, tuple(scan))

    low = high = None
    for r0, r1 in zip(scan, scan[1:]):
        if r0.crossed and not r1.crossed:
            low, high = r0.c, r1.c
            break
    if low is None:
        # nothing crossed: push the most negative value further out
        high = scan[0].c
        c = high
        for _ in range(MAX_DOUBLINGS):
            c *= 2.0
            try:
                crossed = _crosses(shoot_once(spec, x_start, c, horizon))
            except NumericalError:
                crossed = True
            scan.append(ShotRecord(c, crossed, 0))
            if crossed:
                low = c
                break
            high = c
        if low is None:
            return ShootResult(math.nan, None, (c, high), ShootOutcome.BRACKET_FAILURE, tuple(scan))

    it = 0
    while it < max_bisections:
        mid = 0.5 * (low + high)
        if mid <= low or mid >= high:
            break
        if _crosses(shoot_once(spec, x_start, mid, horizon)):
            low = mid
        else:
            high = mid
        it += 1
    c_star = 0.5 * (low + high)
    traj = positive_decreasing_prefix(shoot_once(spec, x_start, c_star, horizon))
    return ShootResult(c_star, traj, (low, high), ShootOutcome.FOUND, tuple(scan), it)
