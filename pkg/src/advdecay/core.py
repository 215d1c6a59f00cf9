"""Power maps, coefficient families, equation specifications and trajectories.

Everything here is an immutable value.  The equation handled throughout the
package is

    Δ(a_n Φ(Δx_n)) + b_n Φ(x_{n+p}) = 0,      n ≥ n₀,

with Φ(u) = |u|^α sgn u.  The half-linear companion equation (weight a_{n+p-1},
advance 1) is represented by shifting the ``a`` family, never the trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln, zeta

from .exceptions import (
    CoefficientIndexError,
    ConfigurationError,
    DomainError,
    NumericOverflowError,
)

# Largest n with n! finite in double precision.
_MAX_FACTORIAL_ARG = 170


# ---------------------------------------------------------------------------
# Φ, Φ* and σ_α


@dataclass(frozen=True)
class PhiMap:
    """The odd power map u ↦ |u|^α sgn u and its inverse."""

    alpha: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise DomainError(f"alpha must be a positive finite real, got {self.alpha!r}")

    def __call__(self, u):
        return phi(u, self)

    def inverse(self, u):
        return phi_star(u, self)


def _as_alpha(map_or_alpha) -> float:
    if isinstance(map_or_alpha, PhiMap):
        return map_or_alpha.alpha
    return PhiMap(float(map_or_alpha)).alpha


def _odd_power(u, exponent):
    arr = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("power map applied to a non-finite value")
    out = np.sign(arr) * np.abs(arr) ** exponent
    if out.ndim == 0:
        return float(out)
    return out


def phi(u, map_or_alpha):
    """Return |u|^α sgn u (elementwise for arrays)."""
    return _odd_power(u, _as_alpha(map_or_alpha))


def phi_star(u, map_or_alpha):
    """Return |u|^{1/α} sgn u, the inverse of `phi`."""
    return _odd_power(u, 1.0 / _as_alpha(map_or_alpha))


def sigma_alpha(alpha: float) -> float:
    """Constant with Φ*(X+Y) ≤ σ_α (Φ*(X) + Φ*(Y)) for X, Y ≥ 0."""
    alpha = _as_alpha(alpha)
    if alpha >= 1:
        return 1.0
    return 2.0 ** ((1.0 - alpha) / alpha)


# ---------------------------------------------------------------------------
# Coefficient families


class CoefficientSequence:
    """A strictly positive sequence evaluable at integer indices.

    Subclasses implement `_values` and `_log_values` on integer arrays that
    have already been checked against the admissible domain.
    """

    #: first admissible index (None means unbounded below)
    domain_start: int | None = None
    #: last admissible index (None means unbounded above)
    domain_stop: int | None = None

    def values(self, n) -> np.ndarray:
        n = self._check_indices(n)
        with np.errstate(over="ignore"):
            out = self._values(n)
        bad = ~np.isfinite(out)
        if np.any(bad):
            first = int(n.reshape(-1)[np.argmax(bad.reshape(-1))])
            raise NumericOverflowError(
                f"{self.describe()} overflows double precision at n={first}", index=first
            )
        return out

    def log_values(self, n) -> np.ndarray:
        return self._log_values(self._check_indices(n))

    def __call__(self, n: int) -> float:
        return float(self.values(np.array([n]))[0])

    def shifted(self, k: int) -> "CoefficientSequence":
        """The sequence n ↦ self(n + k)."""
        raise NotImplementedError

    def inverse_power_tail(self, start: int, exponent: float, scale: float = 1.0) -> float:
        """Σ_{k ≥ start} (scale / self(k))^exponent, using a closed form or model."""
        raise NotImplementedError

    def describe(self) -> str:
        return repr(self)

    def to_dict(self) -> dict:
        raise NotImplementedError

    def _check_indices(self, n) -> np.ndarray:
        n = np.asarray(n)
        if n.dtype.kind not in "iu":
            if not np.all(np.equal(np.mod(n, 1), 0)):
                raise CoefficientIndexError(f"{self.describe()} evaluated at a non-integer index")
            n = n.astype(np.int64)
        if n.size:
            if self.domain_start is not None and n.min() < self.domain_start:
                raise CoefficientIndexError(
                    f"{self.describe()} is undefined at n={int(n.min())}"
                    f" (domain starts at {self.domain_start})"
                )
            if self.domain_stop is not None and n.max() > self.domain_stop:
                raise CoefficientIndexError(
                    f"{self.describe()} is undefined at n={int(n.max())}"
                    f" (table ends at {self.domain_stop})"
                )
        return n


@dataclass(frozen=True)
class Constant(CoefficientSequence):
    c: float

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c > 0):
            raise ConfigurationError(f"constant coefficient must be positive, got {self.c!r}")

    def _values(self, n):
        return np.full(n.shape, float(self.c))

    def _log_values(self, n):
        return np.full(n.shape, math.log(self.c))

    def shifted(self, k):
        return self

    def inverse_power_tail(self, start, exponent, scale=1.0):
        return math.inf

    def describe(self):
        return f"Constant({self.c:g})"

    def to_dict(self):
        return {"family": "constant", "c": self.c}


@dataclass(frozen=True)
class PowerShift(CoefficientSequence):
    """coef · (n + shift)^exponent, defined for n + shift ≥ 1."""

    coef: float
    shift: int
    exponent: float

    def __post_init__(self):
        if not (math.isfinite(self.coef) and self.coef > 0):
            raise ConfigurationError(f"power coefficient must be positive, got {self.coef!r}")
        if not math.isfinite(self.exponent):
            raise ConfigurationError("power exponent must be finite")
        object.__setattr__(self, "shift", int(self.shift))

    @property
    def domain_start(self):
        return 1 - self.shift

    def _values(self, n):
        return self.coef * (n + self.shift).astype(float) ** self.exponent

    def _log_values(self, n):
        return math.log(self.coef) + self.exponent * np.log((n + self.shift).astype(float))

    def shifted(self, k):
        return PowerShift(self.coef, self.shift + k, self.exponent)

    def inverse_power_tail(self, start, exponent, scale=1.0):
        start = max(int(start), self.domain_start)
        q = self.exponent * exponent
        if q <= 1:
            return math.inf
        # Σ_{m ≥ start+shift} m^{-q} is a Hurwitz zeta value.
        return float((scale / self.coef) ** exponent * zeta(q, start + self.shift))

    def describe(self):
        return f"PowerShift({self.coef:g}·(n{self.shift:+d})^{self.exponent:g})"

    def to_dict(self):
        return {"family": "power", "coef": self.coef, "shift": self.shift, "exponent": self.exponent}


@dataclass(frozen=True)
class FactorialShift(CoefficientSequence):
    """(n + shift)!, defined for n + shift ≥ 1."""

    shift: int

    def __post_init__(self):
        object.__setattr__(self, "shift", int(self.shift))

    @property
    def domain_start(self):
        return 1 - self.shift

    def _values(self, n):
        m = n + self.shift
        out = np.exp(gammaln(m + 1.0))
        out[m > _MAX_FACTORIAL_ARG] = np.inf
        # exact integers where representable
        small = m <= 20
        if np.any(small):
            out[small] = [float(math.factorial(int(v))) for v in m[small]]
        return out

    def _log_values(self, n):
        return gammaln((n + self.shift) + 1.0)

    def shifted(self, k):
        return FactorialShift(self.shift + k)

    def inverse_power_tail(self, start, exponent, scale=1.0):
        start = max(int(start), self.domain_start)
        total = 0.0
        k = start
        log_scale = math.log(scale)
        while True:
            term = math.exp(exponent * (log_scale - float(gammaln(k + self.shift + 1.0))))
            total += term
            if term <= 1e-18 * total or term == 0.0:
                return total
            k += 1

    def describe(self):
        return f"FactorialShift((n{self.shift:+d})!)"

    def to_dict(self):
        return {"family": "factorial", "shift": self.shift}


@dataclass(frozen=True)
class Table(CoefficientSequence):
    """Explicit positive values for n = start_index, start_index + 1, ..."""

    start_index: int
    values_: tuple = field(metadata={"name": "values"})

    def __init__(self, start_index: int, values: Sequence[float]):
        vals = tuple(float(v) for v in values)
        if not vals:
            raise ConfigurationError("table coefficient needs at least one value")
        if not all(math.isfinite(v) and v > 0 for v in vals):
            raise ConfigurationError("table coefficient values must be finite and positive")
        object.__setattr__(self, "start_index", int(start_index))
        object.__setattr__(self, "values_", vals)

    @property
    def domain_start(self):
        return self.start_index

    @property
    def domain_stop(self):
        return self.start_index + len(self.values_) - 1

    def _array(self):
        return np.asarray(self.values_)

    def _values(self, n):
        return self._array()[n - self.start_index]

    def _log_values(self, n):
        return np.log(self._array()[n - self.start_index])

    def shifted(self, k):
        return Table(self.start_index - k, self.values_)

    def geometric_ratio(self) -> float | None:
        """Common ratio of the last few entries when they form a geometric run."""
        v = self._array()[-6:]
        if v.size < 3:
            return None
        ratios = v[1:] / v[:-1]
        r = ratios[-1]
        if np.allclose(ratios, r, rtol=1e-9, atol=0.0):
            return float(r)
        return None

    def inverse_power_tail(self, start, exponent, scale=1.0):
        start = max(int(start), self.start_index)
        stop = self.domain_stop
        total = 0.0
        if start <= stop:
            inside = np.arange(start, stop + 1)
            total = float(np.sum((scale / self._values(inside)) ** exponent))
        r = self.geometric_ratio()
        if r is None or r <= 1:
            return total
        last = self.values_[-1]
        m = max(start, stop + 1)
        q = r ** (-exponent)
        return total + (scale / last) ** exponent * q ** (m - stop) / (1.0 - q)

    def describe(self):
        return f"Table(n={self.start_index}..{self.domain_stop})"

    def to_dict(self):
        return {"family": "table", "start_index": self.start_index, "values": list(self.values_)}


def geometric_table(coef: float, ratio: float, start: int, stop: int) -> Table:
    """Table holding coef · ratio^n for n = start..stop."""
    n = np.arange(start, stop + 1, dtype=float)
    return Table(start, coef * ratio**n)


def coefficient_from_dict(d: dict) -> CoefficientSequence:
    d = dict(d)
    family = d.pop("family", None)
    builders = {
        "constant": lambda c: Constant(float(c)),
        "power": lambda coef=1.0, shift=0, exponent=1.0: PowerShift(float(coef), int(shift), float(exponent)),
        "factorial": lambda shift=0: FactorialShift(int(shift)),
        "table": lambda values, start_index=1: Table(int(start_index), values),
        "geometric": lambda ratio, stop, coef=1.0, start_index=1: geometric_table(
            float(coef), float(ratio), int(start_index), int(stop)),
    }
    if family not in builders:
        raise ConfigurationError(f"unknown coefficient family {family!r}")
    try:
        return builders[family](**d)
    except TypeError as exc:
        raise ConfigurationError(f"bad parameters for {family} coefficient: {exc}") from None


def coeff_eval(seq: CoefficientSequence, n: int) -> float:
    return seq(n)


def coeff_log_eval(seq: CoefficientSequence, n: int) -> float:
    """Natural logarithm of seq(n); never overflows, exact for factorials."""
    return float(seq.log_values(np.array([n]))[0])


# ---------------------------------------------------------------------------
# Equations and trajectories


@dataclass(frozen=True)
class EquationSpec:
    a: CoefficientSequence
    b: CoefficientSequence
    phi: PhiMap
    p: int = 1
    start_index: int = 1

    def __post_init__(self):
        if not isinstance(self.phi, PhiMap):
            object.__setattr__(self, "phi", PhiMap(float(self.phi)))
        if int(self.p) != self.p or self.p < 1:
            raise ConfigurationError(f"advance p must be an integer ≥ 1 (delay case p ≤ 0 unsupported), got {self.p!r}")
        if int(self.start_index) != self.start_index or self.start_index < 1:
            raise ConfigurationError(f"start index must be an integer ≥ 1, got {self.start_index!r}")
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "start_index", int(self.start_index))
        for name in ("a", "b"):
            seq = getattr(self, name)
            if not isinstance(seq, CoefficientSequence):
                raise ConfigurationError(f"{name} must be a coefficient sequence")
            lo = seq.domain_start
            if lo is not None and lo > self.start_index:
                raise ConfigurationError(
                    f"{name} = {seq.describe()} is undefined at the start index {self.start_index}"
                )

    @property
    def alpha(self) -> float:
        return self.phi.alpha

    def halflinear(self) -> "EquationSpec":
        """The companion equation Δ(a_{n+p-1}Φ(Δy_n)) + b_nΦ(y_{n+1}) = 0."""
        return EquationSpec(self.a.shifted(self.p - 1), self.b, self.phi, 1, self.start_index)

    def with_start(self, start_index: int) -> "EquationSpec":
        return EquationSpec(self.a, self.b, self.phi, self.p, start_index)

    def to_dict(self) -> dict:
        return {
            "a": self.a.to_dict(),
            "b": self.b.to_dict(),
            "alpha": self.alpha,
            "p": self.p,
            "start_index": self.start_index,
        }


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.flags.writeable = False
    return out


def quasidifference(values, spec: EquationSpec, start_index: int | None = None) -> np.ndarray:
    """a_n Φ(x_{n+1} - x_n) for each n with both neighbours in the window."""
    x = np.asarray(values, dtype=float)
    if x.size < 2:
        raise ConfigurationError("quasidifference needs at least two values")
    s = spec.start_index if start_index is None else int(start_index)
    n = np.arange(s, s + x.size - 1)
    return spec.a.values(n) * phi(np.diff(x), spec.phi)


@dataclass(frozen=True)
class Trajectory:
    """Finite window x_s, ..., x_{s+N-1} and its quasidifference.

    ``quasidiff[i]`` is a_{s+i} Φ(x_{s+i+1} - x_{s+i}) for the equation the
    trajectory was built against.
    """

    start_index: int
    values: np.ndarray
    quasidiff: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "start_index", int(self.start_index))
        object.__setattr__(self, "values", _frozen(self.values))
        object.__setattr__(self, "quasidiff", _frozen(self.quasidiff))
        if self.quasidiff.size != max(self.values.size - 1, 0):
            raise ConfigurationError("quasidiff must have one entry fewer than values")
        if not (np.all(np.isfinite(self.values)) and np.all(np.isfinite(self.quasidiff))):
            raise ConfigurationError("trajectory entries must be finite")

    @classmethod
    def from_values(cls, values, spec: EquationSpec, start_index: int | None = None) -> "Trajectory":
        s = spec.start_index if start_index is None else int(start_index)
        return cls(s, values, quasidifference(values, spec, s))

    def __len__(self):
        return self.values.size

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.start_index, self.start_index + self.values.size)

    @property
    def end_index(self) -> int:
        return self.start_index + self.values.size - 1

    def value_at(self, n: int) -> float:
        i = n - self.start_index
        if not 0 <= i < self.values.size:
            raise CoefficientIndexError(f"index {n} outside trajectory window")
        return float(self.values[i])

    def quasidiff_at(self, n: int) -> float:
        i = n - self.start_index
        if not 0 <= i < self.quasidiff.size:
            raise CoefficientIndexError(f"quasidifference index {n} outside trajectory window")
        return float(self.quasidiff[i])

    def truncated(self, stop: int) -> "Trajectory":
        """Keep indices start..stop inclusive."""
        k = stop - self.start_index + 1
        return Trajectory(self.start_index, self.values[:k], self.quasidiff[: max(k - 1, 0)])

    def scaled(self, lam: float, alpha: float) -> "Trajectory":
        """λ·x, whose quasidifference is λ^α times the original."""
        return Trajectory(self.start_index, lam * self.values, lam**alpha * self.quasidiff)

    def to_dict(self) -> dict:
        return {
            "start_index": self.start_index,
            "values": self.values.tolist(),
            "quasidiff": self.quasidiff.tolist(),
        }
