"""Intermediate (slowly decaying) solutions of half-linear difference
equations with an advanced argument,

    Δ(a_n Φ(Δx_n)) + b_n Φ(x_{n+p}) = 0,   Φ(u) = |u|^α sgn u,

and of their half-linear companions.
"""

from .classify import Asymptotics, ClassificationReport, ShootOutcome, ShootResult, classify, shoot_halflinear
from .core import (
    CoefficientSequence,
    Constant,
    EquationSpec,
    FactorialShift,
    PhiMap,
    PowerShift,
    Table,
    Trajectory,
    geometric_table,
    phi,
    phi_star,
    quasidifference,
    sigma_alpha,
)
from .criteria import (
    CriterionReport,
    Existence,
    SturmVerdict,
    check_hp1,
    criterion_series,
    euler_spec,
    euler_threshold,
    euler_transform,
    sturm_corollary,
)
from .exceptions import (
    AdvDecayError,
    ConfigurationError,
    NumericalError,
    NumericOverflowError,
)
from .fixedpoint import (
    Direction,
    Envelope,
    FixedPointRun,
    apply_T_forward,
    apply_T_reverse,
    build_envelope,
    iterate_T,
    lemma_est_tail,
)
from .growth import SeriesVerdict, Verdict, assess_series
from .recursion import InitialData, residual, simulate, solve_advanced_step, telescoped_quasidiff

__version__ = "0.1.0"
