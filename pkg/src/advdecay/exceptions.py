"""Exception hierarchy.

Configuration problems (bad input, inconsistent parameters) derive from
`ConfigurationError`; failures that happen while computing derive from
`NumericalError`.  The CLI maps the two families to different exit codes.
"""


class AdvDecayError(Exception):
    """Base class for all package errors."""


class ConfigurationError(AdvDecayError, ValueError):
    """Inputs are inconsistent or violate a precondition."""


class DomainError(ConfigurationError):
    """A scalar argument lies outside the domain of a map."""


class CoefficientIndexError(ConfigurationError, IndexError):
    """A coefficient sequence was evaluated below (or beyond) its domain."""


class PreconditionError(ConfigurationError):
    """A trajectory or envelope does not meet an operation's precondition."""


class HypothesisError(ConfigurationError):
    """A structural assumption of the comparison argument fails."""


class NumericalError(AdvDecayError, ArithmeticError):
    """A computation failed numerically."""


class NumericOverflowError(NumericalError, OverflowError):
    """A value left the double-precision range.  ``index`` is the culprit."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DivergenceError(NumericalError):
    """A root bracket could not be established."""


class TruncationError(NumericalError):
    """The truncated window is too short for the requested accuracy."""


class InstabilityError(NumericalError):
    """An iteration left its invariant set by more than the allowed margin."""
