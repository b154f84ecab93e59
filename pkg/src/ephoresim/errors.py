"""Exception hierarchy.

Input-validation errors subclass :class:`ValueError` (or :class:`IndexError`)
so callers that only care about bad arguments can catch the builtin.
Everything raised by a numerical procedure that could not finish derives from
:class:`NumericalError`; the command-line front end maps those to exit
status 3.
"""


class EphoresimError(Exception):
    """Base class for all package errors."""


class ConfigError(EphoresimError, ValueError):
    """Malformed or inconsistent experiment configuration."""


class InvalidConstraint(EphoresimError, ValueError):
    """Non-positive power budget, distance or interval in a design problem."""


class InvalidInterval(EphoresimError, ValueError):
    """Interval with end before start."""


class IndexOutOfRange(EphoresimError, IndexError):
    pass


class LengthMismatch(EphoresimError, ValueError):
    pass


class InvalidMean(EphoresimError, ValueError):
    """Negative (or non-finite) Poisson mean."""


class NumericalError(EphoresimError):
    """A numerical procedure could not produce a trustworthy answer."""


class InfeasibleDesign(NumericalError):
    """The design equations have no admissible solution for the given budget."""


class NonConvergence(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    pass


class SingularTime(NumericalError):
    """Concentration requested at the emission point at the emission instant."""


class StiffnessFailure(NumericalError):
    """Adaptive step size collapsed; use the analytic solution instead."""


class GeneralFormUnsupported(NumericalError):
    pass


class UnboundedFeasibility(NumericalError):
    """Zero acceleration: every radius satisfies the viscous-dominance bound."""
