"""Exception hierarchy.

The CLI maps these onto exit codes: :class:`ParameterError` subclasses exit
with 2, :class:`DegeneracyError` subclasses with 4.
"""


class HeunError(Exception):
    """Base class for every error raised by the package."""


class ParameterError(HeunError, ValueError):
    """Inputs violate a documented precondition."""


class DegeneracyError(HeunError, ArithmeticError):
    """A structural degeneracy of the underlying equations was hit."""


class SingularityCollision(ParameterError):
    """The third singular point coincides with 0 or 1."""


class DomainError(ParameterError):
    """Argument outside the supported evaluation domain."""


class UnsupportedDomain(ParameterError):
    """The requested expansion has no convergent term integrals, or no real
    evaluation segment inside its convergence disk."""


class EvaluationAtSingularity(ParameterError):
    pass


class NotApplicable(ParameterError):
    """Parameters do not satisfy the constraints of a special case."""


class IrregularSingularity(DegeneracyError):
    pass


class Resonance(DegeneracyError):
    """Leading recurrence coefficient vanishes at a positive index."""

    def __init__(self, n, message=None):
        self.n = n
        super().__init__(message or f"leading recurrence coefficient vanishes at n={n}")


class NoConvergence(DegeneracyError):
    pass


class PoleAtC(DegeneracyError):
    """Lower hypergeometric parameter reached a nonpositive integer."""


class DegenerateZ0(DegeneracyError):
    """The extra singular point q/(alpha*beta) is undefined."""


class DegeneratePi(DegeneracyError):
    """The accessory polynomial of the second transform has degree < 1."""


class InconsistentC0(DegeneracyError):
    """Two independent determinations of the integration constant disagree."""
