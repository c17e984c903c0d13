"""Exception hierarchy.

Every validation failure derives from :class:`ValidationError` (itself a
``ValueError``) so the CLI can map the whole family to exit code 2.
"""


class ValidationError(ValueError):
    """Base class for rejected inputs."""


class NegativeCoefficient(ValidationError):
    pass


class NotNormalized(ValidationError):
    pass


class OutOfRange(ValidationError):
    pass


class InfeasibleFidelity(ValidationError):
    pass


class AsymmetricState(ValidationError):
    pass


class NotPositiveSemidefinite(ValidationError):
    pass


class EmptyClass(ValidationError):
    pass


class DegenerateChannel(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class OutsideAsymptoticRegime(ValidationError):
    pass


class BudgetExceeded(ValidationError):
    pass


class UnsupportedCombination(ValidationError):
    pass


class ParseError(ValidationError):
    pass
