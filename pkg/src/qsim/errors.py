"""Exception hierarchy shared by all qsim modules."""


class QsimError(Exception):
    """Base class for all qsim errors."""


class DomainError(QsimError, ValueError):
    """An argument is outside the operation's documented domain."""


class ValidationError(QsimError, ValueError):
    """A matrix or vector fails a structural check (unitarity, hermiticity,
    normalization, probability-vector validity, eigenstate requirement)."""


class ResourceError(QsimError):
    """A requested computation exceeds the configured qubit cap."""


class NumericalConsistencyError(QsimError):
    """A quantity that must be real (or otherwise constrained) drifted
    past the allowed numerical residue."""


class ConditioningError(DomainError):
    """Conditioning on an event of (numerically) zero probability."""


class NotFoundError(QsimError):
    """A repeat-until-verified budget was exhausted.

    Carries the per-run candidates and the final report for diagnostics.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class InternalError(QsimError):
    """An internal invariant was violated (indicates a bug, not bad input)."""
