"""Exception hierarchy shared by all modules."""


class LMGError(Exception):
    """Base class for every error raised by this package."""


class DomainError(LMGError, ValueError):
    """Input outside the domain an operation is defined on."""


class SingularPointError(DomainError):
    """A closed-form expression is singular at the requested point."""


class NumericalDegeneracyError(LMGError):
    """Degenerate energy cluster could not be resolved.

    ``cluster`` carries the offending energies.
    """

    def __init__(self, message, cluster=None):
        super().__init__(message)
        self.cluster = cluster


class ConsistencyError(LMGError):
    """Two independent routes to the same quantity disagree."""


class DerivativeError(LMGError):
    """Finite-difference derivative did not pass its consistency check."""


class NoMaximumError(LMGError):
    """Objective is flat over the search interval."""


class TruncationError(LMGError):
    """Fock-space cutoff is too small for the requested tail accuracy."""
