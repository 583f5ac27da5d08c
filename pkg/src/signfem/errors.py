"""Exception hierarchy shared by all modules.

Every error is a ``SignFemError``; the CLI maps the subclasses onto exit codes.
"""


class SignFemError(Exception):
    """Base class for all package errors."""


class DomainError(SignFemError, ValueError):
    """An argument lies outside the domain of a function."""


class ConfigError(DomainError):
    """A physical or mesh configuration violates its invariants."""


class NoRealRoot(SignFemError):
    """The requested critical value does not exist for these ratios."""


class NoCriticalMesh(SignFemError):
    """No critical mesh sizes exist because the configuration is not unstable."""


class NoAdmissibleRatio(SignFemError):
    """No positive mesh ratio realises the requested critical angle."""


class ConsistencyError(SignFemError):
    """Two independent evaluations of the same quantity disagree."""


class DegenerateNormalization(SignFemError):
    """A mode profile cannot be normalised (non-positive radicand)."""


class SingularSystem(SignFemError):
    """An exactly zero pivot was met while factorising a per-mode matrix."""

    def __init__(self, message, mode=None):
        super().__init__(message)
        self.mode = mode


class SizeLimitExceeded(SignFemError):
    """A dense computation was requested for a system that is too large."""
