"""Exception types used across the toolkit."""


class NhprobeError(Exception):
    """Base class for all errors raised by this package."""


class SizeError(NhprobeError, ValueError):
    """Lattice size below the minimum the constructor supports."""


class ParameterError(NhprobeError, ValueError):
    """Model parameter missing, unknown, or out of its valid range."""


class EigensolverError(NhprobeError, RuntimeError):
    """Dense eigensolver failed to converge; carries a matrix fingerprint."""


class TrustError(NhprobeError, RuntimeError):
    """Eigenpair residuals exceed the trust threshold for downstream use."""


class ReferenceEnergyError(NhprobeError, ValueError):
    """Winding reference energy sits on (or too close to) the spectrum."""


class TrackingError(NhprobeError, RuntimeError):
    """Eigenstate could not be followed across a parameter step."""


class DegenerateOverlapError(TrackingError):
    """Two or more candidate eigenstates overlap the target comparably."""

    def __init__(self, msg, indices=()):
        super().__init__(msg)
        self.indices = tuple(indices)


class EdgeStateAbsentError(NhprobeError, RuntimeError):
    """No eigenstate close enough to the targeted edge-state energy."""


class PoleError(NhprobeError, ZeroDivisionError):
    """Closed-form expression evaluated at one of its poles."""


class DegenerateModelError(NhprobeError, ValueError):
    """Closed-form solution degenerates for these parameter values."""


class NotApplicableError(NhprobeError, ValueError):
    """Operation is undefined for the given model family."""


class ContractViolation(NhprobeError, ValueError):
    """Caller broke a documented precondition."""


class ConfigError(NhprobeError, ValueError):
    """Run-configuration document failed validation."""
