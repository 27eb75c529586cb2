"""Exception hierarchy shared across the package."""


class SplitkitError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(SplitkitError, ValueError):
    """Malformed input: bad shapes, inconsistent options, invalid arguments."""


class ValidationError(ConfigurationError):
    """A coefficient file or experiment config failed structural validation."""


class ConversionError(ConfigurationError):
    """A coefficient-form conversion is impossible for the given data."""


class ContractViolationError(SplitkitError):
    """A caller-supplied object does not satisfy a declared precondition."""


class PreconditionError(ContractViolationError):
    """An operation was invoked on data that fails its mathematical premise."""


class UnsupportedOperationError(SplitkitError):
    """The requested operation is not available for this object."""


class NumericError(SplitkitError):
    """A numerical procedure failed (non-convergence, singularity, overflow)."""


class SingularityError(NumericError):
    """State hit a singular point of a vector field or flow."""


class DomainError(NumericError):
    """State left the domain on which the problem is defined."""


class BlowUpError(NumericError):
    """A trajectory left the finite range mid-run.

    Carries the index of the offending step and the last finite state so the
    caller can diagnose or restart.
    """

    def __init__(self, step_index, last_state, message=None):
        self.step_index = step_index
        self.last_state = last_state
        super().__init__(
            message or f"non-finite state detected at step {step_index}")


class NonFiniteStateError(ConfigurationError):
    """A state supplied by the caller contains NaN or Inf entries."""


class InconclusiveFitError(NumericError):
    """Too few usable data points survived for a convergence-rate fit."""
