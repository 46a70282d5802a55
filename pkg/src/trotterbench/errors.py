"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a structural invariant (bad index, duplicate term, ...)."""


class ParseError(ValidationError):
    """Malformed integral file. Carries the 1-based line number."""

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class ResourceCapError(RuntimeError):
    """A dense operation would exceed the configured size cap."""


class BranchCutError(RuntimeError):
    """Eigenphase too close to the logarithm branch cut for safe energy readout."""


class DegenerateFitError(ValueError):
    """Not enough distinct points for a power-law fit."""
