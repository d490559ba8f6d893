"""Exception hierarchy for the eikonal-canon library."""


class EikonalError(Exception):
    """Base class for all library errors."""


class InvalidGraphError(EikonalError):
    """A metric graph violates an admissibility invariant."""


class GraphFormatError(EikonalError):
    """A graph text file failed to parse."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class EventCapExceeded(EikonalError):
    """Impulse propagation produced more events than the configured cap."""


class ClosureCapExceeded(EikonalError):
    """A lattice closure did not stabilize within the configured point cap."""


class PartitionDefect(EikonalError):
    """The computed partition violates a structural invariant."""


class FrameError(EikonalError):
    """An amplitude-vector frame could not be built as requested."""


class InvariantViolation(EikonalError):
    """A structural property that the theory guarantees failed numerically."""


class StructuralFault(EikonalError):
    """Boundary-value pairing violated the uniqueness trichotomy."""


class SeamMismatch(EikonalError):
    """A junction was attempted across ends whose time values disagree."""


class MissingSampleError(EikonalError):
    """A sampled function lacks values on a required determination set."""
