"""Exception types raised by the simulator and the evolution engines."""


class VQNHITEError(Exception):
    """Base class for all package errors."""


class ResourceError(VQNHITEError):
    """Requested dense object exceeds the configured qubit limit."""


class SingularSystemError(VQNHITEError):
    """Unregularized linear system is numerically singular."""

    def __init__(self, message: str, smallest_eigenvalue: float):
        super().__init__(message)
        self.smallest_eigenvalue = smallest_eigenvalue


class DegeneracyError(VQNHITEError):
    """A state that must be normalized has (numerically) zero norm."""


class DivergenceError(VQNHITEError):
    """An iterative procedure produced non-finite values."""

    def __init__(self, message: str, iteration: int | None = None, beta: float | None = None):
        super().__init__(message)
        self.iteration = iteration
        self.beta = beta


class ContractError(VQNHITEError):
    """An input violates a documented precondition (e.g. unnormalized state)."""


class NotApplicableError(VQNHITEError):
    """Operation does not apply to the given input (e.g. diagonal Pauli string)."""
