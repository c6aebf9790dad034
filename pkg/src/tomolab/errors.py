"""Exception types shared across the package."""


class DomainError(ValueError):
    """Argument outside the domain an operation is defined on."""


class ContractViolation(ValueError):
    """Input violates a documented precondition of an operation."""


class SingularRayError(DomainError):
    """Symplectic tomogram requested on the singular ray mu = nu = 0."""


class GridMismatchError(ValueError):
    """Two fields that must share a grid do not."""


class InstabilityError(RuntimeError):
    """Time integration produced non-finite values or violated its step bound."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step
