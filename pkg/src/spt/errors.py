"""Exception types shared across the package."""


class DomainError(ValueError):
    """A physical parameter lies outside its allowed range."""


class ConfigurationError(ValueError):
    """An option combination or geometry is internally inconsistent."""


class ContractViolationError(ValueError):
    """An input violates a documented precondition or invariant."""


class PoleEvaluationError(ArithmeticError):
    """A response function was evaluated exactly at one of its poles."""


class ContourError(RuntimeError):
    """A contour integration repeatedly failed (zero pinned on the path)."""
