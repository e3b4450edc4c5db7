"""Exception types shared across the package."""


class GlabError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(GlabError, ValueError):
    """Invalid model parameter (non-positive rate, bad penalty, ...)."""


class DomainError(GlabError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ShapeError(GlabError, ValueError):
    """Mismatched dimensions or windows between combined objects."""


class SizeError(GlabError, RuntimeError):
    """Instance exceeds an exact-solver size cap; names the cap."""

    def __init__(self, count: int, cap: int, what: str = "candidate atoms"):
        self.count = count
        self.cap = cap
        super().__init__(
            f"{count} {what} exceed exact-size cap {cap}; use the heuristic solver"
        )


class InfeasibleError(GlabError, RuntimeError):
    """Operation undefined on the given input (empty animal, empty process)."""


class ValidationError(GlabError, ValueError):
    """Experiment specification failed validation; carries the field path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
