"""Exception types raised across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition (shape, unitarity, bijection...)."""


class InvalidSizeError(ValidationError):
    pass


class SymmetryConflictError(ValidationError):
    """Two requests canonicalise to the same multiset but carry different phases."""


class ArityError(ValidationError):
    pass


class CapExceededError(ValidationError):
    """Requested problem is larger than the configured resource cap."""


class SizingError(ValidationError):
    pass


class NotInGraphError(KeyError):
    """Vertex, mode or virtual vertex that does not exist."""

    def __str__(self):
        # KeyError repr-quotes its argument; keep messages readable
        return str(self.args[0]) if self.args else ""
