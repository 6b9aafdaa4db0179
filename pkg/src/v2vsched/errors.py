"""Exception types shared across the package."""


class GeometryError(ValueError):
    """Raised for physically impossible geometry (non-positive distances, unsorted convoys)."""


class ValidationError(ValueError):
    """Raised when an input violates a documented contract (bad bounds, malformed model)."""


class ContractViolation(ValueError):
    """Raised when paired inputs are mutually inconsistent (e.g. power without schedule)."""
