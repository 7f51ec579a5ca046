"""Exception types shared across the package."""


class TnBundleError(Exception):
    """Base class for all package errors."""


class ParseError(TnBundleError):
    """Raised on malformed expression source; carries the 0-based offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (offset {position})")
        self.position = position


class EvalDomainError(TnBundleError):
    """Raised when evaluation leaves a function's domain; names the node."""

    def __init__(self, message: str, node_source: str):
        super().__init__(f"{message} in '{node_source}'")
        self.node_source = node_source


class ChartDomainError(TnBundleError):
    """Raised when a point lies outside a chart's coordinate box."""


class DegenerateMetricError(TnBundleError):
    """Raised when a metric (base, bundle, or pullback) is numerically singular.

    Carries the offending determinant and, when known, the sample location so
    batch scans can report it without aborting.
    """

    def __init__(self, message: str, determinant: float, location=None):
        loc = "" if location is None else f" at {location}"
        super().__init__(f"{message}{loc} (det={determinant:.3e})")
        self.determinant = determinant
        self.location = location


class InvalidProfileError(TnBundleError):
    """Raised when a field-intensity profile is invalid on its interval."""
