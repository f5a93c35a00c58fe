"""Exception types shared across the package."""


class HullcacheError(Exception):
    """Base class for all package-specific errors."""


class DegenerateGeometryError(HullcacheError):
    """Input points are coincident, collinear, or coplanar; no 3D hull exists."""


class CapacityExceededError(HullcacheError):
    """A hull exceeds the 16-bit index budget (65,535 vertices or faces)."""


class FormatError(HullcacheError):
    """A mesh file is malformed or in an unsupported format."""
