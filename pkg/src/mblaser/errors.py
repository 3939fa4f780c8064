"""Exception types shared across the package."""


class MBLaserError(Exception):
    """Base class for package errors."""


class ValidationError(MBLaserError):
    """Bad user input: config schema, parameter domain, CLI arguments."""


class NumericsError(MBLaserError):
    """A numerical procedure failed to converge or left its validity domain."""


class ChartBoundaryError(NumericsError):
    """Reduced (Hopf) coordinates hit the |z| = 1/2 chart boundary."""


class CapacityError(MBLaserError):
    """Requested problem size exceeds a hard cap (e.g. dense eigensolve)."""
