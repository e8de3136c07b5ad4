"""Exception hierarchy for latkit.

All framework errors derive from LatkitError so callers can catch the
whole family in one clause; the CLI maps them to exit code 2.
"""


class LatkitError(Exception):
    """Base class for all latkit errors."""


class ConfigError(LatkitError):
    """Invalid framework configuration (e.g. zero VVL, empty sweep list)."""


class BoundsError(LatkitError):
    """Component or site index outside its valid range."""


class ShapeError(LatkitError):
    """Mismatched descriptors, lengths, or lattice shapes."""


class AllocationError(LatkitError):
    """Target arena cannot satisfy an allocation request."""


class LifecycleError(LatkitError):
    """Use of a freed buffer, double free, or free during a launch."""


class PlanError(LatkitError):
    """Launch plan inconsistent with the bound buffers (VVL, extent)."""


class DeviceError(LatkitError):
    """Buffer used on a device other than the one that owns it."""


class ConcurrencyError(LatkitError):
    """Host-side operation overlapping an in-flight launch."""


class TypeConflictError(LatkitError):
    """Constant-store key rebound to a different kind."""


class ContractViolationError(LatkitError):
    """Kernel wrote outside its chunk (detected by the debug device)."""


class SingularStateError(LatkitError):
    """Non-positive density encountered where moments require rho > 0."""
