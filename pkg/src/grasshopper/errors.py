"""Exception types shared across the package."""


class GrasshopperError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(GrasshopperError):
    """Invalid configuration (bad depth, empty run list, ...)."""


class DomainError(GrasshopperError):
    """Argument outside its mathematical domain (theta, NaN, ...)."""


class ShapeError(GrasshopperError):
    """Mismatched sizes between grid, index and colouring objects."""


class PreconditionError(GrasshopperError):
    """An operation's precondition does not hold for these inputs."""


class FileFormatError(GrasshopperError):
    """A grid/colouring/results file is malformed or inconsistent."""
