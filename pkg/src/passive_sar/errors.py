"""Exception types shared across the package."""


class ConfigError(Exception):
    """Invalid run configuration, or an operation refused on configuration grounds."""


class NumericalError(Exception):
    """A numerical procedure failed to converge or produced non-finite values."""


class CmpxError(Exception):
    """Malformed or incompatible CMPX matrix file."""
