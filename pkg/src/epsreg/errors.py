"""Exception hierarchy shared by all epsreg modules."""


class EpsregError(Exception):
    """Base class for all errors raised by this package."""


class InputError(EpsregError, ValueError):
    """Invalid argument: bad dimensions, out-of-domain points, malformed
    configuration, or values outside a supported range."""


class NumericError(EpsregError, RuntimeError):
    """A numerical procedure failed to reach its accuracy contract."""
