"""Exception hierarchy shared by the library and the CLI."""


class USCSimError(Exception):
    """Base class for all simulator errors."""


class InvalidSpaceError(USCSimError, ValueError):
    """Operator or state lives on the wrong Hilbert space."""


class InvalidParametersError(USCSimError, ValueError):
    """Physical parameters violate a precondition."""


class InvalidMappingError(USCSimError, ValueError):
    """A model mapping (e.g. the Dirac limit) was requested outside its domain."""


class InvalidGeneratorError(USCSimError, ValueError):
    """A frame generator is not Hermitian."""


class IntegrationError(USCSimError, RuntimeError):
    """Time stepping lost accuracy (norm drift) or produced non-finite values."""


class ConvergenceError(USCSimError, RuntimeError):
    """A convergence ladder did not settle."""


class PostselectionError(USCSimError, ValueError):
    """Requested measurement outcome has (numerically) zero probability."""


class ConfigError(USCSimError, ValueError):
    """Invalid run configuration; the message names the offending key path."""
