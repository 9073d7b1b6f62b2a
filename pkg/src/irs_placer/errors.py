"""Exception classes shared across the package."""


class ConfigError(Exception):
    """Base class for scenario-configuration failures."""


class ConfigParseError(ConfigError):
    """The config file could not be read or is not well-formed."""


class ConfigValidationError(ConfigError):
    """The config parsed fine but violates an invariant."""


class InfeasibleError(Exception):
    """Requested exhaustive enumeration exceeds the configured cap."""


class NumericalError(Exception):
    """A factorization or certificate check failed where theory says it cannot."""
