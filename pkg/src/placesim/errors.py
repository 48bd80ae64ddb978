"""Exception and warning types shared across the package."""


class PlacesimError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(PlacesimError):
    """A config file or config object is malformed or inconsistent."""


class DomainError(PlacesimError, ValueError):
    """A numeric argument is outside the domain of the requested operation."""


class UnstableQueueError(DomainError):
    """Offered load meets or exceeds service capacity where stability is required."""


class HorizonError(PlacesimError):
    """A simulation ran past its time horizon without terminating."""


class UnstableQueueWarning(UserWarning):
    """Cloud-side queue is saturated; the comparison verdict defaults to the device."""
