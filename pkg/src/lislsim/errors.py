"""Exception hierarchy shared by all lislsim modules."""


class LislError(Exception):
    """Base class for lislsim errors."""


class ConfigurationError(LislError, ValueError):
    """An invalid configuration value.

    ``field`` names the offending configuration field so that front ends can
    report it directly.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class DomainError(LislError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class IdParseError(LislError, ValueError):
    """Malformed or out-of-range satellite identifier."""


class UsageError(LislError, ValueError):
    """Inconsistent call, e.g. positions sampled at different times."""
