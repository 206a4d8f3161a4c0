"""Package-wide exception types.

ConfigError maps to CLI exit code 2, ContractViolation to exit code 3.
"""


class WindgridError(Exception):
    """Base class for all windgrid errors."""


class ConfigError(WindgridError):
    """Invalid configuration value or unparseable input file."""


class ContractViolation(WindgridError):
    """An API was called outside its documented preconditions."""
