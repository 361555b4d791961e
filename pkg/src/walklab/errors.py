"""Exception types shared across the package.

ConfigError maps to CLI exit code 2, BudgetError to exit code 3.
"""


class WalklabError(Exception):
    pass


class ConfigError(WalklabError):
    """Invalid configuration, preset parameters, or violated preconditions."""


class BudgetError(WalklabError):
    """A resource budget (window size, horizon, evaluation count) was exceeded."""
