"""Shared exception types.

ConfigError signals a bad knob (budget, strata count, delta, CLI flags) and
maps to exit code 2; DataError signals malformed or inconsistent input data
and maps to exit code 3.
"""


class ConfigError(ValueError):
    pass


class DataError(ValueError):
    pass
