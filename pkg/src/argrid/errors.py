"""Exception hierarchy shared across the package.

Library-level contract violations (bad shapes, out-of-range parameters)
raise plain ``ValueError``; the classes here mark operational failures
that the CLI maps to exit codes (data error -> 1, config error -> 2).
"""


class ArgridError(Exception):
    """Base class for operational errors raised by this package."""


class DataError(ArgridError):
    """The inputs exist but their content cannot support the request."""


class ConfigError(ArgridError):
    """The run configuration itself is unusable (paths, flags, formats)."""


class SourceError(DataError):
    """A snapshot source failed permanently after exhausting retries."""
