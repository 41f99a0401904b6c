"""Exception hierarchy.

Every error carries a short machine-parseable ``category`` that the CLI
prints as ``error:<category>: <message>`` on a single stderr line.
"""


class SidaugError(Exception):
    category = "internal"


class ParameterError(SidaugError):
    """An argument violates an operation's stated precondition."""

    category = "param"


class MissingFileError(SidaugError):
    category = "io"


class IoError(SidaugError):
    category = "io"


class MalformedImageError(SidaugError):
    """File exists but its header or payload cannot be decoded."""

    category = "format"


class UnsupportedImageError(SidaugError):
    """Decodable file in a format or bit depth we do not handle."""

    category = "format"


class StubOperatorError(SidaugError):
    """A declared-but-not-executable augmentation was enabled."""

    category = "not-implemented"


class UndefinedMetricError(SidaugError):
    """Metric has no defined value on this input (e.g. AP with no positives)."""

    category = "metric"


class ConfigError(SidaugError):
    category = "config"
