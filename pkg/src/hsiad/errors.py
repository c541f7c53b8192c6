"""Exception hierarchy shared across the package.

Plain ``ValueError`` is used for ordinary precondition violations; the
classes here exist so the CLI can map failures onto distinct exit codes.
"""


class HsiadError(Exception):
    """Base class for package-specific failures."""


class RasterFormatError(HsiadError):
    """Raster file exists but its header or payload is malformed."""


class ConfigError(HsiadError):
    """Pipeline configuration is structurally or semantically invalid."""


class NumericError(HsiadError):
    """A numeric routine failed (singular system, factorization failure)."""
