"""Exception types raised across the toolkit."""


class LulcError(Exception):
    """Base class for all toolkit errors."""


class IngestError(LulcError):
    """A dataset on disk could not be loaded."""


class FormatError(LulcError):
    """A binary or text artifact is malformed."""


class DimensionError(LulcError, ValueError):
    """Array shapes or feature dimensions disagree."""


class ConfigError(LulcError, ValueError):
    """Invalid configuration key or value."""


class TrainingDivergedError(LulcError):
    """Training produced a non-finite loss."""
