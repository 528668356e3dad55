"""Exception hierarchy shared by every subpackage."""


class FaultBenchError(Exception):
    """Base class for all harness errors."""


class DimensionError(FaultBenchError, ValueError):
    """Tensor or signal extents do not fit an operation."""

    def __init__(self, message, *shapes):
        if shapes:
            message = f"{message} (shapes: {', '.join(str(tuple(s)) for s in shapes)})"
        super().__init__(message)
        self.shapes = tuple(tuple(s) for s in shapes)


class ConfigurationError(FaultBenchError, ValueError):
    """An option or hyperparameter is outside its valid range."""


class DataError(FaultBenchError, ValueError):
    """Labels or sample values are invalid."""


class UsageError(FaultBenchError, RuntimeError):
    """An API was called in a state where it cannot work."""


class NonFiniteError(FaultBenchError, FloatingPointError):
    """A forward computation produced NaN or Inf."""


class EmptyDatasetError(FaultBenchError, ValueError):
    """A record or split yields no samples."""


class UnsupportedFormatError(FaultBenchError):
    """A data file is not in a format the loaders understand."""


class CorruptFileError(FaultBenchError):
    """A data file is truncated or internally inconsistent."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} at byte offset {offset}"
        super().__init__(message)
        self.offset = offset


class ManifestError(FaultBenchError):
    """Files listed in a dataset manifest are missing or malformed."""

    def __init__(self, message, missing=()):
        super().__init__(message)
        self.missing = list(missing)


class RegistryError(FaultBenchError, KeyError):
    """Unknown dataset identifier or class label."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class PresetError(FaultBenchError):
    """An experiment preset cannot be built from the available data."""


class EmptyReportError(FaultBenchError):
    """A run report has no successful repeat to summarize."""
