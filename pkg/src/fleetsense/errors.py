"""Exception hierarchy for the fleetsense pipeline.

DataError covers problems with measurement files and their contents;
ConfigError covers invalid run parameters. The CLI maps these to exit
codes 2 and 3 respectively.
"""


class FleetsenseError(Exception):
    pass


class DataError(FleetsenseError):
    pass


class ConfigError(FleetsenseError):
    pass


class MalformedFile(DataError):
    pass


class MissingMetadata(DataError):
    pass


class NonFiniteSample(DataError):
    def __init__(self, file_id, channel, index):
        self.file_id = file_id
        self.channel = channel
        self.index = index
        super().__init__(
            f"non-finite sample in file {file_id!r}, channel {channel!r}, index {index}"
        )


class InsufficientFiles(DataError):
    pass


class InsufficientData(DataError):
    pass


class DegenerateData(DataError):
    pass


class ShapeError(DataError):
    pass


class UndefinedMetric(DataError):
    pass


class UnknownLabel(DataError):
    pass


class InvalidScale(ConfigError):
    pass


class InvalidK(ConfigError):
    pass


class InvalidConfig(ConfigError):
    pass


class BundleMismatch(ConfigError):
    """A model bundle was applied to features with a different layout."""
