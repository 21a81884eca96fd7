"""Exception hierarchy.

Three broad families map onto CLI exit codes: ConfigError -> 1,
DataError -> 2, anything else -> 3.
"""


class CropKnnError(Exception):
    pass


class ConfigError(CropKnnError):
    """Bad user-supplied configuration or parameters."""


class DataError(CropKnnError):
    """Input data violates a documented contract."""


# bundle I/O
class MissingManifest(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class UnlabeledField(DataError):
    pass


class BadDate(DataError):
    pass


class CorruptGrid(DataError):
    pass


class InvalidBundle(DataError):
    pass


class IoFailure(CropKnnError):
    pass


# preprocessing
class UnknownField(DataError):
    pass


class AllMissing(DataError):
    pass


class TooFewPoints(DataError):
    pass


# indices / features
class DegenerateDenominator(DataError):
    pass


class MissingBand(DataError):
    pass


class EmptyClass(DataError):
    pass


# knn
class ZeroVector(DataError):
    pass


class EmptyModel(DataError):
    pass


# experiments
class ClassTooSmall(DataError):
    pass
