"""Exception hierarchy.

Every error raised by the toolkit derives from :class:`QuchaterError`. The
two intermediate classes decide the CLI exit code: data problems exit with
2, numeric failures with 3.
"""


class QuchaterError(Exception):
    """Base class for all toolkit errors."""


class DataError(QuchaterError):
    """Bad or inconsistent input data."""


class NumericError(QuchaterError):
    """A computation produced an unusable numeric result."""


class ConfigError(QuchaterError):
    """Invalid configuration value or override."""


# data ingest
class MalformedHeader(DataError):
    pass


class RaggedSeries(DataError):
    pass


class UnknownLabel(DataError):
    pass


class EmptySplit(DataError):
    pass


# preprocessing
class AllMissing(DataError):
    pass


class TooManyLevels(DataError):
    pass


class WindowTooLarge(DataError):
    pass


class TooFewMinoritySamples(DataError):
    pass


# chaos
class OutOfDomain(NumericError):
    pass


class DimensionTooSmall(ConfigError):
    pass


# quantum simulator
class IndexOutOfRange(QuchaterError):
    pass


class ControlEqualsTarget(QuchaterError):
    pass


class LengthMismatch(QuchaterError):
    pass


# neural kernels / models
class ShapeMismatch(QuchaterError):
    pass


class NonFiniteLoss(NumericError):
    def __init__(self, epoch: int, message: str = ""):
        self.epoch = epoch
        super().__init__(message or f"non-finite training loss at epoch {epoch}")


# bayesian optimisation
class SingularKernel(NumericError):
    pass


class SingleClassTestSet(DataError):
    pass
