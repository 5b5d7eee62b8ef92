"""Exception hierarchy shared by every module."""


class EPError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(EPError, ValueError):
    pass


class ValidationError(EPError, ValueError):
    pass


class IoError(EPError, OSError):
    pass


class FormatError(ParseError):
    """Binary file with bad magic, truncated or oversized payload."""


class DimensionMismatch(EPError, ValueError):
    pass


class LengthMismatch(EPError, ValueError):
    pass


class IndexOutOfRange(EPError, IndexError):
    pass


class DegenerateSet(EPError, ValueError):
    pass


class InvalidN(EPError, ValueError):
    pass


class InvalidParams(EPError, ValueError):
    pass


class MissingClass(EPError, ValueError):
    pass


class NonFiniteInput(EPError, ValueError):
    pass


class InsufficientClassSamples(EPError, ValueError):
    pass


class InsufficientEvaluation(EPError, ValueError):
    pass


class InvalidK(EPError, ValueError):
    pass


class LabelsRequired(EPError, ValueError):
    pass


# clustering raises this name; same condition as LabelsRequired
LabelsRequiredForPurity = LabelsRequired


class InvalidKMax(EPError, ValueError):
    pass


class InvalidConfig(EPError, ValueError):
    pass


class InvalidSpec(EPError, ValueError):
    pass
