"""Exception hierarchy shared by every module of the package."""


class SRMError(Exception):
    """Base class for all errors raised by srmlasso."""


class EmptyData(SRMError, ValueError):
    pass


class DimensionMismatch(SRMError, ValueError):
    pass


class ConstantColumn(SRMError, ValueError):
    def __init__(self, column):
        self.column = column
        label = "y" if column is None else f"x{column + 1}"
        super().__init__(f"column {label} has zero variance")


class AlreadyStandardized(SRMError, ValueError):
    pass


class DegenerateSplit(SRMError, ValueError):
    pass


class BadK(SRMError, ValueError):
    pass


class ParseError(SRMError, ValueError):
    def __init__(self, line, column, message):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class RankDeficient(SRMError, ArithmeticError):
    pass


class ZeroTSS(SRMError, ArithmeticError):
    pass


class NonPositiveRatio(SRMError, ValueError):
    pass


class EpsilonTooLarge(SRMError, ArithmeticError):
    pass


class ZeroMeanLoss(SRMError, ArithmeticError):
    pass


class TooLargeS(SRMError, ValueError):
    pass


class ZeroRestrictedEigenvalue(SRMError, ArithmeticError):
    pass


class RegimeMismatch(SRMError, ValueError):
    pass
