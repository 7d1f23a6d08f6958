"""Exception hierarchy shared by every limeqo module."""


class LimeQOError(Exception):
    """Base class for all limeqo errors."""


class RowUnbootstrapped(LimeQOError):
    def __init__(self, row):
        self.row = row
        super().__init__(f"row {row} has no complete entry")


class AlreadyComplete(LimeQOError):
    def __init__(self, row, col):
        self.row, self.col = row, col
        super().__init__(f"entry ({row}, {col}) is already complete")


class NonPositiveTimeout(LimeQOError, ValueError):
    pass


class NonIncreasingTimeout(LimeQOError, ValueError):
    """Re-observing a censored entry needs a strictly larger timeout."""


class DegenerateConfig(LimeQOError, ValueError):
    pass


class SingularSystem(LimeQOError):
    pass


class NothingToExplore(LimeQOError):
    pass


class ZeroPrediction(LimeQOError):
    pass


class EmptySpectrum(LimeQOError, ValueError):
    pass


class ParseError(LimeQOError, ValueError):
    def __init__(self, line, column, reason):
        self.line, self.column, self.reason = line, column, reason
        super().__init__(f"line {line}, column {column}: {reason}")


class ShapeError(LimeQOError, ValueError):
    def __init__(self, line, reason):
        self.line = line
        super().__init__(f"line {line}: {reason}")
