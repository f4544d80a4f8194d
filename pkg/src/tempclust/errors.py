"""Exception hierarchy shared by every module."""


class TCAError(Exception):
    """Base class for all errors raised by this package."""


class InvalidPeriodError(TCAError, ValueError):
    pass


class EmptyInputError(TCAError, ValueError):
    pass


class EmptySystemError(TCAError):
    """No bin is populated under the density threshold.

    Callers in the evaluation path treat this as "compressor never scheduled".
    """


class InsufficientDataError(TCAError, ValueError):
    pass


class ParseError(TCAError, ValueError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(f"{where}{message}")


class RolloverError(TCAError, OverflowError):
    """The kernel's 8-bit day counter cannot take another day."""


class SingularityError(TCAError, ArithmeticError):
    pass
