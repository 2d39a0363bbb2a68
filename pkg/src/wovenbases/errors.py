"""Exception hierarchy shared by all modules."""


class WovenError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(WovenError, ValueError):
    pass


class SizeError(WovenError, ValueError):
    """Input exceeds an enumeration limit."""


class SymmetryError(WovenError, ValueError):
    pass


class SingularSystemError(WovenError, ArithmeticError):
    def __init__(self, message, verdict=None):
        super().__init__(message)
        self.verdict = verdict


class BasisError(WovenError, ValueError):
    pass


class RecoveryImpossibleError(WovenError, ArithmeticError):
    """A mixed-sample map is not injective; ``witness`` is the offending index set."""

    def __init__(self, message, witness=None, verdict=None):
        super().__init__(message)
        self.witness = witness
        self.verdict = verdict


class GridMismatchError(WovenError, ValueError):
    pass


class DomainError(WovenError, ValueError):
    pass


class FormatError(WovenError, ValueError):
    """Malformed input file; ``line`` and ``column`` locate the problem when known."""

    def __init__(self, message, line=None, column=None):
        loc = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + loc)
        self.line = line
        self.column = column
