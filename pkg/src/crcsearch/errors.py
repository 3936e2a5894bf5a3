"""Exception hierarchy shared by every module of the package."""


class CrcError(Exception):
    """Base class for all errors raised by crcsearch."""


class ParseError(CrcError, ValueError):
    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class ConfigurationError(CrcError, ValueError):
    """Inconsistent parameters or mismatched artifacts (index vs network)."""


class ParameterError(CrcError, ValueError):
    """Invalid query parameters."""


class InvariantViolation(CrcError, RuntimeError):
    pass


class UndefinedContextError(CrcError, ValueError):
    """Reliability normalizers are undefined (no k-core in the window)."""


class IndexFormatError(CrcError, ValueError):
    pass


class VersionMismatchError(IndexFormatError):
    pass


class ChecksumError(IndexFormatError):
    pass


class DanglingReferenceError(CrcError, KeyError):
    pass


class DeltaError(CrcError, ValueError):
    def __init__(self, message: str, entry: int | None = None):
        self.entry = entry
        if entry is not None:
            message = f"update #{entry}: {message}"
        super().__init__(message)


class OracleRefusal(CrcError, ValueError):
    """Instance too large for exhaustive checking."""


class DensityUndefinedError(CrcError, ValueError):
    pass
