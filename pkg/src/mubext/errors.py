"""Exception hierarchy shared by all modules."""


class MubError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgument(MubError, ValueError):
    pass


class OutOfRange(InvalidArgument):
    pass


class Unsupported(MubError, ValueError):
    pass


class InvalidMatrix(MubError, ValueError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ParseError(MubError, ValueError):
    def __init__(self, message, line=None, field=None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field is not None:
            loc.append(f"field {field}")
        super().__init__(f"{message} ({', '.join(loc)})" if loc else message)
        self.line = line
        self.field = field


class NotFound(MubError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class IncompatiblePair(MubError, ValueError):
    pass


class NumericalFailure(MubError, RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
