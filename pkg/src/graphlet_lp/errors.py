"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes, so every error raised on bad input
derives from :class:`DataError` and every failed cross-check from
:class:`ValidationError`.
"""


class DataError(ValueError):
    """Input data is malformed or unusable."""


class ParseError(DataError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class EmptyGraphError(DataError):
    pass


class ProtocolError(DataError):
    """The split / sampling protocol cannot be satisfied for this graph."""


class TrainingError(DataError):
    pass


class AnalysisError(DataError):
    pass


class ValidationError(AssertionError):
    """A verification step (oracle, identity, audit) found a mismatch."""


class ConfigurationError(DataError):
    """A parameter combination the operation cannot honour."""
