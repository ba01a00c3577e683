"""Exception hierarchy."""


class RRKrylovError(Exception):
    """Base class for all library errors."""


class StructuralError(RRKrylovError, ValueError):
    """Dimension mismatch or out-of-range index."""


class ParseError(RRKrylovError, ValueError):
    def __init__(self, message, lineno=None, path=None):
        self.lineno = lineno
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)


class DegenerateInputError(RRKrylovError, ValueError):
    """Input for which the requested quantity is undefined (e.g. an all-zero matrix)."""


class ContractError(RRKrylovError, ValueError):
    """A documented precondition of an operation was violated."""


class PreconditionerError(RRKrylovError, ValueError):
    """The matrix does not satisfy a preconditioner's hypotheses."""
