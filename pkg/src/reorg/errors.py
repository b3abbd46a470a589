"""Exception hierarchy shared across the package."""


class ReorgError(Exception):
    """Base class for all errors raised by reorg."""


class ParseError(ReorgError):
    """A document could not be read as structured text."""


class ValidationError(ReorgError, ValueError):
    """A document parsed but violates a model or mission invariant.

    ``path`` locates the offending entity inside the document, e.g.
    ``functionalities.MoveTo.requires``.
    """

    def __init__(self, message, path=None):
        self.path = path
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class UnknownConcept(ReorgError, LookupError):
    pass


class UnknownProperty(ReorgError, LookupError):
    pass


class UnresolvableProperty(UnknownProperty):
    pass


class UnknownFunctionality(UnknownConcept):
    pass


class DivisionByZero(ReorgError, ZeroDivisionError):
    pass


class DomainError(ReorgError, ValueError):
    pass


class MissingAssignment(ReorgError, LookupError):
    pass


class UnknownAtom(ReorgError, LookupError):
    pass


class PoolMismatch(ReorgError, ValueError):
    pass


class BudgetExceeded(ReorgError):
    pass


class NoCandidate(ReorgError):
    pass


class NoSolution(ReorgError):
    pass
