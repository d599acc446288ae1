"""Exception hierarchy shared by the symbolic engine and the numeric oracle."""


class ReplicalcError(Exception):
    """Base class for all engine errors."""


class GraphParseError(ReplicalcError, ValueError):
    """Malformed graph, polynomial or wire text.

    ``position`` is the 0-based character offset where parsing failed.
    """

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class CapacityError(ReplicalcError):
    """A combinatorial or numeric budget (vertex cap, quadrature size) was exceeded."""


class DomainError(ReplicalcError, ValueError):
    """An operation was applied outside its domain (e.g. legs where none are allowed)."""


class ParityError(DomainError):
    """Wick contraction requested on a term with an odd number of legs."""
