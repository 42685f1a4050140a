"""Exception hierarchy shared by every module."""


class DualizationError(Exception):
    """Base class for all errors raised by posetdual."""


class CycleError(DualizationError, ValueError):
    pass


class NotAnIdeal(DualizationError, ValueError):
    pass


class NotAFilter(DualizationError, ValueError):
    pass


class IntersectionViolation(DualizationError, ValueError):
    """An (ideal, filter) pair of the input families is disjoint."""


class ScaleRefusal(DualizationError, RuntimeError):
    """A brute-force routine was asked to scan more objects than its cap."""


class DomainError(DualizationError, ValueError):
    pass


class PreconditionError(DualizationError, ValueError):
    pass


class NotALattice(DualizationError, ValueError):
    pass


class NotDistributive(DualizationError, ValueError):
    pass


class RepresentationError(DualizationError, RuntimeError):
    pass


class AntichainViolation(DualizationError, ValueError):
    pass


class DominationViolation(DualizationError, ValueError):
    pass


class DimensionError(DualizationError, ValueError):
    """Implication base with a premise of size two or more."""


class BudgetViolation(DualizationError, RuntimeError):
    """More dual-side discards than the dual-boundedness bound allows.

    This can only happen through an implementation bug; it is never
    absorbed silently.
    """


class ParseError(DualizationError, ValueError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
