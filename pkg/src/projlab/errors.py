"""Exception types shared across projlab."""


class ProjlabError(Exception):
    """Base class for all projlab errors."""


class InputError(ProjlabError, ValueError):
    """Malformed input: wrong shapes, out-of-range parameters, bad JSON."""


class PreconditionError(ProjlabError, ValueError):
    """An operation was called on an operator outside its domain (e.g. ||T|| > 1)."""


class ConstructionError(ProjlabError, ValueError):
    """A projection could not be built from the supplied bases."""


class StructuralError(ProjlabError, ArithmeticError):
    """The operator lacks a structure the computation relies on (e.g. a defective eigenvalue 1)."""


class DomainError(ProjlabError, ValueError):
    """A closed-form bound was evaluated outside the set where it is finite."""


class NumericalError(ProjlabError, ArithmeticError):
    """An iterative solver hit its iteration cap.

    ``partial`` holds whatever was computed before giving up.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
