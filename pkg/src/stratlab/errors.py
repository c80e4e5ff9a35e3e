"""Exception types shared across the package."""


class StratlabError(Exception):
    """Base class for all package-specific errors."""


class FormulaSyntaxError(StratlabError):
    """Raised on malformed input text.  Carries the byte offset of the problem."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte {offset})")
        self.message = message
        self.offset = offset


class MissingTypesError(StratlabError):
    """An operation needed declared types on every variable and some were absent."""


class TypeOutOfRangeError(StratlabError):
    """A declared type fell outside the range an operation can interpret."""


class NotIncreasingError(StratlabError):
    """A type sequence that must be strictly increasing was not."""


class CaptureError(StratlabError):
    """Building a formula would capture or clash with an existing variable."""


class BudgetExceededError(StratlabError):
    """A model level or search space exceeded the configured budget."""


class SizeConstraintViolatedError(StratlabError):
    """Level sizes do not satisfy the power-set lower bound requirements."""


class SizeMismatchError(StratlabError):
    """Two models that must agree on base size and depth do not."""


class NoHomogeneousSetError(StratlabError):
    """No monochromatic index set of the requested size exists.

    The coloring that was searched is attached for diagnosis.
    """

    def __init__(self, message, coloring=None):
        super().__init__(message)
        self.coloring = coloring


class MissingIndexError(StratlabError):
    """A value table lacks an entry that an operation needed."""


class NotABijectionError(StratlabError):
    """A map required to be a bijection is not one."""


class NotLocallySmallError(StratlabError):
    """A partial map meets some litter in too many atoms."""


class UnbalancedLitterError(StratlabError):
    """A litter and its target disagree on how many atoms remain to be filled."""


class ExtensionError(StratlabError):
    """No allowable completion of the given partial map exists.

    At finite scale a locally small map can force an image set too far from
    every litter; the infinite argument has no analog of this obstruction.
    """


class SearchBudgetExceededError(StratlabError):
    """A bounded search ended without either a witness or a certificate."""


class NotStrongError(StratlabError):
    """A support sequence violates the strong ordering conditions."""
