"""Typed set theory workbench: stratification, finite models, ambiguity
machinery, web fragments, and a permutation laboratory, all at desk scale."""

__version__ = "0.1.0"

from .errors import (
    BudgetExceededError,
    CaptureError,
    ExtensionError,
    FormulaSyntaxError,
    MissingIndexError,
    MissingTypesError,
    NoHomogeneousSetError,
    NotABijectionError,
    NotIncreasingError,
    NotLocallySmallError,
    NotStrongError,
    SearchBudgetExceededError,
    SizeConstraintViolatedError,
    SizeMismatchError,
    StratlabError,
    TypeOutOfRangeError,
    UnbalancedLitterError,
)
from .formulas import (
    And,
    Equal,
    Exists,
    Forall,
    Iff,
    Implies,
    Member,
    Mode,
    Not,
    Or,
    Sentence,
    Var,
    ambiguity_instance,
    comprehension_instance,
    normalize,
    pretty,
    raise_types,
    translate,
)
from .parser import parse, parse_corpus
from .stratify import NotStratified, Stratification, check_typed, infer, is_stratified
