"""Exception hierarchy for ipsforge.

Every package-specific failure derives from IpsforgeError so callers can
catch broadly; budget overruns share the BudgetExceeded root so the CLI can
map them onto a dedicated exit code.
"""


class IpsforgeError(Exception):
    """Base class for all ipsforge errors."""


class NonPrimeModulus(IpsforgeError):
    """Field modulus is composite (or < 2)."""


class IndexOutOfField(IpsforgeError):
    """A field-point index lies outside [0, q)."""


class FieldMismatch(IpsforgeError):
    """Two operands belong to different fields."""


class MissingAssignment(IpsforgeError):
    """Circuit evaluation received no value for some input variable."""


class BudgetExceeded(IpsforgeError):
    """A configured resource budget was exceeded."""


class ExpansionBudgetExceeded(BudgetExceeded):
    """Sparse-polynomial expansion would exceed the term budget."""


class DepthBudgetExceeded(BudgetExceeded):
    """Circuit depth exceeds the configured normalization bound."""


class DegreeBudgetExceeded(BudgetExceeded):
    """Requested extraction monomial degree exceeds the budget."""


class NotNormalForm(IpsforgeError):
    """Circuit violates the required alternating-form clauses."""


class FieldTooLargeForUnary(IpsforgeError):
    """One-hot encodings require a small modulus (q <= 13)."""


class WidthMismatch(IpsforgeError):
    """Bit-vector operands have incompatible widths."""


class DoesNotFit(IpsforgeError):
    """Circuit does not embed into the universal layout."""


class DimensionError(IpsforgeError):
    """Matrix/tensor dimensions violate a generator precondition."""


class ArityMismatch(IpsforgeError):
    """Certificate placeholder arity disagrees with the axiom list."""


class IncompleteCaseCover(IpsforgeError):
    """Case-merge input does not cover every 0/1 assignment prefix."""


class BadJustification(IpsforgeError):
    """A proof line does not follow from its stated justification."""


class Unsupported(IpsforgeError):
    """Requested variant is outside this artifact's scope."""


class FormatError(IpsforgeError):
    """A text artifact (circuit, DIMACS, certificate, proof) failed to parse."""
