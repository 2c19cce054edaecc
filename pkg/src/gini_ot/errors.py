"""Exception hierarchy.

Every error carries a short machine-readable ``code`` used by the CLI when
reporting failures on a single line.
"""


class OTError(Exception):
    code = "ot_error"


class InputError(OTError, ValueError):
    """Bad user input: malformed measures, costs, files."""

    code = "input_error"


class EmptyInput(InputError):
    code = "empty_input"


class NegativeWeight(InputError):
    code = "negative_weight"


class ZeroTotalMass(InputError):
    code = "zero_total_mass"


class ShapeMismatch(InputError):
    code = "shape_mismatch"


class NonPositiveLambda(InputError):
    code = "non_positive_lambda"


class NonPositiveExponent(InputError):
    code = "non_positive_exponent"


class InvalidCoordinate(InputError):
    code = "invalid_coordinate"


class NonPositiveInput(InputError):
    code = "non_positive_input"


class TooLarge(InputError):
    code = "too_large"


class ParseError(InputError):
    code = "parse_error"


class MissingColumn(InputError):
    code = "missing_column"


class DuplicateLocale(InputError):
    code = "duplicate_locale"


class NonPositiveTotal(InputError):
    code = "non_positive_total"


class SolverError(OTError, RuntimeError):
    code = "solver_error"


class Infeasible(SolverError):
    """Raised only on internal inconsistency; normalized measures are always feasible."""

    code = "infeasible"


class ZeroInitEntry(SolverError):
    code = "zero_init_entry"


class NotConverged(SolverError):
    code = "not_converged"


class NumericalBreakdown(SolverError):
    code = "numerical_breakdown"
