"""Exception types raised across the package."""


class LstreeError(Exception):
    """Base class for all package-specific errors."""


class IngestError(LstreeError):
    """Raised when a CSV file violates the dataset schema.

    Carries the offending row/column when the problem is cell-level
    (``row`` is the 1-based data row, not counting the header).
    """

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class SchemaError(LstreeError):
    """New data does not match the variable specs a model was trained with."""


class NumericalError(LstreeError):
    """A probability underflowed to zero; parameters are degenerate."""


class ConvergenceError(LstreeError):
    """The optimizer exhausted its iteration budget without converging."""


class DimensionError(LstreeError):
    """The brute-force oracle fitter was asked for too many free parameters."""


class NoCandidatesError(LstreeError):
    """No admissible split exists; tree growth must stop."""


class FormulaError(LstreeError):
    """A simulation formula failed to parse or evaluate."""
