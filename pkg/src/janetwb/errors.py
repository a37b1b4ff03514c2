"""Exception hierarchy. Every error carries a machine-readable ``code``."""


class WorkbenchError(Exception):
    code = "error"
    exit_status = 2

    def __init__(self, message="", partial=None):
        super().__init__(message)
        self.partial = partial


class DivisionByZero(WorkbenchError, ZeroDivisionError):
    code = "division_by_zero"


class IndexOutOfRange(WorkbenchError, IndexError):
    code = "index_out_of_range"


class DimensionMismatch(WorkbenchError, ValueError):
    code = "dimension_mismatch"


class OrderTooLow(WorkbenchError, ValueError):
    code = "order_too_low"


class OrderBoundExceeded(WorkbenchError):
    code = "order_bound_exceeded"


class DeltaRegularityNotFound(WorkbenchError):
    code = "delta_regularity_not_found"


class NotInvolutive(WorkbenchError):
    code = "not_involutive"


class ReductionOrderExceeded(WorkbenchError):
    code = "reduction_order_exceeded"


class NotFirstOrder(WorkbenchError):
    code = "not_first_order"


class HasZeroOrderEquations(WorkbenchError):
    code = "has_zero_order_equations"


class WrongCodimension(WorkbenchError):
    code = "wrong_codimension"


class NotPure(WorkbenchError):
    code = "not_pure"


class NotTorsionCase(WorkbenchError):
    code = "not_torsion_case"


class EmbeddingNotCertified(WorkbenchError):
    code = "embedding_not_certified"


class NotMonomial(WorkbenchError, ValueError):
    code = "not_monomial"


class DSLSyntaxError(WorkbenchError):
    """Parse failure with 1-based line and column."""

    code = "syntax_error"
    exit_status = 1

    def __init__(self, message, line=0, col=0):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class SemanticError(WorkbenchError):
    code = "semantic_error"
    exit_status = 1
