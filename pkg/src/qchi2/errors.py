"""Exception hierarchy.

Validation failures derive from ``ValueError`` (CLI exit code 2); numerical
failures derive from ``ArithmeticError`` (CLI exit code 3).
"""


class QChi2Error(Exception):
    """Base class for every error raised by the package."""


class ValidationError(QChi2Error, ValueError):
    pass


class NumericalError(QChi2Error, ArithmeticError):
    pass


class NotHermitian(ValidationError):
    pass


class NotPSD(ValidationError):
    pass


class TraceNotOne(ValidationError):
    pass


class DimMismatch(ValidationError):
    pass


class InvalidPovm(ValidationError):
    pass


class ElementNotPSD(InvalidPovm):
    def __init__(self, index, min_eigenvalue):
        self.index = index
        self.min_eigenvalue = min_eigenvalue
        super().__init__(
            f"POVM element {index} is not PSD (min eigenvalue {min_eigenvalue:.3e})"
        )


class CompletenessViolated(InvalidPovm):
    def __init__(self, deviation):
        self.deviation = deviation
        super().__init__(
            f"POVM elements do not sum to identity (max deviation {deviation:.3e})"
        )


class SupportViolation(ValidationError):
    pass


class CountMismatch(ValidationError):
    pass


class DomainEdge(ValidationError):
    pass


class SingularSigma(ValidationError):
    pass


class ConvergenceFailure(NumericalError):
    pass


class CompletenessUnreachable(NumericalError):
    pass


class SingularTotal(NumericalError):
    pass
