"""Exception hierarchy shared by every stage of the pipeline."""


class SubqError(Exception):
    """Base class; ``exit_code`` is what the command line returns."""

    exit_code = 1


class ValidationError(SubqError, ValueError):
    exit_code = 2


class FormatError(ValidationError):
    """Malformed input file (FCIDUMP header, CIM1 payload, counts file)."""


class ResourceError(SubqError):
    """A size limit (qubits, oracle dimension) was exceeded."""

    exit_code = 3


class ConvergenceError(SubqError):
    """An iterative eigensolver stopped before reaching its tolerance."""

    exit_code = 4

    def __init__(self, message, best_residual=float("nan")):
        super().__init__(message)
        self.best_residual = best_residual
