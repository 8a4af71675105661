"""Exception hierarchy.

Every error raised on purpose by the package derives from ``BergmanError``.
The CLI maps ``ConfigError`` to exit code 2 and every other ``BergmanError``
to exit code 3.
"""


class BergmanError(Exception):
    pass


class ConfigError(BergmanError, ValueError):
    """Invalid family parameters or run configuration."""


class DomainError(BergmanError, ValueError):
    """A point lies outside the region where an operation is defined."""


class BranchPointError(DomainError):
    """Evaluation on a branch cut or at a pole of an analytic continuation."""


class PreconditionError(BergmanError, ValueError):
    pass


class QuadratureError(BergmanError):
    def __init__(self, message, worst_delta=None, nodes=None):
        super().__init__(message)
        self.worst_delta = worst_delta
        self.nodes = nodes


class IllConditionedError(BergmanError):
    def __init__(self, step, precision_bits, message=None):
        self.step = step
        self.precision_bits = precision_bits
        if message is None:
            message = (
                f"Cholesky pivot {step} lost more than half of its significand at "
                f"{precision_bits} bits; retry with precision_bits={2 * precision_bits}"
            )
        super().__init__(message)


class CrossCheckError(BergmanError):
    def __init__(self, message, discrepancy=None):
        super().__init__(message)
        self.discrepancy = discrepancy


class SolverError(BergmanError):
    pass


class RootFinderError(BergmanError):
    def __init__(self, message, worst_residual=None):
        super().__init__(message)
        self.worst_residual = worst_residual


class StructureError(BergmanError):
    """A structural property that must hold by theory was violated."""
