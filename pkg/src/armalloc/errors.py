"""Exception hierarchy shared by the design, simulation and CLI layers."""


class ArmAllocError(Exception):
    """Base class for all errors raised by armalloc."""


class InvalidParameterError(ArmAllocError, ValueError):
    """A scenario field violates its domain invariant."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class InvalidIntegrandError(ArmAllocError, ValueError):
    """The integrand produced a non-finite value at a quadrature node."""


class BracketError(ArmAllocError, ValueError):
    """The root-finding interval does not contain a sign change."""


class ConvergenceError(ArmAllocError, RuntimeError):
    """An iterative search hit its iteration cap before converging."""


class InfeasibleDesignError(ArmAllocError, RuntimeError):
    """No sample size up to the configured cap meets the power target."""
