"""Exception hierarchy shared by the solver, auditors and CLI."""


class DegenLabError(Exception):
    """Base class for all package errors."""


class DomainError(DegenLabError, ValueError):
    """Argument outside the domain where a quantity is defined (e.g. x <= 0)."""


class ArgumentError(DegenLabError, ValueError):
    """Malformed or inconsistent arguments."""


class DivergenceError(DegenLabError, ValueError):
    """A requested measure or integral is infinite."""


class DataError(DegenLabError, ValueError):
    """Problem data violates a structural requirement (sign, support)."""


class BlowUpError(DegenLabError, ValueError):
    """Evaluation past the finite blow-up time of a separated solution."""


class StepError(DegenLabError, RuntimeError):
    """The linear system of a time step could not be solved."""


class PositivityViolation(DegenLabError, RuntimeError):
    """Undershoot below the positivity tolerance."""

    def __init__(self, message, *, index=None, x=None, value=None):
        super().__init__(message)
        self.index = index
        self.x = x
        self.value = value


class ConsistencyError(DegenLabError, RuntimeError):
    """A numerical classification disagrees with a stated theorem."""


class ConfigError(DegenLabError, ValueError):
    """Experiment configuration failed validation; carries every problem found."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
