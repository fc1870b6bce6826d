"""Exception hierarchy shared across the package."""


class AelabError(Exception):
    """Base class for all package errors."""


class ShapeError(AelabError):
    """Operand dimensions do not agree."""


class EmptyInputError(AelabError):
    """An operation received zero rows/elements where at least one is required."""


class DomainError(AelabError):
    """A scalar argument is outside its valid range."""


class ConfigError(AelabError):
    """Invalid configuration. May carry a list of violations."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class IntegrityError(AelabError):
    """Inconsistent paired inputs (e.g. image/label counts differ)."""


class FormatError(AelabError):
    """A binary or text file does not match its declared format."""


class DivergenceError(AelabError):
    """Training loss became non-finite or exploded."""

    def __init__(self, step, loss):
        self.step = step
        self.loss = loss
        super().__init__(f"training diverged at step {step}: loss={loss}")


class DegenerateClassError(AelabError):
    """A class has too few samples for the requested computation."""
