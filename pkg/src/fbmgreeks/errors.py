"""Exception hierarchy.

Every error carries a ``category`` used by the CLI to pick its exit code:
"config" for anything wrong with inputs before computation starts,
"numerical" for failures during computation, "io" for filesystem trouble.
"""


class EngineError(Exception):
    category = "numerical"


class DomainError(EngineError):
    """An argument is outside the mathematical domain of the operation."""

    category = "config"


class ConfigurationError(EngineError):
    """Inconsistent or incomplete inputs (missing functions, bad lengths)."""

    category = "config"


class RegimeError(EngineError):
    """The requested Hurst parameter is outside the supported regime."""

    category = "config"


class ConfigParseError(ConfigurationError):
    """Scenario document error, with a 1-based line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericalError(EngineError):
    """Linear algebra failure; ``pivot`` is the offending leading minor."""

    def __init__(self, message, pivot=None):
        self.pivot = pivot
        super().__init__(message)


class EmbeddingError(NumericalError):
    """Circulant embedding produced a significantly negative eigenvalue."""


class DivergenceError(NumericalError):
    """A simulated path left the admissible range; ``step`` is 1-based."""

    def __init__(self, message, step=None, path=None):
        super().__init__(message)
        self.step = step
        self.path = path


class SingularityError(NumericalError):
    """A coefficient that must be inverted dropped below the floor."""


class RegularityError(NumericalError):
    """A fractional operator produced non-finite values."""
