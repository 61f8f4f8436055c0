"""Exception hierarchy shared across the package."""


class StormletError(Exception):
    """Base class for all errors raised by stormlet."""


class ParseError(StormletError):
    """Syntax error in a PRISM program, property string, or explicit file.

    Carries the position and, where known, the tokens that would have
    been accepted at that position.
    """

    def __init__(self, message, line=None, column=None, expected=None):
        self.line = line
        self.column = column
        self.expected = tuple(expected) if expected else ()
        loc = ""
        if line is not None:
            loc = f" at line {line}" + (f", column {column}" if column is not None else "")
        exp = ""
        if self.expected:
            exp = " (expected " + ", ".join(self.expected) + ")"
        super().__init__(message + loc + exp)


class BuildError(StormletError):
    """Model construction failed (deadlock, range violation, bad probability, ...)."""


class ModelError(StormletError):
    """A model-level operation received a model violating its precondition."""


class UnsupportedFeatureError(StormletError):
    """A named feature outside the supported subset was requested."""

    def __init__(self, feature, detail=""):
        self.feature = feature
        msg = f"unsupported feature: {feature}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class SolverError(StormletError):
    """Numeric solver failed (iteration cap exceeded, no valid upper bound, ...)."""


class CheckError(StormletError):
    """Property cannot be checked on the given model."""


class EvaluationError(StormletError):
    """Expression or rational-function evaluation failed (type error, pole, ...)."""


class CheckTimeout(StormletError):
    """Per-property timeout exceeded (CLI exit code 3)."""
