"""Error taxonomy shared across the package."""


class ParameterError(ValueError):
    """Caller supplied an argument outside an operation's precondition."""


class ScopeError(ValueError):
    """A realization was restricted to indices outside its scope."""


class BudgetError(ValueError):
    """Experiment horizon too small for the requested procedure."""


class CapacityError(RuntimeError):
    """Exact inference refused: the sweep frontier exceeds the supported width."""


class IllPosedObjectiveError(RuntimeError):
    """A ratio term has a zero denominator with a nonzero numerator."""


class InternalConsistencyError(RuntimeError):
    """An invariant that the pipeline guarantees by construction was violated."""


class BifParseError(ValueError):
    """Malformed network file; carries line and column of the offending token."""

    def __init__(self, message, line, column):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column
