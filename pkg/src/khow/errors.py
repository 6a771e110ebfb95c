"""Exception hierarchy shared by every khow module."""


class KhowError(Exception):
    pass


class ParseError(KhowError, ValueError):
    """Syntax error in a model, formula or plan document."""

    def __init__(self, message, line=None, pos=None):
        self.line = line
        self.pos = pos
        where = ""
        if line is not None:
            where = f"line {line}: "
        elif pos is not None:
            where = f"position {pos}: "
        super().__init__(where + message)


class ModelError(KhowError, ValueError):
    """The model violates a structural invariant."""


class NotPerfectRecallError(ModelError):
    pass


class UnknownIdentifierError(KhowError, LookupError):
    pass


class FragmentError(KhowError, ValueError):
    """Formula is outside the language accepted by the operation."""


class PlanError(KhowError, ValueError):
    pass


class BudgetExceededError(KhowError):
    pass
