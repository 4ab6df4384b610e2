"""Exception types shared across the package."""


class Devs2UmlError(Exception):
    """Base class for all errors raised by devs2uml."""


class DslSyntaxError(Devs2UmlError):
    def __init__(self, message, line, col, token=None):
        self.line = line
        self.col = col
        self.token = token
        where = f"{line}:{col}"
        if token is not None:
            message = f"{message} (at {token!r})"
        super().__init__(f"{where}: {message}")


class ExprTypeError(Devs2UmlError):
    """Type-check failure; ``expr`` is the offending subexpression."""

    def __init__(self, message, expr=None):
        self.expr = expr
        super().__init__(message)


class EvaluationError(Devs2UmlError):
    def __init__(self, message, loc=None, path=None):
        self.loc = loc
        self.path = path
        prefix = ""
        if path:
            prefix += f"{path}: "
        if loc:
            prefix += f"{loc[0]}:{loc[1]}: "
        super().__init__(prefix + message)


class ModelError(Devs2UmlError):
    """Model file is syntactically valid but cannot be resolved."""


class ScenarioError(Devs2UmlError):
    pass


class StateExplosion(Devs2UmlError):
    def __init__(self, model, count, cap):
        self.model = model
        self.count = count
        self.cap = cap
        super().__init__(f"{model}: {count} finite states exceed the cap of {cap}")


class SimulationError(Devs2UmlError):
    pass


class UnresolvedTie(SimulationError):
    pass


class XmiError(Devs2UmlError):
    pass


class XmiParseError(XmiError):
    pass


class XmiVersionError(XmiError):
    pass


class XmiSchemaError(XmiError):
    def __init__(self, message, path):
        self.path = path
        super().__init__(f"{path}: {message}")


class CosimulationError(Devs2UmlError):
    """A simulator failed during co-simulation; ``side`` is "devs" or "uml"."""

    def __init__(self, side, cause):
        self.side = side
        self.cause = cause
        super().__init__(f"[{side}] {type(cause).__name__}: {cause}")
