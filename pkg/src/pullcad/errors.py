"""Exception types shared across the package."""


class PullcadError(Exception):
    """Base class for all package errors."""


class ExpressionError(PullcadError):
    """Lexical or syntactic error in an expression string."""

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at column {position})"
        super().__init__(message)
        self.position = position


class SchemaError(PullcadError):
    """Model document violates the file schema or a model invariant."""

    def __init__(self, message, location=None):
        if location:
            message = f"{location}: {message}"
        super().__init__(message)
        self.location = location


class CycleError(PullcadError):
    """Constraint dependency graph contains a cycle."""

    def __init__(self, names):
        self.names = list(names)
        super().__init__("constraint cycle involving parameters: " + ", ".join(self.names))


class EvaluationError(PullcadError):
    """Runtime failure while evaluating an expression (e.g. division by zero)."""


class GeometryError(PullcadError):
    """Degenerate or invalid geometry (zero area, non-simple profile, bad depth)."""

    def __init__(self, message, feature_id=None):
        if feature_id:
            message = f"feature '{feature_id}': {message}"
        super().__init__(message)
        self.feature_id = feature_id


class SelectionError(PullcadError):
    """A face cannot be resolved to an editable parameter."""


class SweepError(PullcadError):
    """Candidate sweep produced too few usable variants."""


class ObjFormatError(PullcadError):
    """Malformed OBJ input."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class ProtocolError(PullcadError):
    """Wire protocol violation; `code` is machine-readable."""

    def __init__(self, code, message):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


class ScriptError(PullcadError):
    """Malformed trajectory script."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no
