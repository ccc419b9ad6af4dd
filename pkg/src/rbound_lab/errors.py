"""Exception hierarchy shared by all modules."""


class RBoundLabError(Exception):
    """Base class; ``code`` is the machine-readable tag used in CLI error reports."""

    code = "error"


class InvalidParameter(RBoundLabError, ValueError):
    code = "invalid-parameter"


class DimensionError(RBoundLabError, ValueError):
    code = "dimension-error"


class DegenerateInput(RBoundLabError, ValueError):
    code = "degenerate-input"


class UnsupportedDual(RBoundLabError, ValueError):
    code = "unsupported-dual"


class Unsupported(RBoundLabError, ValueError):
    code = "unsupported"


class ConfigError(RBoundLabError):
    code = "config-error"

    def __init__(self, message, field_path=()):
        super().__init__(message)
        self.field_path = tuple(field_path)


class InternalError(RBoundLabError, RuntimeError):
    code = "internal-error"
