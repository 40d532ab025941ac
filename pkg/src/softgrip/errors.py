"""Exception hierarchy shared by all toolkit modules.

Every error carries a short machine-readable ``category`` used by the CLI
to pick an exit code.
"""


class ToolkitError(Exception):
    category = "toolkit"


class ConfigError(ToolkitError):
    """Configuration file could not be parsed or failed validation."""

    category = "config"


class LimitViolationError(ToolkitError):
    """A joint angle lies outside its configured limit interval."""

    category = "limit"

    def __init__(self, message, angle_name=None):
        super().__init__(message)
        self.angle_name = angle_name


class OutOfWorkspaceError(ToolkitError):
    """Target point is not reachable by the finger."""

    category = "workspace"

    def __init__(self, message, nearest_distance=None):
        super().__init__(message)
        self.nearest_distance = nearest_distance


class SaturationError(ToolkitError):
    """Required actuator pressure falls outside the supply range."""

    category = "saturation"

    def __init__(self, message, feasible_range=None):
        super().__init__(message)
        self.feasible_range = feasible_range


class InsufficientDataError(ToolkitError):
    category = "data"


class DegenerateDataError(ToolkitError):
    category = "data"


class NoObjectError(ToolkitError):
    """Vision mask contains no foreground pixels."""

    category = "vision"


class ToleranceExceededError(ToolkitError):
    """Expected positioning error exceeds the compliance budget of a plan."""

    category = "tolerance"


class ConsistencyError(ToolkitError):
    """Inputs that must agree with each other do not."""

    category = "consistency"


class StructuralError(ToolkitError):
    """Robot description tree is malformed."""

    category = "structure"
