"""Exception hierarchy.

Bad arguments raise plain ``ValueError``. Conditions where the model itself
has no valid answer derive from :class:`ModelError` so the CLI can map them
to their own exit code.
"""


class ModelError(Exception):
    """The model has no meaningful answer for otherwise valid inputs."""

    code = "model-error"


class SaturationError(ModelError):
    """Per-gate noise probability reached 1; the linear noise model no longer holds."""

    code = "saturated"


class DegenerateChannelError(ModelError):
    """Overall gain is zero, so QBER is undefined."""

    code = "degenerate-channel"


class NoKeyError(ModelError):
    """No mean photon number in the search interval gives a positive key rate."""

    code = "no-key"


class NoBudgetError(ModelError):
    """The requested key rate cannot be met even with dark counts alone."""

    code = "no-budget"


class ScenarioError(ValueError):
    """Invalid scenario document. ``path`` locates the offending field."""

    def __init__(self, path, message):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}" if path else message)
