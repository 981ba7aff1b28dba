"""Exception hierarchy shared by every stage of the link."""


class OptOfdmError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(OptOfdmError, ValueError):
    """Invalid configuration, framing or parameter value."""


class ContractError(OptOfdmError, ValueError):
    """An input violates an operation's precondition (e.g. non-Hermitian spectrum)."""


class SyncError(OptOfdmError):
    """Frame synchronization could not find an unambiguous correlation peak."""


class DivergenceError(OptOfdmError):
    """Adaptive filter training diverged (step size too large)."""


class DeadSubcarrierError(OptOfdmError):
    """One or more equalized subcarriers have an estimated gain of (almost) zero."""

    def __init__(self, bins):
        self.bins = [int(k) for k in bins]
        super().__init__(f"dead subcarriers (|H| < 1e-12): {self.bins}")


class DecodeError(OptOfdmError):
    """Layered decoding failed (regeneration made the residual blow up)."""


class StageError(OptOfdmError):
    """Wraps an error raised inside one stage of :func:`run_link`."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
