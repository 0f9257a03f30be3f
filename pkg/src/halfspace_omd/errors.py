"""Exception types raised across the package."""


class InvalidArgument(ValueError):
    """A precondition on an argument was violated."""


class BandExhausted(RuntimeError):
    """Rejection sampling hit its attempt budget without landing in the band."""

    def __init__(self, attempts, b):
        super().__init__(f"no draw landed in the band of width {b:g} after {attempts} attempts")
        self.attempts = attempts
        self.b = b


class SolverFailure(RuntimeError):
    """An inner solver did not converge within its iteration cap."""

    def __init__(self, message, residual=float("nan")):
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class DegenerateOutput(RuntimeError):
    """An averaged or thresholded vector came out as exactly zero."""


class DegenerateInit(DegenerateOutput):
    """The label-weighted average used for initialization vanished."""


class PhaseError(RuntimeError):
    """Wraps a failure inside one phase of the main loop."""

    def __init__(self, phase, cause):
        super().__init__(f"phase {phase}: {type(cause).__name__}: {cause}")
        self.phase = phase
        self.cause = cause
