"""Exception types; the CLI maps them to distinct exit codes."""


class ConfigError(ValueError):
    """Invalid configuration or solver/experiment arguments (exit code 2)."""


class ResourceError(RuntimeError):
    """Request would exceed a size guard, e.g. dense work at too large L (exit code 3)."""


class NumericError(RuntimeError):
    """Numerical failure: non-Hermitian input, singular system, diverged fit (exit code 4)."""


class PreparationError(NumericError):
    """Initial-state fit did not reach the requested infidelity."""

    def __init__(self, message: str, final_infidelity: float):
        super().__init__(f"{message} (final infidelity {final_infidelity:.3e})")
        self.final_infidelity = final_infidelity
