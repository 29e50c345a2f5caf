"""Exception types shared across the toolkit."""


class TlspecError(Exception):
    """Base class for toolkit errors."""


class ConfigError(TlspecError):
    """Invalid or inconsistent run configuration.

    Carries the full list of violations so a bad config is reported in one
    round trip rather than one key at a time.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ConvergenceError(TlspecError):
    """A numerical procedure failed to reach its convergence target."""


class NumericalInstabilityError(TlspecError):
    """Propagation produced a state violating trace or hermiticity bounds."""
