"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Inconsistent scenario, dimensions or experiment configuration."""


class InfeasibleError(RuntimeError):
    """No beamformer satisfies the power and energy-harvesting constraints.

    Attributes:
        best_candidate: the best infeasible candidate seen, for diagnostics.
    """

    def __init__(self, message, best_candidate=None):
        super().__init__(message)
        self.best_candidate = best_candidate
