"""Exception types shared across the solver and lab modules."""


class ConeViolationError(ValueError):
    """A spectrum left the admissibility cone where membership is required.

    Carries the offending node indices (if any) in ``nodes``.
    """

    def __init__(self, message, nodes=None):
        super().__init__(message)
        self.nodes = [] if nodes is None else list(nodes)


class StarshapednessError(ValueError):
    """Radial field or support function violated positivity."""


class GeometryError(ValueError):
    """Discrete geometry became degenerate (e.g. non-SPD metric)."""


class StartRadiusError(ValueError):
    """The round-sphere start equation has no positive root."""


class NonconvergenceError(RuntimeError):
    """Newton or continuation failed to converge.

    ``diagnostics`` holds the last solver state (report, field, trace)
    so failed runs can still be inspected and archived.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class SamplingError(RuntimeError):
    """Rejection sampling acceptance rate fell below the cutoff."""


class ConstructionError(ValueError):
    """A manufactured solution is invalid on the requested domain."""


class ConfigError(ValueError):
    """Run configuration is malformed or violates a problem invariant."""
