"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A scenario, grid, or solver configuration is invalid."""


class ProjectionError(RuntimeError):
    """A constraint projection failed to converge.

    ``diagnostics`` carries whatever the failing path knew (constraint kind,
    multiplier bracket, residuals) to make the failure reportable.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class InfeasibleProblemError(RuntimeError):
    """No point satisfying every constraint could be found.

    ``worst_violations`` lists (description, violation) pairs for the most
    violated constraints at the best point reached.
    """

    def __init__(self, message, worst_violations=None):
        super().__init__(message)
        self.worst_violations = list(worst_violations or [])
