"""Exception types shared across the package."""


class GraphError(ValueError):
    """A graph or graph set violates a structural constraint."""


class InvalidInstanceError(ValueError):
    """A game instance fails validation; carries the diagnostics list."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("invalid instance: " + "; ".join(self.diagnostics))


class IllegalActionError(ValueError):
    """An action outside the legal action set was supplied."""


class InfeasibleConditionError(ValueError):
    """The discount-threshold condition cannot be evaluated (zero-cost edge)."""


class PolicyContractError(RuntimeError):
    """A policy emitted an invalid distribution at some state."""
