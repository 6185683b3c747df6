"""Exception types shared across the package."""


class JetContractError(ValueError):
    """Jet operands violate a contract (mismatched center or order)."""


class JetSingularityError(ZeroDivisionError):
    """Reciprocal of a jet whose constant term is below the safe threshold."""


class SimulationDivergedError(RuntimeError):
    """A non-finite field value appeared during time stepping."""

    def __init__(self, step: int, time: float):
        self.step = step
        self.time = time
        super().__init__(f"non-finite field at step {step} (t={time})")


class FitDegenerateError(RuntimeError):
    """Too few usable points above the round-off floor to fit a decay rate."""
