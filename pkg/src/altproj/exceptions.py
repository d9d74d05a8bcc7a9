"""Exception hierarchy for altproj."""


class AltProjError(Exception):
    """Base class for all library errors."""


class ShapeMismatch(AltProjError, ValueError):
    pass


class SupportMismatch(AltProjError, ValueError):
    pass


class AxisMismatch(AltProjError, ValueError):
    pass


class ZeroMarginal(AltProjError, ValueError):
    """Conditioning on a state that carries no mass."""

    def __init__(self, axis, state):
        self.axis = axis
        self.state = state
        super().__init__(f"zero marginal mass at {axis}={state}")


class NonPositiveInput(AltProjError, ValueError):
    pass


class NonPositiveEntry(AltProjError, ValueError):
    pass


class AbsoluteContinuityViolation(AltProjError, ValueError):
    pass


class DegenerateSupport(AltProjError, ValueError):
    """A projection input lacks full support on the support set."""


class NotConverged(AltProjError, RuntimeError):
    def __init__(self, iterations, message=None):
        self.iterations = iterations
        super().__init__(message or f"no convergence after {iterations} iterations")


class CapExceeded(AltProjError, RuntimeError):
    pass


class GenerationFailed(AltProjError, RuntimeError):
    pass


class SpecValidationError(AltProjError, ValueError):
    """A chain specification violates a named invariant."""

    def __init__(self, invariant, message):
        self.invariant = invariant
        super().__init__(f"[{invariant}] {message}")


class NotErgodic(SpecValidationError):
    def __init__(self, message="transition matrix is not irreducible and aperiodic"):
        super().__init__("ergodicity", message)


class CompatibilityViolation(SpecValidationError):
    def __init__(self, max_violation):
        self.max_violation = max_violation
        super().__init__(
            "compatibility",
            f"kernels admit no common coupling (max disintegration violation {max_violation:.3e})",
        )
