"""Exception types shared across the package."""


class ProdiabError(Exception):
    """Base class for all package-specific errors."""


class ValidityError(ProdiabError, ValueError):
    """A model or parameter set is outside the regime where it is defined
    (e.g. vanishing atomic linewidth, negative effective jump rate)."""


class DegenerateSteadyStateError(ProdiabError):
    """The Liouvillian null space is numerically multi-dimensional; no
    unique steady state can be reported."""


class StiffnessError(ProdiabError):
    """Adaptive step size underflowed; the problem is too stiff for the
    explicit integrator."""

    def __init__(self, time, message=None):
        self.time = time
        super().__init__(message or f"step size underflow at t = {time:.6g}")


class InvariantViolationError(ProdiabError):
    """A density-matrix invariant (trace, Hermiticity, positivity) was
    violated beyond 10x its tolerance during evolution."""


class TruncationLeakError(ProdiabError):
    """Population of the top Fock level exceeded the leak threshold."""


class UnsupportedOrderError(ProdiabError, ValueError):
    """Correlator requested with more photon operators than implemented."""


class ConfigError(ProdiabError, ValueError):
    """Scenario configuration file could not be parsed or validated."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
