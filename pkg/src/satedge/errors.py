"""Exception types shared across the package."""


class SatEdgeError(Exception):
    """Base class for all package errors."""


# -- geometry / channel generation ------------------------------------------

class EmptyVisibility(SatEdgeError):
    """Walker-mode sampling found fewer in-window satellites than requested."""


class NonPositiveDistance(SatEdgeError):
    pass


class NonPositiveParameter(SatEdgeError):
    pass


class ShapeMismatch(SatEdgeError):
    pass


# -- rates / cost evaluation -------------------------------------------------

class ZeroPower(SatEdgeError):
    pass


class ZeroRate(SatEdgeError):
    pass


class ZeroCompute(SatEdgeError):
    pass


class SingularCovariance(SatEdgeError):
    pass


# -- solvers -----------------------------------------------------------------

class MaxIterationsExceeded(SatEdgeError):
    pass


class NoStrictlyFeasiblePoint(SatEdgeError):
    pass


class InfeasibleBox(SatEdgeError):
    pass


class NotHermitian(SatEdgeError):
    pass


# -- optimizer ---------------------------------------------------------------

class Infeasible(SatEdgeError):
    """A subproblem has an empty feasible set."""


class ScaDiverged(SatEdgeError):
    pass


class NegativeDelayBudget(SatEdgeError):
    """Residual delay budget for transmission is non-positive; the current
    compute allocation cannot meet the deadline."""


class IrreparableCapacity(SatEdgeError):
    pass


class BudgetExceeded(SatEdgeError):
    """Branch-and-bound node budget exhausted."""


class ZfInfeasible(SatEdgeError):
    """Exact zero-forcing impossible (interferers >= antennas)."""


class ScenarioInfeasible(SatEdgeError):
    """The sampled scenario admits no feasible plan."""

    def __init__(self, msg, violations=None):
        super().__init__(msg)
        self.violations = violations or []


# -- harness -----------------------------------------------------------------

class ParseError(SatEdgeError):
    pass


class ValidationError(SatEdgeError):
    pass


class EmptyInput(SatEdgeError):
    pass
