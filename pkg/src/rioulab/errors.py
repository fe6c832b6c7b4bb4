"""Exception types shared across the package."""


class RiouLabError(Exception):
    """Base class for all package errors."""


class InvalidBox(RiouLabError, ValueError):
    """Box coordinates violate the corner-form invariants."""


class UndefinedIoU(RiouLabError):
    """Both boxes are degenerate, so intersection/union is 0/0."""


class DomainError(RiouLabError, ValueError):
    """Scalar argument outside the documented domain."""


class BetaOutOfDomain(DomainError):
    """Gradient-peak position outside the solvable open interval (0.5, 1)."""


class SolverError(RiouLabError):
    """Solved coefficients failed the residual verification."""


class DegenerateEnclosure(RiouLabError):
    """Enclosing box has zero diagonal; normalized center distance undefined."""


class TargetUnreachable(RiouLabError, ValueError):
    """Requested sample construction cannot hit the target IoU."""


class ConfigError(RiouLabError, ValueError):
    """Simulation configuration violates an invariant."""


class BudgetExceeded(RiouLabError):
    """steps * sample_count exceeds the configured evaluation budget."""


class ShapeMismatch(RiouLabError):
    """A dataflow-graph node's inputs violate its shape rule.

    Raised eagerly during graph construction; validation returns instances
    in a list instead of raising.
    """

    def __init__(self, node_id, label, detail):
        self.node_id = node_id
        self.label = label
        self.detail = detail
        super().__init__(f"node {node_id} ({label}): {detail}")


class NumericFailure(RiouLabError):
    """Numeric execution of a graph produced an invalid value at a node."""

    def __init__(self, node_id, label, detail):
        self.node_id = node_id
        self.label = label
        self.detail = detail
        super().__init__(f"node {node_id} ({label}): {detail}")
