"""Exception hierarchy.

Numerical *signals* (infinite divergence, unbounded LP directions, quadrature
failure) are distinct classes so callers can branch on them; plain misuse
(unknown axis, overlapping groups) raises ValueError subclasses.
"""


class ContnetError(Exception):
    """Base class for all package errors."""


class AxisError(ContnetError, ValueError):
    """Unknown, duplicated or mismatched axis names/points."""


class GroupOverlapError(ContnetError, ValueError):
    """Variable groups passed to an information measure are not disjoint."""


class GridMismatchError(ContnetError, ValueError):
    """A mapped point does not lie on the declared output grid."""


class GridOverflowError(ContnetError, OverflowError):
    """Scaled integer grid index exceeds the exact-arithmetic range."""


class QuadratureError(ContnetError, ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class MarkovViolationError(ContnetError, ValueError):
    """A required Markov-chain factorization does not hold in the input pmf."""


class IndependenceViolationError(ContnetError, ValueError):
    """A required conditional-independence structure does not hold."""


class UnboundedError(ContnetError, ArithmeticError):
    """Linear program / polyhedron is unbounded in the optimized direction."""


class InfeasibleError(ContnetError, ArithmeticError):
    """Constraint system has no solution."""


class ConfigError(ContnetError, ValueError):
    """Structured-text configuration failed schema validation."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"config key '{key}': {message}")
