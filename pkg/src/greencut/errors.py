from __future__ import annotations

from typing import Optional


class GreencutError(Exception):
    """Base class for every error raised by greencut."""


class InvalidModelError(GreencutError, ValueError):
    """A band model violates its own invariants."""


class ContinuationUnavailableError(GreencutError):
    """The requested Riemann sheet (or continuation) is not available for the model."""


class BranchPointError(GreencutError, ValueError):
    """Evaluation point lies within the guard radius of a band edge."""


class DomainError(GreencutError, ValueError):
    """An argument lies outside the domain of an operation."""


class DegenerateQuadraticError(GreencutError, ValueError):
    """The semicircle pole quadratic degenerates (delta0 == 1/2).

    ``linear_root`` holds the single root of the linearized equation, or
    ``None`` when that equation has no finite root (eps == 0).
    """

    def __init__(self, message: str, linear_root: Optional[float]) -> None:
        super().__init__(message)
        self.linear_root = linear_root


class UnsupportedPoleOrderError(GreencutError):
    """Residues of second-order poles are not supported."""


class AccuracyError(GreencutError):
    """Quadrature did not reach the requested tolerance.

    ``estimate`` is the best value reached, ``error_bound`` its error estimate.
    """

    def __init__(self, message: str, estimate: object = None, error_bound: float = float('nan')) -> None:
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class InsufficientDataError(GreencutError, ValueError):
    """Not enough data to perform a fit."""


class SchemeMismatchError(GreencutError, ValueError):
    """A discretization scheme was requested for a model it cannot represent."""


class ConfigError(GreencutError, ValueError):
    """Invalid run configuration (file, flag or environment)."""


class HorizonWarning(UserWarning):
    """An oracle series extends beyond the recurrence horizon."""
