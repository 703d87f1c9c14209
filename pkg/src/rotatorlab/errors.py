"""Exception taxonomy.

Physics refusals are first-class outcomes here, not incidental failures:
a degenerate velocity Hessian carries its kernel and the contracted
constraint value so that downstream analysis can consume them.
"""

from __future__ import annotations

__all__ = [
    "RotatorError",
    "DomainError",
    "NonSmoothPointError",
    "ChartSingularityError",
    "RotationlessError",
    "SuperluminalError",
    "DegenerateHessianError",
    "IndeterminateEvolutionError",
    "BranchInadmissibleError",
    "ProfileError",
    "IllConditionedWarning",
]


class RotatorError(Exception):
    """Base class for all physics/domain errors raised by this package."""


class DomainError(RotatorError):
    """Input outside the mathematical domain of an operation."""


class NonSmoothPointError(DomainError):
    """Evaluation exactly at a non-smooth point (e.g. sqrt(Q) at Q = 0)."""


class ChartSingularityError(RotatorError):
    """State violates chart admissibility (1 - n.xdot <= tol, |xdot| >= 1)."""


class RotationlessError(RotatorError):
    """Operation undefined on the rotationless branch (|ndot| = 0)."""


class SuperluminalError(RotatorError):
    """A speed-like quantity reached or exceeded the speed of light."""


class DegenerateHessianError(RotatorError):
    """Velocity Hessian has a nontrivial null space; accelerations are
    not determined.  Carries the structured degeneracy data."""

    def __init__(self, message, *, hessian=None, kernel=None, constraint=None,
                 singular_values=None, rank=None):
        super().__init__(message)
        self.hessian = hessian
        self.kernel = kernel if kernel is not None else []
        self.constraint = constraint
        self.singular_values = singular_values
        self.rank = rank


class IndeterminateEvolutionError(RotatorError):
    """Evolution law degenerates to 0 = 0 (universal factor vanishes)."""


class BranchInadmissibleError(RotatorError):
    """Requested closed-form solution branch has no admissible solution."""


class ProfileError(RotatorError):
    """Phase profile violates an admissibility condition."""

    def __init__(self, message, t_offending=None):
        super().__init__(message)
        self.t_offending = t_offending


class IllConditionedWarning(UserWarning):
    """Linear solve with condition estimate above threshold."""
