"""Exception types shared across the package."""


class CrossviewError(Exception):
    """Base class for all crossview errors."""


class InvalidInputError(CrossviewError, ValueError):
    """Malformed or out-of-contract input data or configuration."""


class DegenerateTrajectoryError(CrossviewError):
    """Trajectory never moves, so no orientation is measurable."""


class InsufficientOverlapError(CrossviewError):
    """No shift satisfies the minimum-overlap requirement."""


class DegenerateAffinityError(CrossviewError):
    """Affinity matrix is identically zero; no assignment is possible."""


class InvalidProblemError(CrossviewError):
    """Problem instance is infeasible (more egocentric videos than top-view people)."""
