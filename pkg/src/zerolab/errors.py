"""Exception hierarchy shared by all modules."""


class ZeroLabError(Exception):
    """Base class for package errors."""


class ConfigError(ZeroLabError):
    """Malformed configuration source (parse-level failure)."""


class ValidationError(ZeroLabError):
    """A model invariant is violated; the message names the invariant."""


class SolverError(ZeroLabError):
    """Time stepping failed (non-convergence, bad matrix, CFL violation)."""


class ExtinctionReached(SolverError):
    """Free-boundary fronts collided; the run reached its terminal state."""


class AllZeroProfileError(ZeroLabError):
    """A profile is identically zero within tolerance, so zero counting is
    undefined (the standing assumption requires a nontrivial profile)."""
