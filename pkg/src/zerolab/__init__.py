"""zerolab: zero-set dynamics of one-dimensional parabolic equations.

Solves linear/semilinear equations ``u_t = a u_xx + b u_x + c u + f`` on
fixed, moving and free-boundary intervals, counts and tracks the zeros of
the solution over time, classifies boundary-trace moments, and checks that
the zero count behaves as a discrete Lyapunov functional (finite,
non-increasing, strictly dropping at degeneracies).
"""

from .errors import (
    AllZeroProfileError,
    ConfigError,
    ExtinctionReached,
    SolverError,
    ValidationError,
    ZeroLabError,
)

__version__ = "0.1.0"

__all__ = [
    "AllZeroProfileError",
    "ConfigError",
    "ExtinctionReached",
    "SolverError",
    "ValidationError",
    "ZeroLabError",
    "__version__",
]
