"""Independent fixed-frame reference solve for moving-domain problems.

Used to cross-check the straightening transform: instead of mapping the
moving interval onto a reference interval, the grid here stays fixed in
physical space and the moving left endpoint cuts through it.  The node next
to the cut gets a non-uniform three-point stencil against the exact
boundary position (Shortley-Weller), nodes the boundary passes simply
deactivate, and time stepping is implicit Euler.  First order in time and
locally first order at the cut: accuracy comes from brute resolution, which
is the point of a reference.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .errors import SolverError


def solve_moving_reference(field, domain, initial, horizon, nx=2001, dt=2e-5):
    """Backward-Euler cut-cell solve with Dirichlet zero on both boundaries.

    The right endpoint must be fixed; the left endpoint may move (rightward
    or leftward) within the fixed grid extent.  Returns ``(x, u, t)`` at the
    final time, with ``u`` given on the active nodes ``x``.
    """
    lo0, hi = domain.interval(0.0)
    steps = int(round(horizon / dt))
    lows = [domain.left(k * dt) for k in range(steps + 1)]
    lo_min = min(min(lows), lo0)
    if abs(domain.right(horizon) - hi) > 1e-12:
        raise SolverError("reference solve requires a fixed right endpoint")

    x = np.linspace(lo_min, hi, int(nx))
    dx = x[1] - x[0]
    u = np.array([float(initial(xi)) for xi in x])
    u[x < lo0] = 0.0

    for n in range(steps):
        t1 = (n + 1) * dt
        lo = float(domain.left(t1))
        j0 = int(np.searchsorted(x, lo))  # first node with x >= lo
        if j0 >= x.size - 2:
            raise SolverError("moving boundary swept the whole reference grid")
        hb = x[j0] - lo
        active = slice(j0, x.size)
        m = x.size - j0
        ua = u[active]

        a = np.asarray(field.a(x[active], t1), dtype=float)
        b = np.asarray(field.b(x[active], t1), dtype=float)
        c = np.asarray(field.c(x[active], t1), dtype=float)

        lower = a / dx**2 - b / (2 * dx)
        diag = -2.0 * a / dx**2 + c
        upper = a / dx**2 + b / (2 * dx)
        if hb > 0.05 * dx:
            # Non-uniform stencil at the cut node against u = 0 at x = lo.
            diag[0] = -2.0 * a[0] / (hb * dx) + c[0] - b[0] * (dx - hb) / (hb * dx)
            upper[0] = 2.0 * a[0] / (dx * (hb + dx)) + b[0] * hb / (dx * (hb + dx))
            lower[0] = 0.0
            cut_dirichlet = False
        else:
            cut_dirichlet = True
        lower_i = -dt * lower
        diag_i = 1.0 - dt * diag
        upper_i = -dt * upper
        rhs = ua.copy()
        if cut_dirichlet:
            diag_i[0] = 1.0
            upper_i[0] = 0.0
            rhs[0] = 0.0
        diag_i[-1] = 1.0
        lower_i[-1] = 0.0
        rhs[-1] = 0.0
        u[active] = kernels.tridiag_solve(lower_i, diag_i, upper_i, rhs)
        u[:j0] = 0.0

    lo_end = float(domain.left(steps * dt))
    j0 = int(np.searchsorted(x, lo_end))
    return x[j0:], u[j0:], steps * dt
