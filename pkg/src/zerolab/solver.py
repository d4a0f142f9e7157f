"""Finite-difference time stepping on a fixed computational interval.

The scheme is Crank-Nicolson with centered second-order space differences;
slope conditions (Neumann/Robin/prescribed flux) enter through second-order
ghost-node elimination, a nonlinear flux law is solved by damped Newton
iteration on the boundary stencil, and a semilinear reaction term gets one
Picard correction per step.  Upwinding is deliberately not used: drift
stays bounded and resolution validation keeps the grid Peclet number below
2, which preserves the second-order accuracy the degeneracy detectors rely
on.  Moving domains are handled by composing with :mod:`zerolab.transform`.

The first few steps of a trajectory are optionally sub-stepped with the
implicit Euler scheme (two half steps each), which damps the ringing
Crank-Nicolson exhibits for initial data that are incompatible with the
boundary conditions without costing second-order accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import kernels, transform
from .errors import SolverError, ValidationError
from .model import BCKind, Snapshot, estimate_derivative

_NEWTON_MAX_ITER = 30
_PECLET_LIMIT = 2.0 + 1e-9


def _one_sided_slopes(values, dx):
    left = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dx)
    right = (3.0 * values[-1] - 4.0 * values[-2] + values[-3]) / (2.0 * dx)
    return left, right


@dataclass
class FineTrace:
    """Per-internal-step boundary data, finer than the snapshot cadence."""

    t: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    ux1: np.ndarray
    ux2: np.ndarray
    scale: np.ndarray
    xi1: np.ndarray
    xi2: np.ndarray

    @property
    def dt(self):
        return float(self.t[1] - self.t[0]) if self.t.size > 1 else 0.0


@dataclass
class Trajectory:
    """Snapshots plus fine boundary traces and solver metadata."""

    snapshots: list
    trace: FineTrace
    dt: float
    nodes: int
    scheme: str = "crank-nicolson"
    config: object = None
    meta: dict = dc_field(default_factory=dict)

    @property
    def times(self):
        return np.array([s.t for s in self.snapshots])

    def snapshot_at(self, t):
        times = self.times
        return self.snapshots[int(np.argmin(np.abs(times - t)))]

    def check_times(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValidationError("trajectory times must be strictly increasing")
        return True

    def sup_norm_within_bound(self, slack=1e-6):
        """A-priori bound check: sup |u| <= 1 + sup |u0| (declared scenarios)."""
        bound = 1.0 + float(self.trace.scale[0])
        return float(self.trace.scale.max()) <= bound + slack


class _BoundaryRows:
    """Ghost-eliminated operator rows at both ends for one coefficient time."""

    def __init__(self, field, x, t, bc_left, bc_right, dx):
        self.flux_coef_left = 0.0
        self.flux_left = None
        a = np.asarray(field.a(x, t), dtype=float)
        b = np.asarray(field.b(x, t), dtype=float)
        c = np.asarray(field.c(x, t), dtype=float)
        inv_dx2 = 1.0 / (dx * dx)
        inv_2dx = 0.5 / dx
        lower = a * inv_dx2 - b * inv_2dx
        diag = -2.0 * a * inv_dx2 + c
        upper = a * inv_dx2 + b * inv_2dx

        # Left row.
        kind = bc_left.kind
        if bc_left.is_dirichlet or kind is BCKind.FREE_STEFAN:
            lower[0] = diag[0] = upper[0] = 0.0
        elif kind in (BCKind.NEUMANN, BCKind.ROBIN):
            beta = float(bc_left.beta(t))
            diag[0] = -2.0 * a[0] * inv_dx2 - 2.0 * a[0] * beta / dx + b[0] * beta + c[0]
            upper[0] = 2.0 * a[0] * inv_dx2
            lower[0] = 0.0
        elif kind is BCKind.NONLINEAR_FLUX:
            diag[0] = -2.0 * a[0] * inv_dx2 + c[0]
            upper[0] = 2.0 * a[0] * inv_dx2
            lower[0] = 0.0
            self.flux_coef_left = -2.0 * a[0] / dx + b[0]
            self.flux_left = bc_left
        else:
            raise SolverError(f"unsupported left boundary kind {kind}")

        # Right row.
        kind = bc_right.kind
        if bc_right.is_dirichlet or kind is BCKind.FREE_STEFAN:
            lower[-1] = diag[-1] = upper[-1] = 0.0
        elif kind in (BCKind.NEUMANN, BCKind.ROBIN):
            beta = float(bc_right.beta(t))
            diag[-1] = -2.0 * a[-1] * inv_dx2 - 2.0 * a[-1] * beta / dx - b[-1] * beta + c[-1]
            lower[-1] = 2.0 * a[-1] * inv_dx2
            upper[-1] = 0.0
        else:
            raise SolverError(f"unsupported right boundary kind {kind}")

        self.lower = lower
        self.diag = diag
        self.upper = upper


def _flux_derivative(bc, t, u):
    if bc.flux_du is not None:
        return float(bc.flux_du(t, u))
    h = 1e-6 * (1.0 + abs(u))
    return (float(bc.flux(t, u + h)) - float(bc.flux(t, u - h))) / (2.0 * h)


def _step(u, x, t, dt, field, bc_left, bc_right, theta, dx):
    """One theta-scheme step from t to t + dt; returns the new values."""
    t_new = t + dt
    t_coef = t + theta * dt
    rows = _BoundaryRows(field, x, t_coef, bc_left, bc_right, dx)

    expl_w = (1.0 - theta) * dt
    impl_w = theta * dt

    def solve_with_source(source):
        rhs = u + expl_w * kernels.tridiag_apply(rows.lower, rows.diag, rows.upper, u)
        if source is not None:
            rhs = rhs + dt * source
        if rows.flux_left is not None and expl_w != 0.0:
            rhs[0] += expl_w * rows.flux_coef_left * float(rows.flux_left.flux(t, u[0]))

        lower_i = -impl_w * rows.lower
        diag_i = 1.0 - impl_w * rows.diag
        upper_i = -impl_w * rows.upper
        if bc_left.is_dirichlet or bc_left.kind is BCKind.FREE_STEFAN:
            diag_i[0] = 1.0
            upper_i[0] = 0.0
            rhs[0] = 0.0 if bc_left.kind is not BCKind.DIRICHLET_VALUE else bc_left.dirichlet_value(t_new)
        if bc_right.is_dirichlet or bc_right.kind is BCKind.FREE_STEFAN:
            diag_i[-1] = 1.0
            lower_i[-1] = 0.0
            rhs[-1] = 0.0 if bc_right.kind is not BCKind.DIRICHLET_VALUE else bc_right.dirichlet_value(t_new)

        if rows.flux_left is None:
            try:
                return kernels.tridiag_solve(lower_i, diag_i, upper_i, rhs)
            except ZeroDivisionError as exc:
                raise SolverError(f"tridiagonal solve failed at t={t_new:g}: {exc}") from None

        # Newton iteration on the boundary stencil: re-solve the full system
        # with the flux law linearized about the current boundary iterate.
        bc = rows.flux_left
        coef = rows.flux_coef_left
        v = float(u[0])
        prev_move = math.inf
        for _ in range(_NEWTON_MAX_ITER):
            g_v = float(bc.flux(t_new, v))
            gp_v = _flux_derivative(bc, t_new, v)
            diag_n = diag_i.copy()
            rhs_n = rhs.copy()
            diag_n[0] -= impl_w * coef * gp_v
            rhs_n[0] += impl_w * coef * (g_v - gp_v * v)
            try:
                candidate = kernels.tridiag_solve(lower_i, diag_n, upper_i, rhs_n)
            except ZeroDivisionError as exc:
                raise SolverError(f"tridiagonal solve failed at t={t_new:g}: {exc}") from None
            move = abs(float(candidate[0]) - v)
            if move <= 1e-12 * (1.0 + abs(v)):
                return candidate
            if move > prev_move:
                v = 0.5 * (v + float(candidate[0]))  # damped update
            else:
                v = float(candidate[0])
            prev_move = move
        raise SolverError(
            f"boundary flux Newton iteration did not converge at t={t_new:g} "
            f"(last update {move:g})"
        )

    if field.reaction is None:
        return solve_with_source(None)

    # Predictor with the explicit reaction rate, then one Picard correction.
    source = np.asarray(field.reaction(x, t_coef, u), dtype=float)
    predicted = solve_with_source(source)
    source = np.asarray(field.reaction(x, t_coef, 0.5 * (u + predicted)), dtype=float)
    return solve_with_source(source)


def advance(snapshot, field, bcs, dt, theta=0.5):
    """Advance one step; the grid must be uniform in the computational
    coordinate and the coefficients evaluable at the scheme's coefficient
    time (t + theta*dt)."""
    if dt <= 0:
        raise SolverError("time step must be positive")
    bc_left, bc_right = bcs
    x = snapshot.nodes
    dx = snapshot.spacing
    new_values = _step(snapshot.values, x, snapshot.t, dt, field, bc_left, bc_right, theta, dx)
    return Snapshot.from_values(snapshot.t + dt, x, new_values)


def validate_resolution(field, nodes_phys, dx, times, skip_origin=False):
    """Keep the grid Peclet number |b| dx / a below 2 on samples."""
    worst = 0.0
    where = None
    for t in np.atleast_1d(times):
        a = np.asarray(field.a(nodes_phys, float(t)), dtype=float)
        b = np.asarray(field.b(nodes_phys, float(t)), dtype=float)
        pe = np.abs(b) * dx / a
        k = int(np.argmax(pe))
        if pe[k] > worst:
            worst = float(pe[k])
            where = (float(nodes_phys[k]), float(t))
    if worst > _PECLET_LIMIT:
        raise ValidationError(
            f"grid Peclet number {worst:.3g} exceeds 2 at x={where[0]:g}, t={where[1]:g}; "
            "increase the spatial resolution"
        )
    return worst


def solve_trajectory(config):
    """Run a configured scenario and collect snapshots and boundary traces.

    Moving domains are immobilized onto [0, 1] first; snapshots are mapped
    back to physical coordinates.  Free-boundary scenarios belong to
    :func:`zerolab.stefan.solve_free_boundary`."""
    if config.is_free_boundary:
        raise ValidationError("free-boundary scenarios are solved by the stefan module")

    grid = config.grid
    steps = int(round(config.horizon / grid.dt))
    if steps < 1:
        raise ValidationError("horizon shorter than one time step")
    window = (0.0, config.horizon)

    base_field = config.field
    lo0, hi0 = config.domain.interval(0.0)
    if base_field.singularity is not None and lo0 <= base_field.singularity + 1e-12:
        # Radial family on a domain containing the origin: substitute the
        # even-symmetry limit at r = 0 and require a zero-slope condition.
        if config.bc_left.kind is not BCKind.NEUMANN:
            raise ValidationError(
                "a radial domain containing the origin needs a Neumann condition at r = 0"
            )
        base_field = transform.regularize_radial(
            base_field, 0.0, initial=config.initial, tol=config.tol.degenerate_tol
        )

    moving = not config.domain.is_fixed
    if moving:
        problem = transform.immobilize_domain(base_field, config.domain, window)
        work_field = problem.field
        bc_left = transform.transform_boundary(config.bc_left, config.domain)
        bc_right = transform.transform_boundary(config.bc_right, config.domain)
        y_nodes = np.linspace(0.0, 1.0, grid.nodes)
        phys0 = problem.forward(y_nodes, 0.0)
        u = config.initial_values(phys0)
        dx = y_nodes[1] - y_nodes[0]
        comp_nodes = y_nodes
    else:
        problem = None
        work_field = base_field
        bc_left, bc_right = config.bc_left, config.bc_right
        lo, hi = config.domain.interval(0.0)
        comp_nodes = np.linspace(lo, hi, grid.nodes)
        u = config.initial_values(comp_nodes)
        dx = comp_nodes[1] - comp_nodes[0]

    sample_times = np.linspace(0.0, config.horizon, 17)
    validate_resolution(work_field, comp_nodes, dx, sample_times)

    # Dirichlet data must be imposed exactly at t = 0 as well.
    for bc, idx in ((bc_left, 0), (bc_right, -1)):
        if bc.kind is BCKind.DIRICHLET_ZERO:
            u[idx] = 0.0
        elif bc.kind is BCKind.DIRICHLET_VALUE:
            u[idx] = bc.dirichlet_value(0.0)

    def physical_snapshot(t, values):
        if moving:
            nodes = problem.forward(comp_nodes, t)
            return Snapshot.from_values(t, nodes, values)
        return Snapshot.from_values(t, comp_nodes, values)

    trace_rows = []

    def record(t, values):
        if moving:
            lo_t, hi_t = config.domain.interval(t)
            dx_phys = (hi_t - lo_t) * dx
        else:
            lo_t, hi_t = comp_nodes[0], comp_nodes[-1]
            dx_phys = dx
        sl, sr = _one_sided_slopes(values, dx_phys)
        trace_rows.append(
            (t, values[0], values[-1], sl, sr, float(np.max(np.abs(values))), lo_t, hi_t)
        )

    snapshots = [physical_snapshot(0.0, u.copy())]
    record(0.0, u)

    t = 0.0
    for n in range(steps):
        if n < grid.smoothing_steps:
            half = 0.5 * grid.dt
            u = _step(u, comp_nodes, t, half, work_field, bc_left, bc_right, 1.0, dx)
            u = _step(u, comp_nodes, t + half, half, work_field, bc_left, bc_right, 1.0, dx)
        else:
            u = _step(u, comp_nodes, t, grid.dt, work_field, bc_left, bc_right, 0.5, dx)
        t = (n + 1) * grid.dt
        record(t, u)
        if (n + 1) % grid.output_every == 0 or n == steps - 1:
            snapshots.append(physical_snapshot(t, u.copy()))

    cols = [np.array([row[k] for row in trace_rows]) for k in range(8)]
    traj = Trajectory(
        snapshots=snapshots,
        trace=FineTrace(*cols),
        dt=grid.dt,
        nodes=grid.nodes,
        config=config,
        meta={"moving": moving, "theta": 0.5, "smoothing_steps": grid.smoothing_steps},
    )
    traj.check_times()
    if config.comparison_bound and not traj.sup_norm_within_bound():
        raise SolverError(
            "solution exceeded the declared a-priori bound 1 + sup|u0|"
        )
    return traj
