"""Theorem-level checkers and the difference constructions they examine.

The checkers consume a zero trace and moment classifications produced from
one trajectory and verify the zero count behaves as a discrete Lyapunov
functional: non-increasing after a short burn-in, strictly dropping within
a detection window after every degeneracy witness (flagged multiple zero,
curve merge, isolated boundary touch), with only finitely many isolated
touches.  The hypothesis checker probes the sign conditions that the
boundary traces of admissible solutions satisfy at their zero moments.

Two derived trajectories feed the same machinery: the period-shift
difference u(x, t+T) - u(x, t) of a time-periodic problem, and the
reflection difference u(x0+x, t) - u(x0-x, t) of a free-boundary run on
the common interval of the shifted and mirrored domains.

Every checker is deterministic given a trajectory and parameters; reports
serialize to structured text and carry the full violation list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.interpolate import CubicSpline

from . import zeros as zeros_mod
from .errors import SolverError, ValidationError
from .model import Snapshot
from .solver import FineTrace, Trajectory

_DEGENERATE_RATIO = 1e-12


@dataclass(frozen=True)
class Violation:
    t: float
    expected: str
    observed: str

    def to_text(self):
        return f"t={self.t:.9g}: expected {self.expected}; observed {self.observed}"


@dataclass
class CheckReport:
    name: str
    passed: bool
    violations: list
    params: dict = dc_field(default_factory=dict)
    details: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if self.passed != (len(self.violations) == 0):
            raise ValidationError("report consistency: fail iff violations non-empty")

    def to_text(self):
        lines = [f"check {self.name}: {'PASS' if self.passed else 'FAIL'}"]
        for key in sorted(self.params):
            lines.append(f"  param {key} = {self.params[key]}")
        for key in sorted(self.details):
            lines.append(f"  detail {key} = {self.details[key]}")
        for v in self.violations:
            lines.append("  violation " + v.to_text())
        return "\n".join(lines)


def _report(name, violations, params=None, details=None):
    return CheckReport(
        name=name,
        passed=not violations,
        violations=list(violations),
        params=params or {},
        details=details or {},
    )


# ---------------------------------------------------------------------------
# core checkers
# ---------------------------------------------------------------------------


def check_monotone(zero_trace, burn_in=0.0):
    """Zero count non-increasing for all times past the burn-in."""
    times = zero_trace.times
    counts = zero_trace.counts
    sel = times >= burn_in - 1e-15
    t_sel = times[sel]
    c_sel = counts[sel]
    violations = [
        Violation(
            float(t_sel[k + 1]),
            "zero count non-increasing",
            f"count rose {c_sel[k]} -> {c_sel[k + 1]} over [{t_sel[k]:.9g}, {t_sel[k + 1]:.9g}]",
        )
        for k in range(len(t_sel) - 1)
        if c_sel[k + 1] > c_sel[k]
    ]
    return _report(
        "zero-count-monotone",
        violations,
        params={"burn_in": float(burn_in)},
        details={"initial_count": int(c_sel[0]) if c_sel.size else 0,
                 "final_count": int(c_sel[-1]) if c_sel.size else 0},
    )


def _episodes(times, gap):
    """Group sorted times into episodes separated by more than ``gap``."""
    if not times:
        return []
    times = sorted(times)
    out = [[times[0], times[0]]]
    for t in times[1:]:
        if t - out[-1][1] <= gap:
            out[-1][1] = t
        else:
            out.append([t, t])
    return [(a, b) for a, b in out]


def _drop_covers(zero_trace, t0, t1):
    return any(d.t_after >= t0 and d.t_before <= t1 for d in zero_trace.drop_events)


def check_strict_drop(zero_trace, classifications, drop_window, burn_in=0.0):
    """Every degeneracy witness is followed by a strict drop.

    (i) episodes of flagged multiple zeros (boundary flags occurring inside
    a long boundary zero-run are reported but not required to drop: on such
    runs the degeneracy belongs to the run, and the touch checks in (ii)
    carry the strictness), and curve merges; (ii) every isolated boundary
    touch (NZN/ZZN moment); (iii) the number of such touches does not
    exceed the zero count at burn-in.
    """
    dt_out = zero_trace.params.get("dt_out", 0.0)
    violations = []
    details = {}

    # (i) degenerate zeros and merges
    witness_times = []
    informational = 0
    for inv in zero_trace.inventories:
        if inv.t < burn_in:
            continue
        for z in inv.multiples():
            if z.at_boundary and _inside_long_boundary_run(inv.t, z, classifications):
                informational += 1
                continue
            witness_times.append(inv.t)
            break
    for t0, t1 in _episodes(witness_times, drop_window):
        if not _drop_covers(zero_trace, t0 - dt_out, t1 + drop_window):
            violations.append(
                Violation(
                    t0,
                    f"strict drop within {drop_window:g} of a degenerate zero",
                    f"no drop event intersects [{t0:.9g}, {t1 + drop_window:.9g}]",
                )
            )
    for ev in zero_trace.merge_events:
        if ev.t_before < burn_in:
            continue
        if not _drop_covers(zero_trace, ev.t_before - dt_out, ev.t_after + drop_window):
            violations.append(
                Violation(
                    ev.t_before,
                    "strict drop at a curve merge",
                    f"merge at x={ev.location:.9g} without a drop",
                )
            )

    # (ii) isolated boundary touches
    touches = []
    for mc in classifications:
        touches.extend(t for t in mc.isolated_touch_moments() if t >= burn_in)
    for t in touches:
        if not _drop_covers(zero_trace, t - dt_out, t + drop_window):
            violations.append(
                Violation(
                    t,
                    f"strict drop within {drop_window:g} of an isolated boundary touch",
                    "no drop event in the window",
                )
            )

    # (iii) finitely many touches, bounded by the burn-in count
    z_start = zero_trace.count_at(burn_in)
    if len(touches) > z_start:
        violations.append(
            Violation(
                burn_in,
                f"at most {z_start} isolated touches (zero count at burn-in)",
                f"found {len(touches)}",
            )
        )

    details["touch_moments"] = len(touches)
    details["degenerate_episodes"] = len(_episodes(witness_times, drop_window))
    details["boundary_flags_on_zero_runs"] = informational
    details["drop_events"] = len(zero_trace.drop_events)
    return _report(
        "strict-drop",
        violations,
        params={"drop_window": float(drop_window), "burn_in": float(burn_in)},
        details=details,
    )


def _inside_long_boundary_run(t, zero_point, classifications):
    for mc in classifications:
        for run in mc.runs:
            if run.samples > 1 and run.t_start - 1e-12 <= t <= run.t_end + 1e-12:
                return True
    return False


def _definite_sign(value, band):
    if abs(value) <= band:
        return 0
    return 1 if value > 0 else -1


def _interior_sign(snap, side, margin, tol):
    """Sign of the profile between the boundary and its second zero.

    Zeros within ``margin`` of the boundary are treated as part of the
    touch itself (a zero arriving at or leaving through the endpoint); the
    probe point is the midpoint between the boundary and the nearest zero
    beyond the margin (or the opposite endpoint when there is none)."""
    x, v = snap.nodes, snap.values
    scale = max(snap.scale, 1e-300)
    boundary = x[0] if side == 1 else x[-1]
    far_end = x[-1] if side == 1 else x[0]
    near = np.abs(v) <= 1e-8 * scale
    candidates = [float(x[i]) for i in np.nonzero(near)[0]]
    crossing = (~near[:-1]) & (~near[1:]) & (v[:-1] * v[1:] < 0.0)
    candidates.extend(0.5 * (float(x[i]) + float(x[i + 1])) for i in np.nonzero(crossing)[0])
    candidates = [z for z in candidates if abs(z - boundary) > margin]
    second = min(candidates, key=lambda z: abs(z - boundary)) if candidates else far_end
    probe = 0.5 * (boundary + second)
    j = int(np.argmin(np.abs(x - probe)))
    return _definite_sign(v[j], tol * scale), float(v[j])


def check_hypotheses(traj, classifications, window=None, tol=1e-4):
    """Probe the admissibility conditions on the boundary traces.

    Sub-checks per side: ``front_slope_continuity`` (the endpoint curve has
    a continuous slope across each boundary zero-run), ``arrival_slope``
    (when the trace reaches zero from a definite sign, the boundary slope
    points the right way, so the zero arrives from the interior), and
    ``post_touch_sign`` (just after a zero moment the boundary value cannot
    oppose the sign of the interior profile between the endpoint and its
    second zero).  The alternative boundary-product form of the last
    condition is evaluated as well and reported in the details without
    affecting the verdict.
    """
    trace = traj.trace
    if window is None:
        window = 10 * trace.dt
    dt = trace.dt
    violations = []
    h3_star_ok = True
    h3_star_checked = 0
    snap_times = traj.times
    dt_snap = float(snap_times[1] - snap_times[0]) if snap_times.size > 1 else dt

    for mc in classifications:
        side = mc.side
        w = trace.w1 if side == 1 else trace.w2
        ux = trace.ux1 if side == 1 else trace.ux2
        xi = trace.xi1 if side == 1 else trace.xi2
        sign_factor = -1.0 if side == 1 else 1.0  # (-1)^side
        widths = trace.xi2 - trace.xi1

        # front slope continuity across zero-runs
        for run in mc.runs:
            if run.samples < 5:
                continue
            sel = (trace.t >= run.t_start) & (trace.t <= run.t_end)
            xs = xi[sel]
            if xs.size >= 5:
                slopes = np.diff(xs) / dt
                jumps = np.abs(np.diff(slopes))
                scale = max(np.max(np.abs(slopes)), 1.0)
                if np.any(jumps > 0.5 * scale + 1e-9):
                    violations.append(
                        Violation(
                            run.t_start,
                            f"side {side} endpoint slope continuous across the zero-run",
                            f"max slope jump {float(np.max(jumps)):.3g}",
                        )
                    )

        # Arrival slope condition at moments reached from a definite sign.
        # At the moment itself the slope vanishes analytically, so only a
        # slope decisively above the discretization noise of the one-sided
        # stencil counts as a sign; the deadband uses sqrt(tol).
        events = [
            (run.t_start, run.start_index)
            for run in mc.runs
            if run.label_start.startswith("N")
        ]
        events.extend((c.t, c.index) for c in mc.crossings)
        slope_band_factor = math.sqrt(tol)
        for t_s, idx in events:
            k = int(np.floor(idx))
            if k < 1:
                continue
            prior = 0
            for back in range(1, 4):
                if idx - back < 0:
                    break
                kk = int(math.floor(idx)) - back + 1 if idx > k else k - back
                kk = max(min(kk, len(w) - 1), 0)
                prior = _definite_sign(w[kk], tol * max(trace.scale[kk], 1e-300))
                if prior:
                    break
            if prior == 0:
                continue
            frac = idx - k
            if frac > 0 and k + 1 < len(ux):
                ux_s = (1.0 - frac) * ux[k] + frac * ux[k + 1]
            else:
                ux_s = ux[k]
            k_s = min(int(round(idx)), len(trace.t) - 1)
            band = slope_band_factor * max(trace.scale[k_s], 1e-300) / max(widths[k_s], 1e-300)
            slope_sign = _definite_sign(sign_factor * ux_s, band)
            if slope_sign != 0 and slope_sign != prior:
                violations.append(
                    Violation(
                        t_s,
                        f"side {side}: boundary slope oriented toward the interior sign "
                        f"({'>=' if prior > 0 else '<='} 0)",
                        f"(-1)^side * u_x = {sign_factor * ux_s:.3g} with prior sign {prior}",
                    )
                )

        # Post-touch sign condition against the interior profile.
        exit_events = [run.t_end for run in mc.runs if run.label_end.endswith("N")]
        exit_events.extend(c.t for c in mc.crossings)
        for t_s in exit_events:
            j = int(np.argmin(np.abs(snap_times - t_s)))
            snap = traj.snapshots[j]
            width_s = float(snap.nodes[-1] - snap.nodes[0])
            margin = min(
                3.0 * math.sqrt(max(dt_snap, 0.0)) + 4.0 * snap.spacing, 0.45 * width_s
            )
            u_sign, u_probe = _interior_sign(snap, side, margin, tol)
            if u_sign == 0:
                continue
            sel = (trace.t > t_s) & (trace.t <= t_s + window)
            for k in np.nonzero(sel)[0]:
                w_sign = _definite_sign(w[k], tol * max(trace.scale[k], 1e-300))
                if w_sign != 0 and w_sign * u_sign < 0:
                    violations.append(
                        Violation(
                            float(trace.t[k]),
                            f"side {side}: post-touch boundary sign compatible with the "
                            "interior profile",
                            f"w={w[k]:.3g} vs interior {u_probe:.3g}",
                        )
                    )
                    break
                # alternative (boundary-product) form, reported only
                band = slope_band_factor * max(trace.scale[k], 1e-300) / max(widths[k], 1e-300)
                ux_sign = _definite_sign(ux[k], band)
                h3_star_checked += 1
                if w_sign != 0 and ux_sign != 0 and sign_factor * w_sign * ux_sign > 0:
                    h3_star_ok = False

    return _report(
        "boundary-hypotheses",
        violations,
        params={"window": float(window), "tol": float(tol)},
        details={
            "boundary_product_holds": h3_star_ok,
            "boundary_product_samples": h3_star_checked,
        },
    )


# ---------------------------------------------------------------------------
# derived trajectories
# ---------------------------------------------------------------------------


def build_shift_difference(traj, offset, period):
    """Difference of the trajectory with its own time shift by one period.

    eta(x, t) = u(x, t + period) - u(x, t) for t >= offset, sampled on the
    common (fixed) grid.  An exactly periodic trajectory gives eta == 0 and
    is flagged degenerate in the metadata (excluded from zero counting).
    """
    times = traj.times
    if times.size < 3:
        raise SolverError("horizon too short for a shift difference")
    dt_snap = float(times[1] - times[0])
    if np.max(np.abs(np.diff(times) - dt_snap)) > 1e-9 * max(dt_snap, 1.0):
        raise ValidationError("shift difference needs uniformly sampled snapshots")
    k = int(round(period / dt_snap))
    if k < 1 or abs(k * dt_snap - period) > 1e-9 * max(period, 1.0):
        raise ValidationError(
            f"period {period:g} is not a multiple of the snapshot cadence {dt_snap:g}"
        )
    j0 = int(np.searchsorted(times, offset - 1e-12))
    if j0 + k >= times.size:
        raise SolverError("horizon too short: no full period beyond the offset")

    base = traj.snapshots
    nodes = base[0].nodes
    snapshots = []
    for j in range(j0, times.size - k):
        if base[j].nodes.shape != nodes.shape or np.any(base[j].nodes != nodes):
            raise ValidationError("shift difference needs a fixed grid")
        eta = base[j + k].values - base[j].values
        snapshots.append(Snapshot.from_values(base[j].t, nodes, eta))

    u_scale = max(s.scale for s in base)
    eta_scale = max(s.scale for s in snapshots)
    degenerate = eta_scale <= _DEGENERATE_RATIO * max(u_scale, 1e-300)

    ft = traj.trace
    k_int = int(round(period / traj.dt))
    sel = (ft.t >= times[j0] - 1e-12) & (ft.t <= snapshots[-1].t + 1e-12)
    idx = np.nonzero(sel)[0]
    idx = idx[idx + k_int < ft.t.size]
    snap_t = np.array([s.t for s in snapshots])
    snap_scale = np.array([s.scale for s in snapshots])
    trace = FineTrace(
        t=ft.t[idx],
        w1=ft.w1[idx + k_int] - ft.w1[idx],
        w2=ft.w2[idx + k_int] - ft.w2[idx],
        ux1=ft.ux1[idx + k_int] - ft.ux1[idx],
        ux2=ft.ux2[idx + k_int] - ft.ux2[idx],
        scale=np.interp(ft.t[idx], snap_t, snap_scale),
        xi1=ft.xi1[idx],
        xi2=ft.xi2[idx],
    )
    return Trajectory(
        snapshots=snapshots,
        trace=trace,
        dt=traj.dt,
        nodes=traj.nodes,
        config=traj.config,
        meta={
            "kind": "shift-difference",
            "period": float(period),
            "offset": float(offset),
            "degenerate": bool(degenerate),
        },
    )


def build_reflection_difference(fb_traj, x0, nodes=None):
    """Difference of a free-boundary solution with its mirror image.

    eta(x, t) = u(x0 + x, t) - u(x0 - x, t) on the common moving interval
    [max(g - x0, x0 - h), min(h - x0, x0 - g)], which is symmetric about 0,
    so eta is odd with an exact zero at x = 0.  Boundary traces of eta and
    the mirrored front positions are recorded for moment classification and
    the front-ordering checks.
    """
    states = fb_traj.states
    if not states:
        raise SolverError("empty free-boundary trajectory")
    m = nodes or states[0].snapshot.nodes.size
    if m % 2 == 0:
        m += 1  # odd node count keeps x = 0 on the grid

    snapshots = []
    rows = []
    fronts = []
    for state in states:
        g1, h1 = state.g - x0, state.h - x0
        g2, h2 = x0 - state.h, x0 - state.g
        lo, hi = max(g1, g2), min(h1, h2)
        if lo >= hi:
            raise SolverError(
                f"common interval empty at t={state.t:g}: reflection center {x0:g} "
                "is outside the overlap"
            )
        xs = np.linspace(lo, hi, m)
        spline = CubicSpline(state.snapshot.nodes, state.snapshot.values)
        eta = spline(x0 + xs) - spline(x0 - xs)
        eta[(m - 1) // 2] = 0.0  # exact by oddness
        snap = Snapshot.from_values(state.t, xs, eta)
        snapshots.append(snap)
        dx = snap.spacing
        sl = (-3 * eta[0] + 4 * eta[1] - eta[2]) / (2 * dx)
        sr = (3 * eta[-1] - 4 * eta[-2] + eta[-3]) / (2 * dx)
        rows.append(
            (state.t, eta[0], eta[-1], sl, sr, float(np.max(np.abs(eta))), lo, hi)
        )
        fronts.append((g1, g2, h1, h2))

    u_scale = max(s.snapshot.scale for s in states)
    eta_scale = max(s.scale for s in snapshots)
    cols = [np.array([r[k] for r in rows]) for k in range(8)]
    fronts = np.array(fronts)
    return Trajectory(
        snapshots=snapshots,
        trace=FineTrace(*cols),
        dt=float(rows[1][0] - rows[0][0]) if len(rows) > 1 else fb_traj.dt,
        nodes=m,
        config=fb_traj.config,
        meta={
            "kind": "reflection-difference",
            "center": float(x0),
            "degenerate": bool(eta_scale <= _DEGENERATE_RATIO * max(u_scale, 1e-300)),
            "g1": fronts[:, 0],
            "g2": fronts[:, 1],
            "h1": fronts[:, 2],
            "h2": fronts[:, 3],
        },
    )


# ---------------------------------------------------------------------------
# analysis pipeline
# ---------------------------------------------------------------------------


@dataclass
class AnalysisBundle:
    zero_trace: object
    classifications: tuple
    reports: dict = dc_field(default_factory=dict)

    @property
    def passed(self):
        return all(r.passed for r in self.reports.values())

    def emitted_labels(self):
        out = set()
        for mc in self.classifications:
            out |= mc.emitted_labels()
        return out


def analyze_trajectory(traj, tol=None, run_checks=True, restrict=None):
    """Zero trace + per-side moment classification (+ standard checks).

    ``restrict`` optionally limits zero counting to a sub-interval [lo, hi]
    of each snapshot (used for truncated half-line runs)."""
    cfg = traj.config
    tol = tol or (cfg.tol if cfg is not None else None)
    if tol is None:
        from .model import Tolerances

        tol = Tolerances()
    snaps = traj.snapshots
    if restrict is not None:
        snaps = [s.restrict(*restrict) for s in snaps]
    diffusion = 1.0
    if cfg is not None:
        lo, hi = snaps[0].nodes[0], snaps[0].nodes[-1]
        try:
            diffusion = float(
                np.max(np.asarray(cfg.field.a(np.linspace(lo, hi, 33), 0.0), dtype=float))
            )
        except Exception:
            diffusion = 1.0
    zt = zeros_mod.build_zero_trace(
        snaps, tol.zero_tol, tol.degenerate_tol, diffusion_scale=diffusion
    )
    ft = traj.trace
    classifications = (
        zeros_mod.classify_moments(ft.t, ft.w1, ft.scale, tol.zero_tol, side=1),
        zeros_mod.classify_moments(ft.t, ft.w2, ft.scale, tol.zero_tol, side=2),
    )
    bundle = AnalysisBundle(zero_trace=zt, classifications=classifications)
    if run_checks:
        burn_in = tol.burn_in_steps * traj.dt
        drop_window = tol.drop_window * max(zt.params.get("dt_out", traj.dt), traj.dt)
        bundle.reports["monotone"] = check_monotone(zt, burn_in)
        bundle.reports["strict_drop"] = check_strict_drop(
            zt, classifications, drop_window, burn_in
        )
        bundle.reports["hypotheses"] = check_hypotheses(traj, classifications)
    return bundle
