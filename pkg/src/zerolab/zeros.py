"""Zero counting, zero-curve tracing, and boundary-moment classification.

Zeros are counted on the closed interval: boundary nodes participate, so a
homogeneous Dirichlet side always contributes exactly one zero.  Nodes
within ``zero_tol`` (relative to the profile sup-norm) of zero form
clusters that count as ONE zero each; strict sign changes between adjacent
non-near-zero nodes count one simple zero at the interpolated root.  A zero
is flagged ``multiple`` (degenerate) when the derivative estimate is small
or the flanking signs agree; degenerate zeros are the strict-drop witnesses
the checkers look for.

Boundary traces w(t) = u(endpoint, t) are classified into Z-moments
(|w| within tolerance of zero, relative to the profile scale at that time)
and N-moments, organized as maximal runs.  Each Z-moment gets a three-letter
label: the middle letter is Z and the outer letters describe the left/right
temporal neighborhoods (N = clean nonzero flank, Z = run interior, X =
oscillatory flank with many sign alternations).  Sign changes of w between
samples insert interpolated point moments: the trace is continuous, so a
crossing implies a zero between samples even when no sample lands inside
the tolerance band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import AllZeroProfileError, ValidationError

SIMPLE = "simple"
MULTIPLE = "multiple"


@dataclass(frozen=True)
class ZeroPoint:
    location: float
    kind: str
    at_boundary: bool = False


@dataclass(frozen=True)
class ZeroInventory:
    """All zeros of one snapshot, sorted by location."""

    t: float
    zeros: tuple

    @property
    def count(self):
        return len(self.zeros)

    @property
    def locations(self):
        return np.array([z.location for z in self.zeros])

    def multiples(self):
        return [z for z in self.zeros if z.kind == MULTIPLE]

    def check(self, interval=None):
        locs = self.locations
        if locs.size > 1 and np.any(np.diff(locs) < 0):
            raise ValidationError("zero inventory must be sorted by location")
        if interval is not None:
            lo, hi = interval
            if locs.size and (locs[0] < lo - 1e-9 or locs[-1] > hi + 1e-9):
                raise ValidationError("zero located outside the domain interval")
        return True


def _near_zero_runs(mask):
    runs = []
    start = None
    for i, flag in enumerate(mask):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(mask) - 1))
    return runs


def count_zeros(snapshot, zero_tol=1e-8, degenerate_tol=1e-4):
    """Count zeros of one profile on its closed interval.

    Raises :class:`AllZeroProfileError` when every node is inside the
    near-zero band (zero counting is undefined for the trivial profile).
    """
    u = snapshot.values
    x = snapshot.nodes
    ux = snapshot.derivative
    scale = float(np.max(np.abs(u)))
    if scale == 0.0:
        raise AllZeroProfileError("profile is identically zero")
    near = np.abs(u) <= zero_tol * scale
    if bool(near.all()):
        raise AllZeroProfileError("profile is identically zero within tolerance")

    dx = snapshot.spacing
    slope_band = degenerate_tol * scale / dx
    last = len(u) - 1
    zeros = []

    for i0, i1 in _near_zero_runs(near):
        at_boundary = i0 == 0 or i1 == last
        left = u[i0 - 1] if i0 > 0 else None
        right = u[i1 + 1] if i1 < last else None
        min_slope = float(np.min(np.abs(ux[i0 : i1 + 1])))
        degenerate = min_slope <= slope_band
        if left is not None and right is not None and np.sign(left) == np.sign(right):
            degenerate = True
        location = 0.5 * (x[i0] + x[i1])
        zeros.append(ZeroPoint(float(location), MULTIPLE if degenerate else SIMPLE, at_boundary))

    crossing = (~near[:-1]) & (~near[1:]) & (u[:-1] * u[1:] < 0.0)
    for i in np.nonzero(crossing)[0]:
        root = x[i] + dx * u[i] / (u[i] - u[i + 1])
        zeros.append(ZeroPoint(float(root), SIMPLE, False))

    zeros.sort(key=lambda z: z.location)
    return ZeroInventory(float(snapshot.t), tuple(zeros))


# ---------------------------------------------------------------------------
# zero-curve tracing
# ---------------------------------------------------------------------------


@dataclass
class ZeroCurve:
    index: int
    times: list = dc_field(default_factory=list)
    locations: list = dc_field(default_factory=list)
    end_reason: str = "open"

    @property
    def last_location(self):
        return self.locations[-1]


@dataclass(frozen=True)
class DropEvent:
    t_before: float
    t_after: float
    count_before: int
    count_after: int
    witnesses: tuple  # (location, reason) pairs for the vanished curves
    kind: str  # merge | boundary_exit | mixed | vanish

    def check(self):
        if not self.count_before > self.count_after:
            raise ValidationError("drop event must decrease the zero count")
        return True


@dataclass(frozen=True)
class MergeEvent:
    t_before: float
    t_after: float
    location: float
    curve_indices: tuple


@dataclass(frozen=True)
class BoundaryExitEvent:
    t_before: float
    t_after: float
    location: float
    side: int
    curve_index: int


@dataclass
class ZeroTrace:
    """Per-time inventories, matched zero curves, and discrete events."""

    inventories: list
    curves: list
    drop_events: list
    merge_events: list
    exit_events: list
    increase_events: list
    params: dict

    @property
    def times(self):
        return np.array([inv.t for inv in self.inventories])

    @property
    def counts(self):
        return np.array([inv.count for inv in self.inventories])

    def count_at(self, t):
        k = int(np.argmin(np.abs(self.times - t)))
        return int(self.inventories[k].count)

    def check_curve_order(self):
        """Traced curves never cross: at every time the active curves are
        sorted by location in the order of their indices."""
        by_time = {}
        for curve in self.curves:
            for t, xloc in zip(curve.times, curve.locations):
                by_time.setdefault(t, []).append((curve.index, xloc))
        for t, pairs in by_time.items():
            pairs.sort()
            locs = [xloc for _, xloc in pairs]
            if any(b < a - 1e-12 for a, b in zip(locs, locs[1:])):
                raise ValidationError(f"zero curves cross at t={t:g}")
        return True


def _align_zeros(old, new, match_radius, gap_cost):
    """Order-preserving minimal-cost matching between two sorted location
    lists; returns (pairs, unmatched_old, unmatched_new)."""
    m, n = len(old), len(new)
    inf = math.inf
    cost = [[inf] * (n + 1) for _ in range(m + 1)]
    move = [[None] * (n + 1) for _ in range(m + 1)]
    cost[0][0] = 0.0
    for i in range(1, m + 1):
        cost[i][0] = i * gap_cost
        move[i][0] = "up"
    for j in range(1, n + 1):
        cost[0][j] = j * gap_cost
        move[0][j] = "left"
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            d = abs(old[i - 1] - new[j - 1])
            best = cost[i - 1][j] + gap_cost
            mv = "up"
            if cost[i][j - 1] + gap_cost < best:
                best = cost[i][j - 1] + gap_cost
                mv = "left"
            if d <= match_radius and cost[i - 1][j - 1] + d < best:
                best = cost[i - 1][j - 1] + d
                mv = "diag"
            cost[i][j] = best
            move[i][j] = mv
    pairs = []
    un_old = []
    un_new = []
    i, j = m, n
    while i > 0 or j > 0:
        mv = move[i][j]
        if mv == "diag":
            pairs.append((i - 1, j - 1))
            i -= 1
            j -= 1
        elif mv == "up":
            un_old.append(i - 1)
            i -= 1
        else:
            un_new.append(j - 1)
            j -= 1
    pairs.reverse()
    un_old.reverse()
    un_new.reverse()
    return pairs, un_old, un_new


def trace_zero_curves(inventories, match_radius=None, event_radius=None, diffusion_scale=1.0):
    """Match per-time zero inventories into curves and detect drop events.

    The default event radius accounts for the square-root-in-time speed of
    merging/exiting zeros of parabolic solutions: within one output interval
    a vanishing pair closes a gap of order sqrt(diffusivity * dt)."""
    if len(inventories) < 2:
        raise ValidationError("curve tracing needs at least two inventories")
    times = np.array([inv.t for inv in inventories])
    if np.any(np.diff(times) <= 0):
        raise ValidationError("inventories must be strictly increasing in time")
    dt_out = float(np.median(np.diff(times)))
    spans = [
        (inv.locations[0], inv.locations[-1]) if inv.count else (np.nan, np.nan)
        for inv in inventories
    ]
    widths = [hi - lo for lo, hi in spans if not np.isnan(lo)]
    width = max(widths) if widths else 1.0
    if event_radius is None:
        event_radius = 3.0 * math.sqrt(max(diffusion_scale, 1e-300) * dt_out) + 0.02 * width
    if match_radius is None:
        match_radius = max(2.0 * event_radius, 0.05 * width)

    curves = []
    drop_events = []
    merge_events = []
    exit_events = []
    increase_events = []

    active = []
    for loc in inventories[0].locations:
        curve = ZeroCurve(index=len(curves))
        curve.times.append(float(times[0]))
        curve.locations.append(float(loc))
        curves.append(curve)
        active.append(curve)

    for k in range(1, len(inventories)):
        t0, t1 = float(times[k - 1]), float(times[k])
        old_locs = [c.last_location for c in active]
        new_locs = list(inventories[k].locations)
        pairs, un_old, un_new = _align_zeros(old_locs, new_locs, match_radius, event_radius)

        closed = []
        for i in un_old:
            curve = active[i]
            curve.end_reason = "vanish"
            closed.append((i, curve))

        # Pair adjacent vanished curves into merges; attribute the rest to
        # boundary exits when they die near an endpoint of the domain.
        used = set()
        witnesses = []
        idxs = [i for i, _ in closed]
        for a, b in zip(idxs, idxs[1:]):
            if a in used or b in used:
                continue
            if b == a + 1:
                ca, cb = active[a], active[b]
                if abs(ca.last_location - cb.last_location) <= 2.0 * event_radius:
                    midpoint = 0.5 * (ca.last_location + cb.last_location)
                    ca.end_reason = cb.end_reason = "merge"
                    merge_events.append(
                        MergeEvent(t0, t1, float(midpoint), (ca.index, cb.index))
                    )
                    witnesses.append((float(midpoint), "merge"))
                    used.update((a, b))
        lo0, hi0 = spans[k - 1]
        for i, curve in closed:
            if i in used:
                continue
            loc = curve.last_location
            side = 0
            if not np.isnan(lo0):
                if abs(loc - lo0) <= event_radius:
                    side = 1
                elif abs(loc - hi0) <= event_radius:
                    side = 2
            if side:
                curve.end_reason = "boundary_exit"
                exit_events.append(BoundaryExitEvent(t0, t1, float(loc), side, curve.index))
                witnesses.append((float(loc), "boundary_exit"))
            else:
                witnesses.append((float(loc), "vanish"))

        next_active = [None] * len(new_locs)
        for i, j in pairs:
            curve = active[i]
            curve.times.append(t1)
            curve.locations.append(float(new_locs[j]))
            next_active[j] = curve
        for j in un_new:
            curve = ZeroCurve(index=len(curves))
            curve.times.append(t1)
            curve.locations.append(float(new_locs[j]))
            curves.append(curve)
            next_active[j] = curve
        active = [c for c in next_active if c is not None]

        n_before, n_after = len(old_locs), len(new_locs)
        if n_after < n_before:
            event = DropEvent(
                t0,
                t1,
                n_before,
                n_after,
                tuple(witnesses),
                _drop_kind(witnesses),
            )
            event.check()
            drop_events.append(event)
        elif n_after > n_before:
            increase_events.append((t0, t1, n_before, n_after))

    trace = ZeroTrace(
        inventories=list(inventories),
        curves=curves,
        drop_events=drop_events,
        merge_events=merge_events,
        exit_events=exit_events,
        increase_events=increase_events,
        params={
            "match_radius": float(match_radius),
            "event_radius": float(event_radius),
            "dt_out": dt_out,
        },
    )
    trace.check_curve_order()
    return trace


def _drop_kind(witnesses):
    reasons = {reason for _, reason in witnesses}
    if reasons == {"merge"}:
        return "merge"
    if reasons == {"boundary_exit"}:
        return "boundary_exit"
    if len(reasons) > 1:
        return "mixed"
    return "vanish"


def build_zero_trace(snapshots, zero_tol=1e-8, degenerate_tol=1e-4, **kwargs):
    """Count zeros on each snapshot and trace the curves."""
    inventories = [count_zeros(s, zero_tol, degenerate_tol) for s in snapshots]
    if "diffusion_scale" not in kwargs:
        kwargs["diffusion_scale"] = 1.0
    return trace_zero_curves(inventories, **kwargs)


# ---------------------------------------------------------------------------
# boundary-moment classification
# ---------------------------------------------------------------------------

_PDE_LABELS = frozenset({"N", "NZN", "NZZ", "ZZN", "ZZZ"})


@dataclass(frozen=True)
class ZeroRun:
    start_index: int
    end_index: int
    t_start: float
    t_end: float
    label_start: str
    label_end: str

    @property
    def samples(self):
        return self.end_index - self.start_index + 1

    @property
    def has_interior(self):
        return self.samples > 2 or (
            self.samples == 2 and (self.label_start == "ZZZ" or self.label_end == "ZZZ")
        )


@dataclass(frozen=True)
class CrossingMoment:
    """Interpolated zero of the continuous trace between two samples."""

    t: float
    label: str
    index: float  # fractional sample index


@dataclass
class MomentClassification:
    side: int
    runs: list
    crossings: list
    drop_forcing_intervals: list  # (n-run start, z start, z end, n-run end)
    params: dict
    has_n_moments: bool

    def emitted_labels(self):
        labels = set()
        if self.has_n_moments:
            labels.add("N")
        for run in self.runs:
            labels.add(run.label_start)
            labels.add(run.label_end)
            if run.samples > 2:
                labels.add("ZZZ")
        labels.update(c.label for c in self.crossings)
        return labels

    def pde_labels_only(self):
        return self.emitted_labels() <= _PDE_LABELS

    def isolated_touch_moments(self):
        """Times of NZN and ZZN moments (the ones that force a strict drop)."""
        out = []
        for run in self.runs:
            if run.samples == 1 and run.label_start == "NZN":
                out.append(run.t_start)
            elif run.label_end == "ZZN":
                out.append(run.t_end)
        out.extend(c.t for c in self.crossings if c.label == "NZN")
        return sorted(out)

    def max_run_samples(self):
        return max((run.samples for run in self.runs), default=0)

    def check(self):
        spans = [(r.start_index, r.end_index) for r in self.runs]
        if spans != sorted(spans):
            raise ValidationError("Z-runs must be sorted")
        for (a0, a1), (b0, b1) in zip(spans, spans[1:]):
            if b0 <= a1:
                raise ValidationError("Z-runs must be disjoint")
        for r, s, r1, s1 in self.drop_forcing_intervals:
            if not (r < s <= r1 < s1):
                raise ValidationError("drop-forcing interval is not ordered")
        return True


def _flank_context(states, alternation_min):
    """N for a clean nonzero flank, X for an oscillatory one, Z at a trace
    edge (no flank data)."""
    if len(states) == 0:
        return "Z"
    transitions = int(np.sum(states[:-1] != states[1:]))
    touches_zero = bool(np.any(states == 0))
    if transitions == 0 and not touches_zero:
        return "N"
    if transitions >= alternation_min:
        return "X"
    return "N"


def classify_moments(times, values, scales=None, zero_tol=1e-8, window=8, alternation_min=3, side=1):
    """Label the Z-moments of a sampled boundary trace.

    ``scales`` gives the profile sup-norm at each sample so the near-zero
    band tracks the solution's size over time; with ``None`` the global
    trace maximum is used.  ``window`` is the flank length W (>= 3 samples)
    and ``alternation_min`` the X-detection threshold (>= 2).
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if window < 3:
        raise ValidationError("classification window must span at least 3 samples")
    if alternation_min < 2:
        raise ValidationError("alternation threshold must be at least 2")
    if times.size < 2 * window + 1:
        raise ValidationError(
            f"trace too short: need at least {2 * window + 1} samples, got {times.size}"
        )
    if scales is None:
        scales = np.full(times.shape, float(np.max(np.abs(values))))
    else:
        scales = np.asarray(scales, dtype=float)

    with np.errstate(invalid="ignore"):
        z_mask = np.abs(values) <= zero_tol * scales
    z_mask = z_mask | (scales == 0.0)
    states = np.where(z_mask, 0, np.sign(values)).astype(int)

    last = times.size - 1
    runs = []
    for p, q in _near_zero_runs(z_mask):
        c_left = "Z" if p == 0 else _flank_context(states[max(0, p - window) : p], alternation_min)
        c_right = "Z" if q == last else _flank_context(states[q + 1 : q + 1 + window], alternation_min)
        if p == q:
            label = c_left + "Z" + c_right
            runs.append(ZeroRun(p, q, float(times[p]), float(times[q]), label, label))
        else:
            runs.append(
                ZeroRun(
                    p,
                    q,
                    float(times[p]),
                    float(times[q]),
                    c_left + "ZZ",
                    "ZZ" + c_right,
                )
            )

    crossings = []
    sign_change = (states[:-1] != 0) & (states[1:] != 0) & (states[:-1] != states[1:])
    for i in np.nonzero(sign_change)[0]:
        frac = values[i] / (values[i] - values[i + 1])
        t_c = float(times[i] + frac * (times[i + 1] - times[i]))
        c_left = _flank_context(states[max(0, i - window + 1) : i + 1], alternation_min)
        c_right = _flank_context(states[i + 1 : i + 1 + window], alternation_min)
        crossings.append(CrossingMoment(t_c, c_left + "Z" + c_right, float(i) + float(frac)))

    # Drop-forcing intervals: an N-run, a Z-interval, and another N-run glued
    # together; crossing one forces a strict drop of the zero count.
    events = [(r.start_index, r.end_index, r.label_start, r.label_end) for r in runs]
    events.extend((c.index, c.index, c.label, c.label) for c in crossings)
    events.sort()
    intervals = []
    for k, (i0, i1, lab0, lab1) in enumerate(events):
        if not (lab0.startswith("N") and lab1.endswith("N")):
            continue
        prev_end = events[k - 1][1] if k else -1.0
        next_start = events[k + 1][0] if k + 1 < len(events) else float(last) + 1.0
        r = float(np.interp(max(prev_end, -0.0), np.arange(times.size), times)) if prev_end >= 0 else float(times[0])
        s1 = float(np.interp(min(next_start, float(last)), np.arange(times.size), times))
        t_lo = float(np.interp(i0, np.arange(times.size), times))
        t_hi = float(np.interp(i1, np.arange(times.size), times))
        if r < t_lo and t_hi < s1:
            intervals.append((r, t_lo, t_hi, s1))

    mc = MomentClassification(
        side=side,
        runs=runs,
        crossings=crossings,
        drop_forcing_intervals=intervals,
        params={
            "zero_tol": float(zero_tol),
            "window": int(window),
            "alternation_min": int(alternation_min),
            "scale_mode": "per-sample profile sup-norm",
        },
        has_n_moments=bool(np.any(states != 0)),
    )
    mc.check()
    return mc
