"""Domain types shared by every other module.

A scenario bundles a coefficient field ``(a, b, c)`` (optionally a reaction
term), a fixed or moving interval, two boundary conditions, an initial
profile, and the numerical resolution/tolerance knobs.  Everything is
immutable after construction, validated at construction, and re-checkable
on demand, so configured scenarios can be shared freely between concurrent
runs.

Configuration sources are JSON trees; ``build_scenario`` accepts a dict, a
JSON string, or a path to a JSON file.  The schema is documented in the
repository README; all units are nondimensional.
"""

from __future__ import annotations

import enum
import json
import math
import warnings
from dataclasses import dataclass, field as dc_field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, ValidationError
from .expressions import compile_expression

_VALIDATION_TIME_SAMPLES = 33
_VALIDATION_SPACE_SAMPLES = 101


def _as_float(value, what):
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{what} must be a number, got {value!r}") from None
    if not math.isfinite(out):
        raise ValidationError(f"{what} must be finite, got {out!r}")
    return out


# ---------------------------------------------------------------------------
# scalar field builders (space-time coefficient maps)
# ---------------------------------------------------------------------------


def _constant_map(value, arity):
    value = float(value)

    def fn(*args):
        lead = args[0]
        if np.ndim(lead) == 0:
            return value
        return np.full(np.shape(lead), value)

    fn.source = value
    return fn


def _trig_map(node):
    """Trigonometric polynomial in x, optionally modulated periodically in t.

    value(x, t) = [mean + sum_k amp_k * sin/cos(k*pi*x/length + phase)]
                  * (1 + t_amplitude * sin(2*pi*t/t_period))
    """
    mean = _as_float(node.get("mean", 0.0), "trig mean")
    length = _as_float(node.get("length", 1.0), "trig length")
    origin = _as_float(node.get("origin", 0.0), "trig origin")
    terms = []
    for term in node.get("terms", ()):
        kind = term.get("kind", "sin")
        if kind not in ("sin", "cos"):
            raise ConfigError(f"trig term kind must be sin or cos, got {kind!r}")
        terms.append(
            (
                kind,
                int(term.get("k", 1)),
                _as_float(term.get("amp", 0.0), "trig amplitude"),
                _as_float(term.get("phase", 0.0), "trig phase"),
            )
        )
    t_amp = _as_float(node.get("t_amplitude", 0.0), "trig t_amplitude")
    t_per = node.get("t_period")
    if t_amp != 0.0 and not t_per:
        raise ConfigError("trig family with t_amplitude needs t_period")
    t_per = _as_float(t_per, "trig t_period") if t_per else None

    def fn(x, t):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, mean) if x.ndim else mean
        xn = (x - origin) * (math.pi / length)
        for kind, k, amp, phase in terms:
            wave = np.sin(k * xn + phase) if kind == "sin" else np.cos(k * xn + phase)
            out = out + amp * wave
        if t_amp != 0.0:
            out = out * (1.0 + t_amp * math.sin(2.0 * math.pi * t / t_per))
        return out

    return fn


def _table_map(node):
    """Sampled table with bilinear interpolation in (x, t)."""
    xs = np.asarray(node["x"], dtype=float)
    ts = np.asarray(node["t"], dtype=float)
    vals = np.asarray(node["values"], dtype=float)
    if vals.shape != (ts.size, xs.size):
        raise ConfigError(
            f"table values must have shape (len(t), len(x)) = {(ts.size, xs.size)}, "
            f"got {vals.shape}"
        )
    if np.any(np.diff(xs) <= 0) or (ts.size > 1 and np.any(np.diff(ts) <= 0)):
        raise ConfigError("table axes must be strictly increasing")

    def fn(x, t):
        x = np.asarray(x, dtype=float)
        if ts.size == 1:
            row = vals[0]
        else:
            tc = min(max(float(t), ts[0]), ts[-1])
            j = min(int(np.searchsorted(ts, tc, side="right")) - 1, ts.size - 2)
            j = max(j, 0)
            w = (tc - ts[j]) / (ts[j + 1] - ts[j])
            row = (1.0 - w) * vals[j] + w * vals[j + 1]
        out = np.interp(x, xs, row)
        return out if x.ndim else float(out)

    return fn


def _radial_drift_map(dimension, clip=0.0):
    """Drift (N-1)/r of the radial Laplacian; zero exactly at the origin."""
    n = int(dimension)

    def fn(x, t):
        r = np.asarray(x, dtype=float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        with np.errstate(divide="ignore"):
            out = np.where(np.abs(r) > _ORIGIN_TOL, (n - 1) / np.where(r == 0, 1.0, r), clip)
        out = np.where(np.abs(r) <= _ORIGIN_TOL, clip, out)
        return float(out[0]) if scalar else out

    return fn


_ORIGIN_TOL = 1e-12


def coefficient_map(node, variables=("x", "t")):
    """Build an evaluable map from a config node.

    Accepted nodes: a bare number, ``{"value": v}``, ``{"expr": "..."}``,
    ``{"family": "trig", ...}`` or ``{"table": {...}}``.
    """
    if isinstance(node, (int, float)):
        return _constant_map(node, len(variables))
    if not isinstance(node, dict):
        raise ConfigError(f"cannot build a coefficient from {node!r}")
    if "value" in node:
        return _constant_map(_as_float(node["value"], "coefficient value"), len(variables))
    if "expr" in node:
        return compile_expression(node["expr"], variables)
    if "table" in node:
        return _table_map(node["table"])
    family = node.get("family")
    if family == "trig":
        return _trig_map(node)
    raise ConfigError(f"unknown coefficient spec {node!r}")


# ---------------------------------------------------------------------------
# coefficient field
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoefficientField:
    """Evaluable coefficients of ``u_t = a u_xx + b u_x + c u + f(x,t,u)``.

    ``a``, ``b``, ``c`` are callables of ``(x, t)`` (vectorized over x);
    ``reaction`` is an optional callable of ``(x, t, u)``.  ``bounds`` holds
    *declared* regularity bounds; they are never inferred from samples, and
    sampled violations only warn.  ``singularity`` marks a drift singularity
    location (the radial family marks r = 0); ``dimension`` is the radial
    dimension N when relevant.
    """

    a: object
    b: object
    c: object
    reaction: object = None
    bounds: dict = dc_field(default_factory=dict)
    singularity: float | None = None
    dimension: int = 1
    origin_regularized: bool = False
    spec: dict = dc_field(default_factory=dict)

    def validate(self, xs, ts):
        """Check invariants on sample points; raise ValidationError on a
        positivity failure, warn on declared-bound violations."""
        xs = np.asarray(xs, dtype=float)
        a_min = float(self.bounds.get("a_min", 0.0))
        for t in np.atleast_1d(ts):
            av = np.asarray(self.a(xs, float(t)), dtype=float)
            if not np.all(np.isfinite(av)):
                raise ValidationError("diffusivity a(x,t) is not finite on samples")
            if np.any(av <= 0.0):
                raise ValidationError(
                    f"diffusivity a(x,t) must be positive; min sampled value {av.min():g}"
                )
            if a_min > 0.0 and np.any(av < a_min - 1e-12):
                warnings.warn(
                    f"sampled a(x,t) dips below declared a_min={a_min:g}",
                    stacklevel=2,
                )
            for name, fn in (("b", self.b), ("c", self.c)):
                bound = self.bounds.get(f"{name}_max")
                v = np.asarray(fn(xs, float(t)), dtype=float)
                if not np.all(np.isfinite(v)):
                    raise ValidationError(f"coefficient {name}(x,t) is not finite on samples")
                if bound is not None and np.any(np.abs(v) > float(bound) + 1e-12):
                    warnings.warn(
                        f"sampled |{name}(x,t)| exceeds declared bound {bound:g}",
                        stacklevel=2,
                    )
        return True

    @staticmethod
    def from_spec(node):
        """Build a field from the ``coefficients`` node of a config tree."""
        if not isinstance(node, dict):
            raise ConfigError("coefficients node must be a mapping")
        node = dict(node)
        family = node.get("family")
        if family == "radial_laplacian":
            dimension = int(node.get("dimension", 1))
            if dimension < 1:
                raise ValidationError("radial dimension must be >= 1")
            c_map = coefficient_map(node.get("c", 0.0))
            field = CoefficientField(
                a=_constant_map(1.0, 2),
                b=_radial_drift_map(dimension),
                c=c_map,
                bounds=dict(node.get("bounds", {})),
                singularity=0.0 if dimension > 1 else None,
                dimension=dimension,
                spec=node,
            )
        else:
            reaction = None
            if "f" in node and node["f"] is not None:
                reaction = coefficient_map(node["f"], variables=("x", "t", "u"))
            field = CoefficientField(
                a=coefficient_map(node.get("a", 1.0)),
                b=coefficient_map(node.get("b", 0.0)),
                c=coefficient_map(node.get("c", 0.0)),
                reaction=reaction,
                bounds=dict(node.get("bounds", {})),
                spec=node,
            )
        return field


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------


def _numeric_velocity(fn, t, lo, hi):
    """Centered difference inside [lo, hi], one-sided at the endpoints."""
    h = max(1e-7, 1e-7 * (abs(t) + 1.0))
    if t - h < lo:
        return (fn(t + h) - fn(t)) / h
    if t + h > hi:
        return (fn(t) - fn(t - h)) / h
    return (fn(t + h) - fn(t - h)) / (2.0 * h)


@dataclass(frozen=True)
class MovingDomain:
    """The interval ``[left(t), right(t)]`` with smoothness annotations.

    ``smooth_windows`` lists the closed time intervals on which both
    endpoint curves are declared continuously differentiable; transforms
    that need endpoint velocities refuse to operate outside them.
    """

    left: object
    right: object
    smooth_windows: tuple = ((0.0, math.inf),)
    left_velocity: object = None
    right_velocity: object = None
    lipschitz: float | None = None
    spec: dict = dc_field(default_factory=dict)

    def interval(self, t):
        return float(self.left(t)), float(self.right(t))

    def width(self, t):
        lo, hi = self.interval(t)
        return hi - lo

    @property
    def is_fixed(self):
        return bool(self.spec.get("fixed", False))

    def smooth_on(self, t0, t1):
        """True when [t0, t1] lies inside one declared smooth window."""
        return any(a - 1e-12 <= t0 and t1 <= b + 1e-12 for a, b in self.smooth_windows)

    def offending_window(self, t0, t1):
        return None if self.smooth_on(t0, t1) else (t0, t1)

    def velocity(self, t, side, window=None):
        lo, hi = window if window is not None else (t - 1.0, t + 1.0)
        fn = self.left if side == 1 else self.right
        given = self.left_velocity if side == 1 else self.right_velocity
        if given is not None:
            return float(given(t))
        return _numeric_velocity(fn, t, lo, hi)

    def validate(self, ts):
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        lows = np.array([self.left(t) for t in ts])
        highs = np.array([self.right(t) for t in ts])
        if not np.all(np.isfinite(lows)) or not np.all(np.isfinite(highs)):
            raise ValidationError("domain endpoints must be finite")
        if np.any(lows >= highs):
            k = int(np.argmax(lows >= highs))
            raise ValidationError(
                f"domain degenerate: left(t) >= right(t) at t={ts[k]:g}"
            )
        if self.lipschitz is not None and ts.size > 1:
            dt = np.diff(ts)
            for name, v in (("left", lows), ("right", highs)):
                jump = np.abs(np.diff(v))
                if np.any(jump > self.lipschitz * dt + 1e-12):
                    raise ValidationError(
                        f"domain endpoint {name} moves faster than the declared "
                        f"Lipschitz bound {self.lipschitz:g}"
                    )
        return True

    @staticmethod
    def fixed(lo, hi):
        lo = float(lo)
        hi = float(hi)
        if not lo < hi:
            raise ValidationError(f"domain degenerate: [{lo:g}, {hi:g}]")
        return MovingDomain(
            left=_constant_time_map(lo),
            right=_constant_time_map(hi),
            left_velocity=_constant_time_map(0.0),
            right_velocity=_constant_time_map(0.0),
            spec={"fixed": True, "left": lo, "right": hi},
        )

    @staticmethod
    def from_spec(node):
        if not isinstance(node, dict):
            raise ConfigError("domain node must be a mapping")
        left, right = node.get("left"), node.get("right")
        if left is None or right is None:
            raise ConfigError("domain needs 'left' and 'right'")
        if isinstance(left, (int, float)) and isinstance(right, (int, float)):
            dom = MovingDomain.fixed(left, right)
            return replace(dom, spec=dict(node, fixed=True))
        maps = []
        for side in (left, right):
            if isinstance(side, (int, float)):
                maps.append(_constant_time_map(float(side)))
            elif isinstance(side, dict) and "expr" in side:
                maps.append(compile_expression(side["expr"], ("t",)))
            else:
                raise ConfigError(f"domain endpoint {side!r} not understood")
        windows = tuple(
            (float(a), float(b)) for a, b in node.get("smooth_windows", ((0.0, math.inf),))
        )
        return MovingDomain(
            left=maps[0],
            right=maps[1],
            smooth_windows=windows,
            lipschitz=node.get("lipschitz"),
            spec=dict(node),
        )


def _constant_time_map(value):
    value = float(value)

    def fn(t):
        return value

    fn.source = value
    return fn


# ---------------------------------------------------------------------------
# boundary conditions
# ---------------------------------------------------------------------------


class BCKind(enum.Enum):
    DIRICHLET_ZERO = "dirichlet_zero"
    DIRICHLET_VALUE = "dirichlet_value"
    NEUMANN = "neumann"
    ROBIN = "robin"
    NONLINEAR_FLUX = "nonlinear_flux"
    FREE_STEFAN = "free_stefan"


@dataclass(frozen=True)
class BoundaryCondition:
    """One side's boundary condition.

    ``side`` is 1 (left) or 2 (right).  The Robin condition is
    ``u_x + (-1)^side * beta(t) * u = 0`` with ``beta >= 0``; Neumann is the
    ``beta = 0`` special case.  A nonlinear flux prescribes
    ``u_x = g(t, u)`` at the left endpoint, with ``g_u >= 0`` enforced on
    samples when ``monotone_flux`` is declared.
    """

    kind: BCKind
    side: int
    value: object = None  # callable t -> Dirichlet value
    beta: object = None  # callable t -> Robin rate
    flux: object = None  # callable (t, u) -> prescribed slope
    flux_du: object = None  # optional dg/du
    monotone_flux: bool = False
    spec: dict = dc_field(default_factory=dict)

    @property
    def is_dirichlet(self):
        return self.kind in (BCKind.DIRICHLET_ZERO, BCKind.DIRICHLET_VALUE)

    def dirichlet_value(self, t):
        if self.kind is BCKind.DIRICHLET_ZERO:
            return 0.0
        return float(self.value(t))

    def validate(self, ts):
        if self.side not in (1, 2):
            raise ValidationError(f"boundary side must be 1 or 2, got {self.side}")
        if self.kind is BCKind.ROBIN:
            for t in np.atleast_1d(ts):
                bv = float(self.beta(float(t)))
                if bv < 0.0:
                    raise ValidationError(
                        f"Robin coefficient negative: beta({float(t):g}) = {bv:g}"
                    )
        if self.kind is BCKind.NONLINEAR_FLUX:
            if self.side != 1:
                raise ValidationError("nonlinear flux condition is supported on the left side only")
            if abs(float(self.flux(0.0, 0.0))) > 1e-12 and self.monotone_flux:
                raise ValidationError("monotone flux law must satisfy g(t, 0) = 0")
            if self.monotone_flux:
                us = np.linspace(0.0, 2.0, 21)
                for t in np.atleast_1d(ts):
                    g = np.array([float(self.flux(float(t), u)) for u in us])
                    if np.any(np.diff(g) < -1e-10):
                        raise ValidationError(
                            "flux law declared monotone but g_u < 0 on samples (u >= 0)"
                        )
        return True

    @staticmethod
    def from_spec(node, side):
        if isinstance(node, str):
            node = {"kind": node}
        if not isinstance(node, dict) or "kind" not in node:
            raise ConfigError(f"boundary node {node!r} needs a 'kind'")
        try:
            kind = BCKind(node["kind"])
        except ValueError:
            raise ConfigError(f"unknown boundary kind {node['kind']!r}") from None
        bc = None
        if kind is BCKind.DIRICHLET_ZERO:
            bc = BoundaryCondition(kind, side, spec=dict(node))
        elif kind is BCKind.DIRICHLET_VALUE:
            val = node.get("value", 0.0)
            fn = (
                compile_expression(val["expr"], ("t",))
                if isinstance(val, dict)
                else _constant_time_map(_as_float(val, "Dirichlet value"))
            )
            bc = BoundaryCondition(kind, side, value=fn, spec=dict(node))
        elif kind is BCKind.NEUMANN:
            bc = BoundaryCondition(kind, side, beta=_constant_time_map(0.0), spec=dict(node))
        elif kind is BCKind.ROBIN:
            beta = node.get("beta", 0.0)
            fn = (
                compile_expression(beta["expr"], ("t",))
                if isinstance(beta, dict)
                else _constant_time_map(_as_float(beta, "Robin beta"))
            )
            bc = BoundaryCondition(kind, side, beta=fn, spec=dict(node))
        elif kind is BCKind.NONLINEAR_FLUX:
            g = node.get("g")
            if not isinstance(g, dict) or "expr" not in g:
                raise ConfigError("nonlinear_flux boundary needs g: {'expr': ...} in (t, u)")
            fn = compile_expression(g["expr"], ("t", "u"))
            dfn = None
            if "g_u" in node and node["g_u"] is not None:
                dfn = compile_expression(node["g_u"]["expr"], ("t", "u"))
            bc = BoundaryCondition(
                kind,
                side,
                flux=fn,
                flux_du=dfn,
                monotone_flux=bool(node.get("monotone", False)),
                spec=dict(node),
            )
        elif kind is BCKind.FREE_STEFAN:
            bc = BoundaryCondition(kind, side, spec=dict(node))
        return bc


# ---------------------------------------------------------------------------
# snapshots
# ---------------------------------------------------------------------------


def estimate_derivative(nodes, values):
    """Second-order derivative estimates: centered interior, one-sided ends.

    Assumes a uniform grid (the solver's computational coordinate)."""
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values, dtype=float)
    if nodes.size < 3:
        raise ValidationError("derivative estimates need at least 3 nodes")
    dx = nodes[1] - nodes[0]
    out = np.empty_like(values)
    out[1:-1] = (values[2:] - values[:-2]) / (2.0 * dx)
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dx)
    out[-1] = (3.0 * values[-1] - 4.0 * values[-2] + values[-3]) / (2.0 * dx)
    return out


@dataclass(frozen=True)
class Snapshot:
    """Profile at one instant: grid nodes, values, derivative estimates."""

    t: float
    nodes: np.ndarray
    values: np.ndarray
    derivative: np.ndarray

    @classmethod
    def from_values(cls, t, nodes, values):
        nodes = np.asarray(nodes, dtype=float)
        values = np.asarray(values, dtype=float)
        return cls(float(t), nodes, values, estimate_derivative(nodes, values))

    @property
    def spacing(self):
        return float(self.nodes[1] - self.nodes[0])

    @property
    def scale(self):
        return float(np.max(np.abs(self.values)))

    def check(self, domain=None):
        if np.any(np.diff(self.nodes) <= 0):
            raise ValidationError("snapshot nodes must be strictly increasing")
        recomputed = estimate_derivative(self.nodes, self.values)
        if not np.array_equal(recomputed, self.derivative):
            raise ValidationError("stored derivative estimates do not match recomputation")
        if domain is not None:
            lo, hi = domain.interval(self.t)
            tol = 2.0 * self.spacing
            if abs(self.nodes[0] - lo) > tol or abs(self.nodes[-1] - hi) > tol:
                raise ValidationError("snapshot grid does not span the domain interval")
        return True

    def restrict(self, lo, hi):
        """Sub-snapshot on [lo, hi] (node-aligned; derivative recomputed)."""
        mask = (self.nodes >= lo - 1e-12) & (self.nodes <= hi + 1e-12)
        return Snapshot.from_values(self.t, self.nodes[mask], self.values[mask])


# ---------------------------------------------------------------------------
# scenario configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Spatial nodes, internal time step, and snapshot cadence."""

    nodes: int
    dt: float
    output_every: int = 1
    smoothing_steps: int = 2  # leading implicit-Euler sub-stepped steps

    def validate(self):
        if self.nodes < 3:
            raise ValidationError(f"grid needs at least 3 nodes, got {self.nodes}")
        if not self.dt > 0:
            raise ValidationError(f"time step must be positive, got {self.dt!r}")
        if self.output_every < 1:
            raise ValidationError("output_every must be >= 1")
        if self.smoothing_steps < 0:
            raise ValidationError("smoothing_steps must be >= 0")
        return True


@dataclass(frozen=True)
class Tolerances:
    """Detection tolerances shared by zero counting and the checkers.

    ``zero_tol`` and ``degenerate_tol`` are relative to the profile scale;
    they are separated by orders of magnitude so degeneracy detection stays
    robust to discretization noise in the derivative estimates."""

    zero_tol: float = 1e-8
    degenerate_tol: float = 1e-4
    burn_in_steps: int = 5
    drop_window: int = 10

    def validate(self):
        if not (self.zero_tol > 0 and self.degenerate_tol > 0):
            raise ValidationError("tolerances must be positive")
        if self.burn_in_steps < 0 or self.drop_window < 1:
            raise ValidationError("burn_in_steps must be >= 0 and drop_window >= 1")
        return True


@dataclass(frozen=True)
class StefanSpec:
    """Free-boundary parameters: front speed factor and collision threshold."""

    mu: float = 1.0
    min_width: float = 1e-6

    def validate(self):
        if not self.mu > 0:
            raise ValidationError("Stefan latent-heat factor mu must be positive")
        if not self.min_width > 0:
            raise ValidationError("Stefan min_width must be positive")
        return True


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    field: CoefficientField
    domain: MovingDomain
    bc_left: BoundaryCondition
    bc_right: BoundaryCondition
    initial: object  # callable x -> u0
    horizon: float
    grid: GridSpec
    tol: Tolerances
    period: float | None = None
    stefan: StefanSpec | None = None
    comparison_bound: bool = False  # declared a-priori bound 1 + |u0|_inf
    support_bound: float | None = None  # truncation guard for half-line runs
    spec: dict = dc_field(default_factory=dict)

    @property
    def is_free_boundary(self):
        return self.bc_left.kind is BCKind.FREE_STEFAN

    def initial_values(self, nodes):
        u0 = np.asarray([float(self.initial(x)) for x in np.atleast_1d(nodes)], dtype=float)
        return u0

    def times(self):
        steps = int(round(self.horizon / self.grid.dt))
        return np.linspace(0.0, steps * self.grid.dt, steps + 1)

    def validate(self):
        self.grid.validate()
        self.tol.validate()
        if not self.horizon > 0:
            raise ValidationError("time horizon must be positive")
        if self.period is not None and not self.period > 0:
            raise ValidationError("period must be positive when given")
        ts = np.linspace(0.0, self.horizon, _VALIDATION_TIME_SAMPLES)
        self.domain.validate(ts)
        lo, hi = self.domain.interval(0.0)
        xs = np.linspace(lo, hi, _VALIDATION_SPACE_SAMPLES)
        self.field.validate(xs, ts)
        free = [bc.kind is BCKind.FREE_STEFAN for bc in (self.bc_left, self.bc_right)]
        if any(free) and not all(free):
            raise ValidationError("free-boundary conditions must be used on both sides")
        if any(free) and self.stefan is None:
            raise ValidationError("free-boundary scenario needs a stefan block")
        if self.stefan is not None:
            self.stefan.validate()
        self.bc_left.validate(ts)
        self.bc_right.validate(ts)
        u0 = self.initial_values(xs)
        if not np.all(np.isfinite(u0)):
            raise ValidationError("initial profile is not finite on samples")
        if float(np.max(np.abs(u0))) == 0.0:
            raise ValidationError(
                "initial profile identically zero (standing assumption requires u not == 0)"
            )
        return True

    def to_dict(self):
        return json.loads(json.dumps(self.spec))

    def to_json(self, **kwargs):
        kwargs.setdefault("sort_keys", True)
        kwargs.setdefault("indent", 2)
        return json.dumps(self.spec, **kwargs)

    def structurally_equal(self, other):
        return isinstance(other, ScenarioConfig) and self.spec == other.spec


def _initial_map(node):
    if isinstance(node, dict) and "expr" in node:
        fn = compile_expression(node["expr"], ("x",))
        return fn
    if isinstance(node, dict) and "samples" in node:
        xs = np.asarray(node["samples"]["x"], dtype=float)
        us = np.asarray(node["samples"]["u"], dtype=float)
        if xs.size != us.size or xs.size < 2:
            raise ConfigError("sampled initial profile needs matching x/u arrays")
        if np.any(np.diff(xs) <= 0):
            raise ConfigError("sampled initial profile x must be strictly increasing")

        def fn(x):
            return float(np.interp(x, xs, us))

        return fn
    if isinstance(node, dict) and node.get("family") == "trig":
        fn2 = _trig_map(node)

        def fn(x):
            return float(fn2(x, 0.0))

        return fn
    if isinstance(node, dict) and node.get("family") == "bump":
        center = _as_float(node.get("center", 0.0), "bump center")
        width = _as_float(node.get("width", 1.0), "bump width")
        height = _as_float(node.get("height", 1.0), "bump height")
        if width <= 0:
            raise ConfigError("bump width must be positive")

        def fn(x):
            z = (x - center) / width
            if abs(z) >= 1.0:
                return 0.0
            return height * math.cos(0.5 * math.pi * z) ** 2

        return fn
    raise ConfigError(f"initial profile node {node!r} not understood")


def build_scenario(source):
    """Parse and validate a scenario configuration.

    ``source`` may be a mapping, a JSON string, or a path to a JSON file.
    Returns a fully validated :class:`ScenarioConfig`; raises
    :class:`ConfigError` for parse-level problems and
    :class:`ValidationError` for violated invariants.
    """
    tree = _load_tree(source)
    for key in ("domain", "initial", "time"):
        if key not in tree:
            raise ConfigError(f"config is missing the {key!r} section")

    time_node = tree["time"]
    grid_node = tree.get("grid", {})
    grid = GridSpec(
        nodes=int(grid_node.get("nodes", 101)),
        dt=_as_float(time_node.get("dt", 1e-3), "dt"),
        output_every=int(grid_node.get("output_every", 1)),
        smoothing_steps=int(grid_node.get("smoothing_steps", 2)),
    )
    tol_node = tree.get("tolerances", {})
    tol = Tolerances(
        zero_tol=_as_float(tol_node.get("zero", 1e-8), "zero tolerance"),
        degenerate_tol=_as_float(tol_node.get("degenerate", 1e-4), "degeneracy tolerance"),
        burn_in_steps=int(tol_node.get("burn_in_steps", 5)),
        drop_window=int(tol_node.get("drop_window", 10)),
    )
    field = CoefficientField.from_spec(tree.get("coefficients", {"a": 1.0, "b": 0.0, "c": 0.0}))
    domain = MovingDomain.from_spec(tree["domain"])
    bnode = tree.get("boundary", {})
    bc_left = BoundaryCondition.from_spec(bnode.get("left", "dirichlet_zero"), side=1)
    bc_right = BoundaryCondition.from_spec(bnode.get("right", "dirichlet_zero"), side=2)
    stefan = None
    if "stefan" in tree or bc_left.kind is BCKind.FREE_STEFAN:
        snode = tree.get("stefan", {})
        stefan = StefanSpec(
            mu=_as_float(snode.get("mu", 1.0), "stefan mu"),
            min_width=_as_float(snode.get("min_width", 1e-6), "stefan min_width"),
        )
    config = ScenarioConfig(
        name=str(tree.get("name", "scenario")),
        field=field,
        domain=domain,
        bc_left=bc_left,
        bc_right=bc_right,
        initial=_initial_map(tree["initial"]),
        horizon=_as_float(time_node.get("horizon"), "horizon"),
        period=(
            _as_float(time_node["period"], "period")
            if time_node.get("period") is not None
            else None
        ),
        grid=grid,
        tol=tol,
        stefan=stefan,
        comparison_bound=bool(tree.get("comparison_bound", False)),
        support_bound=(
            _as_float(tree["support_bound"], "support bound")
            if tree.get("support_bound") is not None
            else None
        ),
        spec=tree,
    )
    config.validate()
    return config


def _load_tree(source):
    if isinstance(source, ScenarioConfig):
        return source.to_dict()
    if isinstance(source, dict):
        return json.loads(json.dumps(source))
    if isinstance(source, Path):
        source = source.read_text()
    if isinstance(source, str):
        stripped = source.strip()
        if not stripped.startswith("{"):
            path = Path(source)
            if path.exists():
                stripped = path.read_text()
            else:
                raise ConfigError(f"config source {source!r} is neither JSON nor a file")
        try:
            tree = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config does not parse as JSON: {exc}") from None
        if not isinstance(tree, dict):
            raise ConfigError("config root must be a JSON object")
        return tree
    raise ConfigError(f"cannot read a config from {type(source).__name__}")
