"""Changes of variables used by the moving-domain and free-boundary solvers.

Two transforms are provided.  Straightening maps a moving interval onto a
fixed reference interval by the affine substitution ``y = (x - l(t)) / d(t)``,
which trades endpoint motion for an extra advection term; it is applied
one-sided (right endpoint pinned at a split point) or two-sided (full
immobilization).  Diffusion normalization rescales space by the integral of
``a^(-1/2)`` and time by the squared total length, producing a unit
diffusion coefficient.  Both transforms preserve zero sets pointwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import SolverError, ValidationError
from .model import BCKind, BoundaryCondition, CoefficientField, MovingDomain

_ORIGIN_TOL = 1e-12


@dataclass(frozen=True)
class TransformedProblem:
    """A problem rewritten on the fixed reference interval [0, 1].

    ``field`` evaluates the transformed coefficients in the computational
    coordinates; ``forward``/``inverse`` map between computational and
    physical space; ``width(t)`` is the Jacobian dx/dy of the affine map.
    """

    field: CoefficientField
    forward: object  # (y, t) -> x
    inverse: object  # (x, t) -> y
    width: object  # t -> dx/dy
    domain: tuple = (0.0, 1.0)
    time_map: object = None  # t -> s when time is rescaled
    meta: dict | None = None

    def map_snapshot_nodes(self, y_nodes, t):
        return self.forward(np.asarray(y_nodes, dtype=float), t)


def _require_smooth(domain, window, side_name):
    t0, t1 = window
    bad = domain.offending_window(t0, t1)
    if bad is not None:
        raise ValidationError(
            f"endpoint velocity for {side_name} is unavailable on "
            f"[{bad[0]:g}, {bad[1]:g}]: no C1 annotation covers it"
        )


def _immobilized_field(field, domain, window):
    """Coefficients of the substituted unknown w(y,t) = u(l + d*y, t)."""

    def phi(y, t):
        lo, hi = domain.interval(t)
        return lo + (hi - lo) * np.asarray(y, dtype=float)

    def a_t(y, t):
        d = domain.width(t)
        return field.a(phi(y, t), t) / (d * d)

    def b_t(y, t):
        d = domain.width(t)
        vl = domain.velocity(t, 1, window)
        vr = domain.velocity(t, 2, window)
        y = np.asarray(y, dtype=float)
        return (vl * (1.0 - y) + vr * y + field.b(phi(y, t), t)) / d

    def c_t(y, t):
        return field.c(phi(y, t), t)

    reaction = None
    if field.reaction is not None:
        base = field.reaction

        def reaction(y, t, u):
            return base(phi(y, t), t, u)

    return CoefficientField(
        a=a_t,
        b=b_t,
        c=c_t,
        reaction=reaction,
        bounds=dict(field.bounds),
        singularity=None,
        dimension=field.dimension,
        spec={"transformed_from": field.spec},
    )


def immobilize_domain(field, domain, window):
    """Map the moving interval [l(t), r(t)] onto [0, 1] (both sides)."""
    _require_smooth(domain, window, "both endpoints")

    def forward(y, t):
        lo, hi = domain.interval(t)
        return lo + (hi - lo) * np.asarray(y, dtype=float)

    def inverse(x, t):
        lo, hi = domain.interval(t)
        return (np.asarray(x, dtype=float) - lo) / (hi - lo)

    return TransformedProblem(
        field=_immobilized_field(field, domain, window),
        forward=forward,
        inverse=inverse,
        width=domain.width,
        meta={"kind": "immobilize"},
    )


def straighten_domain(field, domain, split, window=None):
    """One-sided straightening: [l(t), X] -> [0, 1] with X = ``split`` fixed.

    Refuses when the declared smoothness windows do not cover ``window``
    (the left endpoint velocity is then unavailable), or when the split
    point is not strictly to the right of the left endpoint throughout.
    """
    if window is None:
        window = (0.0, math.inf)
    _require_smooth(domain, window, "the left endpoint")
    t0, t1 = window
    ts = np.linspace(t0, min(t1, t0 + 1e6), 65) if math.isfinite(t1) else [t0]
    for t in np.atleast_1d(ts):
        if domain.left(t) >= split - 1e-12:
            raise ValidationError(
                f"split point {split:g} must stay right of the moving endpoint "
                f"(violated at t={float(t):g})"
            )
    pinned = MovingDomain(
        left=domain.left,
        right=lambda t: split,
        smooth_windows=domain.smooth_windows,
        left_velocity=domain.left_velocity,
        right_velocity=lambda t: 0.0,
        spec={"straightened": True, "split": split},
    )

    def forward(y, t):
        lo = pinned.left(t)
        return lo + (split - lo) * np.asarray(y, dtype=float)

    def inverse(x, t):
        lo = pinned.left(t)
        return (np.asarray(x, dtype=float) - lo) / (split - lo)

    return TransformedProblem(
        field=_immobilized_field(field, pinned, window),
        forward=forward,
        inverse=inverse,
        width=pinned.width,
        meta={"kind": "straighten", "split": split},
    )


def transform_boundary(bc, domain):
    """Rewrite a physical boundary condition in the computational frame.

    Slopes scale with the interval width d(t): a Robin rate beta becomes
    d(t)*beta(t) and a prescribed flux g becomes d(t)*g."""
    if bc.is_dirichlet or bc.kind is BCKind.FREE_STEFAN:
        return bc
    if bc.kind in (BCKind.NEUMANN, BCKind.ROBIN):
        beta = bc.beta

        def scaled_beta(t):
            return domain.width(t) * float(beta(t))

        return replace(bc, beta=scaled_beta)
    if bc.kind is BCKind.NONLINEAR_FLUX:
        flux = bc.flux
        flux_du = bc.flux_du

        def scaled_flux(t, u):
            return domain.width(t) * float(flux(t, u))

        scaled_du = None
        if flux_du is not None:

            def scaled_du(t, u):
                return domain.width(t) * float(flux_du(t, u))

        return replace(bc, flux=scaled_flux, flux_du=scaled_du)
    raise ValidationError(f"cannot transform boundary kind {bc.kind}")


# ---------------------------------------------------------------------------
# diffusion normalization
# ---------------------------------------------------------------------------


def _cumtrapz(values, xs):
    out = np.zeros_like(values)
    out[1:] = np.cumsum(0.5 * (values[1:] + values[:-1]) * np.diff(xs))
    return out


@dataclass(frozen=True)
class NormalizationMap:
    """Tabulated substitution removing a variable diffusion coefficient.

    alpha(t) integrates a^(-1/2) across the interval; y(x,t) is the
    normalized partial integral; s(t) rescales time by alpha^(-2).  All maps
    are built by composite-trapezoid quadrature at solver resolution and
    inverted by monotone interpolation.
    """

    xs: np.ndarray
    ts: np.ndarray
    alpha_values: np.ndarray
    s_values: np.ndarray
    y_table: np.ndarray  # shape (nt, nx)

    def alpha(self, t):
        return float(np.interp(t, self.ts, self.alpha_values))

    def s(self, t):
        return float(np.interp(t, self.ts, self.s_values))

    def t_of_s(self, s):
        return float(np.interp(s, self.s_values, self.ts))

    def _row(self, t):
        if self.ts.size == 1:
            return self.y_table[0]
        tc = min(max(float(t), self.ts[0]), self.ts[-1])
        j = min(int(np.searchsorted(self.ts, tc, side="right")) - 1, self.ts.size - 2)
        j = max(j, 0)
        w = (tc - self.ts[j]) / (self.ts[j + 1] - self.ts[j])
        return (1.0 - w) * self.y_table[j] + w * self.y_table[j + 1]

    def y(self, x, t):
        row = self._row(t)
        out = np.interp(x, self.xs, row)
        return out if np.ndim(x) else float(out)

    def x_of_y(self, y, t):
        row = self._row(t)
        out = np.interp(y, row, self.xs)
        return out if np.ndim(y) else float(out)

    def check(self):
        if np.any(self.alpha_values <= 0):
            raise ValidationError("normalization length alpha(t) must be positive")
        if self.ts.size > 1 and np.any(np.diff(self.s_values) <= 0):
            raise ValidationError("rescaled time s(t) must be strictly increasing")
        if np.any(np.diff(self.y_table, axis=1) <= 0):
            raise ValidationError("normalized coordinate y(.,t) must be strictly increasing")
        return True


def normalize_diffusion(field, interval, horizon, space_nodes=401, time_nodes=129):
    """Rewrite a fixed-interval problem with unit diffusion.

    Returns ``(problem, mapping)`` where the transformed unknown satisfies
    ``w_s = w_yy + b~ w_y + c~ w`` on (0,1) x (0, S), S = s(horizon).  The
    transformed drift and reaction-rate coefficients are tabulated on the
    quadrature grid and interpolated bilinearly.
    """
    lo, hi = float(interval[0]), float(interval[1])
    xs = np.linspace(lo, hi, int(space_nodes))
    ts = np.linspace(0.0, float(horizon), int(time_nodes))
    amat = np.empty((ts.size, xs.size))
    for j, t in enumerate(ts):
        amat[j] = np.asarray(field.a(xs, float(t)), dtype=float)
    a_min = float(field.bounds.get("a_min", 0.0))
    if np.any(amat <= 0.0) or (a_min > 0.0 and np.any(amat < a_min - 1e-12)):
        raise SolverError(
            "quadrature failure: diffusivity dips below the declared lower bound"
        )

    integrand = amat**-0.5
    f_table = np.empty_like(integrand)
    for j in range(ts.size):
        f_table[j] = _cumtrapz(integrand[j], xs)
    alpha_values = f_table[:, -1].copy()
    y_table = f_table / alpha_values[:, None]
    s_values = _cumtrapz(alpha_values**-2.0, ts)
    mapping = NormalizationMap(xs, ts, alpha_values, s_values, y_table)
    mapping.check()

    # Transformed drift: alpha * a^(-1/2) * (b - a_x/2) - alpha^2 * y_t,
    # tabulated at the quadrature nodes in physical coordinates.
    hx = xs[1] - xs[0]
    a_x = np.gradient(amat, hx, axis=1)
    if ts.size > 1:
        y_t = np.gradient(y_table, ts[1] - ts[0], axis=0)
    else:
        y_t = np.zeros_like(y_table)
    bmat = np.empty_like(amat)
    cmat = np.empty_like(amat)
    for j, t in enumerate(ts):
        bmat[j] = np.asarray(field.b(xs, float(t)), dtype=float)
        cmat[j] = np.asarray(field.c(xs, float(t)), dtype=float)
    alpha_col = alpha_values[:, None]
    b_tilde_table = alpha_col * integrand * (bmat - 0.5 * a_x) - alpha_col**2 * y_t
    c_tilde_table = alpha_col**2 * cmat

    def _interp_phys(table, x, t):
        if ts.size == 1:
            row = table[0]
        else:
            tc = min(max(float(t), ts[0]), ts[-1])
            j = min(int(np.searchsorted(ts, tc, side="right")) - 1, ts.size - 2)
            j = max(j, 0)
            w = (tc - ts[j]) / (ts[j + 1] - ts[j])
            row = (1.0 - w) * table[j] + w * table[j + 1]
        out = np.interp(x, xs, row)
        return out if np.ndim(x) else float(out)

    def a_unit(y, s):
        y = np.asarray(y, dtype=float)
        return np.ones(y.shape) if y.ndim else 1.0

    def b_tilde(y, s):
        t = mapping.t_of_s(s)
        x = mapping.x_of_y(y, t)
        return _interp_phys(b_tilde_table, x, t)

    def c_tilde(y, s):
        t = mapping.t_of_s(s)
        x = mapping.x_of_y(y, t)
        return _interp_phys(c_tilde_table, x, t)

    new_field = CoefficientField(
        a=a_unit,
        b=b_tilde,
        c=c_tilde,
        bounds={"a_min": 1.0, "a_max": 1.0},
        spec={"normalized_from": field.spec},
    )

    def forward(y, s):
        return mapping.x_of_y(y, mapping.t_of_s(s))

    def inverse(x, s):
        return mapping.y(x, mapping.t_of_s(s))

    problem = TransformedProblem(
        field=new_field,
        forward=forward,
        inverse=inverse,
        width=lambda s: mapping.alpha(mapping.t_of_s(s)),
        time_map=mapping.s,
        meta={"kind": "normalize", "horizon_s": float(s_values[-1])},
    )
    return problem, mapping


# ---------------------------------------------------------------------------
# radial regularization
# ---------------------------------------------------------------------------


def regularize_radial(field, r_min=0.0, initial=None, tol=1e-4):
    """Handle the drift singularity of the radial family at the origin.

    When the domain includes r = 0 (``r_min == 0``), the equation at the
    origin is replaced by its even-symmetry limit ``u_t = N a u_rr + c u``
    (the drift contributes (N-1) extra diffusion there) and the caller must
    impose a zero-slope condition at r = 0.  Otherwise the field is returned
    unchanged, to be used on the clipped domain r >= r_min.
    """
    if field.singularity is None:
        if field.dimension == 1:
            return field  # drift vanishes identically; nothing to do
        raise ValidationError("field has no singularity marker to regularize")
    if r_min < 0:
        raise ValidationError("r_min must be nonnegative")
    if r_min > 0:
        return replace(field, spec={**field.spec, "clipped_at": r_min})

    if initial is not None:
        h = 1e-4
        slope = (-3.0 * initial(0.0) + 4.0 * initial(h) - initial(2.0 * h)) / (2.0 * h)
        scale = max(abs(initial(0.0)), abs(initial(h)), abs(initial(2 * h)), 1e-300)
        if abs(slope) > tol * max(scale, 1.0):
            raise ValidationError(
                f"initial profile has u_r(0) = {slope:g} beyond tolerance; "
                "an even profile is required when the domain includes r = 0"
            )

    base_a = field.a
    n = field.dimension

    def a_reg(r, t):
        r_arr = np.asarray(r, dtype=float)
        av = np.asarray(base_a(r_arr, t), dtype=float)
        out = np.where(np.abs(r_arr) <= _ORIGIN_TOL, n * av, av)
        return out if r_arr.ndim else float(out)

    return replace(
        field,
        a=a_reg,
        origin_regularized=True,
        spec={**field.spec, "origin_regularized": True},
    )
