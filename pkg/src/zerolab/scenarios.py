"""Builtin scenario configurations and seeded randomized families.

Configs are plain JSON trees (see README for the schema) so every scenario,
including the randomized ones, is serializable and reproducible: the
generators below are deterministic functions of (seed, index).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError

_TWO_PI = 2.0 * math.pi


def two_mode_heat():
    """Dirichlet heat run whose interior zero exits at the right boundary."""
    return {
        "name": "two-mode-heat",
        "coefficients": {"a": 1.0, "b": 0.0, "c": 0.0},
        "domain": {"left": 0.0, "right": 1.0},
        "boundary": {"left": "dirichlet_zero", "right": "dirichlet_zero"},
        "initial": {"expr": "sin(pi*x) + sin(2*pi*x)"},
        "time": {"horizon": 0.05, "dt": 2.5e-5},
        "grid": {"nodes": 801, "output_every": 20},
    }


def three_mode_merge():
    """Mode-1 + mode-3 profile launched so two interior zeros merge at 0.5.

    The profile equals exp(-pi^2 t) sin(pi x) + exp(-9 pi^2 t) sin(3 pi x)
    started 0.02 time units before the merge; the zero count drops 4 -> 2
    when the two interior zeros collide at x = 1/2."""
    a1 = math.exp(math.pi**2 * 0.02)
    a3 = math.exp(9.0 * math.pi**2 * 0.02)
    return {
        "name": "three-mode-merge",
        "coefficients": {"a": 1.0},
        "domain": {"left": 0.0, "right": 1.0},
        "boundary": {"left": "dirichlet_zero", "right": "dirichlet_zero"},
        "initial": {"expr": f"{a1!r}*sin(pi*x) + {a3!r}*sin(3*pi*x)"},
        "time": {"horizon": 0.04, "dt": 2.5e-5},
        "grid": {"nodes": 801, "output_every": 10},
    }


def robin_touch(zero_at=0.9):
    """Robin run whose single interior zero exits through a boundary.

    The initial profile changes sign near one endpoint; under a Robin
    condition the touch moment carries a degenerate boundary zero, so the
    count must drop right after it."""
    if not 0.05 < zero_at < 0.95:
        raise ConfigError("zero_at must stay inside (0.05, 0.95)")
    expr = f"{zero_at!r} - x" if zero_at >= 0.5 else f"x - {zero_at!r}"
    return {
        "name": f"robin-touch-{zero_at:g}",
        "coefficients": {"a": 1.0},
        "domain": {"left": 0.0, "right": 1.0},
        "boundary": {
            "left": {"kind": "robin", "beta": 1.0},
            "right": {"kind": "robin", "beta": 1.0},
        },
        "initial": {"expr": expr},
        "time": {"horizon": 1.0, "dt": 5e-4},
        "grid": {"nodes": 401, "output_every": 4},
    }


def robin_basic():
    return robin_touch(0.9) | {"name": "robin-basic"}


def stefan_conservation(nodes=201):
    """Pure-diffusion free-boundary run; Q = integral(u) + (h-g) is conserved."""
    dt = 2e-3 * 100.0 / (nodes - 1)
    return {
        "name": f"stefan-conservation-{nodes}",
        "coefficients": {"a": 1.0},
        "domain": {"left": -1.0, "right": 1.0},
        "boundary": {"left": "free_stefan", "right": "free_stefan"},
        "initial": {"expr": "cos(pi*x/2)"},
        "time": {"horizon": 1.0, "dt": dt},
        "grid": {"nodes": nodes, "output_every": max(1, (nodes - 1) // 4)},
        "stefan": {"mu": 1.0},
    }


def stefan_spreading():
    """Bistable free-boundary run that spreads: wide initial data near 1."""
    return {
        "name": "stefan-spreading",
        "coefficients": {"a": 1.0, "f": {"expr": "u*(1-u)*(u-0.3)"}},
        "domain": {"left": -2.0, "right": 2.0},
        "boundary": {"left": "free_stefan", "right": "free_stefan"},
        "initial": {"expr": "0.9*(1 - (x/2)**2)"},
        "time": {"horizon": 0.5, "dt": 1e-3},
        "grid": {"nodes": 201, "output_every": 10},
        "stefan": {"mu": 1.0},
    }


def stefan_bistable_periodic():
    """Time-periodic bistable free-boundary run in the vanishing regime.

    Asymmetric initial bump; the solution decays, the fronts freeze, and the
    interpolated maximum location settles to a constant."""
    return {
        "name": "stefan-bistable-periodic",
        "coefficients": {
            "a": 1.0,
            "f": {"expr": "u*(1-u)*(u - 0.45 - 0.1*sin(4*pi*t))"},
        },
        "domain": {"left": -1.0, "right": 1.0},
        "boundary": {"left": "free_stefan", "right": "free_stefan"},
        "initial": {"family": "bump", "center": -0.2, "width": 0.8, "height": 0.8},
        "time": {"horizon": 2.0, "dt": 1e-3, "period": 0.5},
        "grid": {"nodes": 201, "output_every": 10},
        "stefan": {"mu": 1.0},
    }


def halfline_periodic():
    """Truncated half-line run with a time-periodic reaction and flux law.

    The nonlinear boundary slope law g(t, u) has g(t,0) = 0 and g_u >= 0;
    the reaction is logistic with a periodic rate, so compactly supported
    data spread toward a time-periodic state.  The domain is truncated far
    enough that the support never reaches the artificial endpoint."""
    return {
        "name": "halfline-periodic",
        "coefficients": {
            "a": 1.0,
            "f": {"expr": "u*(1-u)*(1 + 0.4*sin(4*pi*t))"},
        },
        "domain": {"left": 0.0, "right": 20.0},
        "boundary": {
            "left": {
                "kind": "nonlinear_flux",
                "g": {"expr": "(0.25 + 0.1*sin(4*pi*t))*u + 0.15*u**2"},
                "monotone": True,
            },
            "right": "dirichlet_zero",
        },
        "initial": {"family": "bump", "center": 1.5, "width": 0.5, "height": 0.2},
        "time": {"horizon": 6.0, "dt": 2e-3, "period": 0.5},
        "grid": {"nodes": 801, "output_every": 5},
        "comparison_bound": True,
        "support_bound": 18.0,
    }


def moving_straightened():
    """Heat equation on a shrinking interval, solved via straightening."""
    return {
        "name": "moving-straightened",
        "coefficients": {"a": 1.0},
        "domain": {"left": {"expr": "0.2*t"}, "right": 1.0},
        "boundary": {"left": "dirichlet_zero", "right": "dirichlet_zero"},
        "initial": {"expr": "sin(pi*x)"},
        "time": {"horizon": 0.5, "dt": 2.5e-4},
        "grid": {"nodes": 401, "output_every": 50},
    }


def radial_ball():
    """Radially symmetric problem on the unit ball (N = 3), Robin outside."""
    return {
        "name": "radial-ball",
        "coefficients": {"family": "radial_laplacian", "dimension": 3, "c": 0.0},
        "domain": {"left": 0.0, "right": 1.0},
        "boundary": {"left": "neumann", "right": {"kind": "robin", "beta": 1.0}},
        "initial": {"expr": "cos(pi*x) + 0.4*cos(2*pi*x)"},
        "time": {"horizon": 0.2, "dt": 5e-4},
        "grid": {"nodes": 401, "output_every": 2},
    }


BUILTIN_SCENARIOS = {
    "two-mode-heat": two_mode_heat,
    "three-mode-merge": three_mode_merge,
    "robin-basic": robin_basic,
    "stefan-conservation": stefan_conservation,
    "stefan-spreading": stefan_spreading,
    "stefan-bistable-periodic": stefan_bistable_periodic,
    "halfline-periodic": halfline_periodic,
    "moving-straightened": moving_straightened,
    "radial-ball": radial_ball,
}


def builtin(name):
    try:
        return BUILTIN_SCENARIOS[name]()
    except KeyError:
        raise ConfigError(
            f"unknown builtin scenario {name!r}; available: "
            + ", ".join(sorted(BUILTIN_SCENARIOS))
        ) from None


# ---------------------------------------------------------------------------
# randomized families
# ---------------------------------------------------------------------------


def _count_sign_changes(values, tol=1e-12):
    signs = np.sign(values[np.abs(values) > tol])
    return int(np.sum(signs[:-1] != signs[1:]))


def _draw_initial_trig(rng, target_range=(1, 6), max_modes=6):
    """Sine polynomial with 1..6 interior sign changes (vanishes at 0 and 1,
    so it is compatible with homogeneous Dirichlet sides)."""
    xs = np.linspace(0.0, 1.0, 2001)[1:-1]
    for _ in range(200):
        amps = rng.normal(size=max_modes) / np.arange(1, max_modes + 1)
        values = sum(a * np.sin((k + 1) * np.pi * xs) for k, a in enumerate(amps))
        changes = _count_sign_changes(values)
        if target_range[0] <= changes <= target_range[1]:
            terms = [
                {"kind": "sin", "k": k + 1, "amp": float(a)} for k, a in enumerate(amps)
            ]
            return {"family": "trig", "terms": terms, "length": 1.0}, changes
    raise ConfigError("could not draw an initial profile with 1..6 sign changes")


def _draw_side(rng):
    kind = rng.choice(["dirichlet_zero", "neumann", "robin"])
    if kind == "robin":
        return {"kind": "robin", "beta": float(np.round(rng.uniform(0.2, 2.0), 6))}
    return {"kind": str(kind)}


def _draw_coefficient(rng, mean_range, amp_max, modulated=True):
    mean = float(rng.uniform(*mean_range))
    amp = float(rng.uniform(0.0, amp_max))
    k = int(rng.integers(1, 4))
    phase = float(rng.uniform(0.0, _TWO_PI))
    node = {
        "family": "trig",
        "mean": mean,
        "terms": [{"kind": "sin", "k": k, "amp": amp, "phase": phase}],
        "length": 1.0,
    }
    if modulated and rng.random() < 0.5:
        node["t_amplitude"] = float(rng.uniform(0.0, 0.15))
        node["t_period"] = float(rng.uniform(0.05, 0.2))
    return node


def randomized_linear(seed, index):
    """One scenario of the randomized linear monotonicity batch.

    Diffusivity stays inside [0.5, 2], drift and reaction-rate coefficients
    are bounded, boundary kinds mix homogeneous Dirichlet, Neumann and
    Robin, and the initial profile is a trig polynomial with 1..6 sign
    changes (compatible with Dirichlet sides by construction)."""
    rng = np.random.default_rng([int(seed), int(index), 0x51])
    a_node = _draw_coefficient(rng, (1.0, 1.4), 0.3)
    b_node = _draw_coefficient(rng, (-0.8, 0.8), 0.6)
    c_node = _draw_coefficient(rng, (-1.5, 1.5), 0.5)
    initial, changes = _draw_initial_trig(rng)
    return {
        "name": f"random-linear-{seed}-{index}",
        "coefficients": {
            "a": a_node,
            "b": b_node,
            "c": c_node,
            "bounds": {"a_min": 0.5, "a_max": 2.0, "b_max": 2.0, "c_max": 2.0},
        },
        "domain": {"left": 0.0, "right": 1.0},
        "boundary": {"left": _draw_side(rng), "right": _draw_side(rng)},
        "initial": initial,
        "time": {"horizon": 0.2, "dt": 5e-4},
        "grid": {"nodes": 401, "output_every": 1},
        "meta": {"sign_changes": changes},
    }


def randomized_radial(seed, index):
    """One scenario of the radial batch: unit ball in dimension 3, symmetry
    condition at the origin, Robin at the outer radius, even initial data."""
    rng = np.random.default_rng([int(seed), int(index), 0xBA11])
    c_node = _draw_coefficient(rng, (-1.5, 1.5), 0.5)
    xs = np.linspace(0.0, 1.0, 2001)[1:-1]
    for _ in range(200):
        amps = rng.normal(size=5) / np.arange(1, 6)
        shift = float(rng.normal() * 0.3)
        values = shift + sum(a * np.cos((k + 1) * np.pi * xs) for k, a in enumerate(amps))
        changes = _count_sign_changes(values)
        if 1 <= changes <= 6:
            break
    else:
        raise ConfigError("could not draw an even initial profile with 1..6 sign changes")
    initial = {
        "family": "trig",
        "mean": shift,
        "terms": [{"kind": "cos", "k": k + 1, "amp": float(a)} for k, a in enumerate(amps)],
        "length": 1.0,
    }
    return {
        "name": f"random-radial-{seed}-{index}",
        "coefficients": {"family": "radial_laplacian", "dimension": 3, "c": c_node},
        "domain": {"left": 0.0, "right": 1.0},
        "boundary": {
            "left": "neumann",
            "right": {"kind": "robin", "beta": float(np.round(rng.uniform(0.2, 2.0), 6))},
        },
        "initial": initial,
        "time": {"horizon": 0.2, "dt": 5e-4},
        "grid": {"nodes": 401, "output_every": 2},
        "meta": {"sign_changes": changes},
    }
