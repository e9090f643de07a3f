"""Builtin problem catalog.

Every entry returns a fully populated :class:`~clhjlab.problems.ProblemSpec`
with analytic derivatives and correct structural flags, and documents which
of the standing assumptions A1..A8 its default configuration satisfies (the
cross-check for ``validate_assumptions``).

Entries and their parameters (defaults in parentheses):

===================  =========================================================
burgers              quadratic flux u^2/2; params amplitude (1.0), mean (0.0),
                     frequency (1), sinusoidal initial data on the torus
linear-advection     f(u) = speed * u; params speed (1.0), amplitude (1.0)
flat-middle-flux     f(u) = drift*u + max(|u| - width, 0)^2, affine on
                     [-width, width]; params width (1.0), drift (2.0),
                     amplitude (0.5)
x-dependent-convex   f(x, u) = u^2/2 + phi(x) u with phi = phi_amplitude *
                     sin(2 pi x); params phi_amplitude (0.25), amplitude
                     (0.5), mean (0.0), alpha (0.0; constant diffusion)
heat                 pure diffusion, alpha constant; params alpha (1.0),
                     amplitude (1.0)
porous-medium-like   beta(u) = u |u|^(m-1) degenerate diffusion of a compact
                     bump on a truncated line; params m (2.0), amplitude
                     (1.0), radius (0.5), half_width (2.0)
plateau-beta         quadratic flux plus beta with beta' = max(|u| - w, 0),
                     flat on [-w, w]; params plateau_width (0.5),
                     amplitude (0.8)
===================  =========================================================
"""

from __future__ import annotations

import math

import numpy as np

from .errors import CatalogError
from .problems import (
    DiffusionModel,
    Domain,
    FluxModel,
    NOT_CHECKABLE,
    ProblemSpec,
    SATISFIED,
    VIOLATED,
)

TWO_PI = 2.0 * math.pi


def _zero_u(u):
    return np.zeros_like(np.asarray(u, dtype=float))


def _zero_xu(x, u):
    return np.zeros_like(np.asarray(u, dtype=float))


def _sine_u0(amplitude, mean, frequency):
    def u0(x):
        return mean + amplitude * np.sin(TWO_PI * frequency * np.asarray(x, dtype=float))
    return u0


def _require(cond, name, message):
    if not cond:
        raise CatalogError(f"{name}: {message}")


def _assumptions(**overrides):
    base = {k: SATISFIED for k in ("A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8")}
    base.update(overrides)
    return base


def _build_burgers(p):
    amplitude = float(p.pop("amplitude", 1.0))
    mean = float(p.pop("mean", 0.0))
    frequency = int(p.pop("frequency", 1))
    _require(0 < amplitude <= 4, "burgers", "amplitude must be in (0, 4]")
    _require(abs(mean) <= 2, "burgers", "|mean| must be <= 2")
    _require(1 <= frequency <= 8, "burgers", "frequency must be in 1..8")
    flux = FluxModel(
        f=lambda x, u: 0.5 * np.asarray(u, dtype=float) ** 2,
        f_u=lambda x, u: np.asarray(u, dtype=float),
        f_x=_zero_xu,
        x_independent=True,
        convexity_tag="strictly-convex",
    )
    return (flux, DiffusionModel.zero(), _sine_u0(amplitude, mean, frequency),
            Domain("periodic-torus"))


def _build_linear_advection(p):
    speed = float(p.pop("speed", 1.0))
    amplitude = float(p.pop("amplitude", 1.0))
    _require(0.25 <= abs(speed) <= 4, "linear-advection", "|speed| must be in [0.25, 4]")
    _require(0 < amplitude <= 4, "linear-advection", "amplitude must be in (0, 4]")
    flux = FluxModel(
        f=lambda x, u: speed * np.asarray(u, dtype=float),
        f_u=lambda x, u: np.full_like(np.asarray(u, dtype=float), speed),
        f_x=_zero_xu,
        x_independent=True,
        convexity_tag="general",
    )
    return flux, DiffusionModel.zero(), _sine_u0(amplitude, 0.0, 1), Domain("periodic-torus")


def _build_flat_middle(p):
    width = float(p.pop("width", 1.0))
    drift = float(p.pop("drift", 2.0))
    amplitude = float(p.pop("amplitude", 0.5))
    _require(0 < width <= 2, "flat-middle-flux", "width must be in (0, 2]")
    _require(abs(drift) <= 4, "flat-middle-flux", "|drift| must be <= 4")
    _require(0 < amplitude <= 4, "flat-middle-flux", "amplitude must be in (0, 4]")

    def excess(u):
        return np.maximum(np.abs(np.asarray(u, dtype=float)) - width, 0.0)

    flux = FluxModel(
        f=lambda x, u: drift * np.asarray(u, dtype=float) + excess(u) ** 2,
        f_u=lambda x, u: drift + 2.0 * excess(u) * np.sign(np.asarray(u, dtype=float)),
        f_x=_zero_xu,
        x_independent=True,
        convexity_tag="general",
    )
    return flux, DiffusionModel.zero(), _sine_u0(amplitude, 0.0, 1), Domain("periodic-torus")


def _build_x_dependent_convex(p):
    phi_amplitude = float(p.pop("phi_amplitude", 0.25))
    amplitude = float(p.pop("amplitude", 0.5))
    mean = float(p.pop("mean", 0.0))
    alpha = float(p.pop("alpha", 0.0))
    _require(0 < phi_amplitude <= 1, "x-dependent-convex", "phi_amplitude must be in (0, 1]")
    _require(0 <= amplitude <= 4, "x-dependent-convex", "amplitude must be in [0, 4]")
    _require(abs(mean) <= 2, "x-dependent-convex", "|mean| must be <= 2")
    _require(0 <= alpha <= 2, "x-dependent-convex", "alpha must be in [0, 2]")

    def phi(x):
        return phi_amplitude * np.sin(TWO_PI * np.asarray(x, dtype=float))

    def phi_x(x):
        return phi_amplitude * TWO_PI * np.cos(TWO_PI * np.asarray(x, dtype=float))

    flux = FluxModel(
        f=lambda x, u: 0.5 * np.asarray(u, dtype=float) ** 2 + phi(x) * np.asarray(u, dtype=float),
        f_u=lambda x, u: np.asarray(u, dtype=float) + phi(x),
        f_x=lambda x, u: phi_x(x) * np.asarray(u, dtype=float),
        x_independent=False,
        convexity_tag="strictly-convex",
    )
    if alpha > 0:
        diffusion = DiffusionModel(
            alpha=lambda x: np.full_like(np.asarray(x, dtype=float), alpha),
            alpha_x=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            beta=_zero_u, beta_prime=_zero_u)
    else:
        diffusion = DiffusionModel.zero()
    return flux, diffusion, _sine_u0(amplitude, mean, 1), Domain("periodic-torus")


def _build_heat(p):
    alpha = float(p.pop("alpha", 1.0))
    amplitude = float(p.pop("amplitude", 1.0))
    _require(0 < alpha <= 4, "heat", "alpha must be in (0, 4]")
    _require(0 < amplitude <= 4, "heat", "amplitude must be in (0, 4]")
    flux = FluxModel(f=_zero_xu, f_u=_zero_xu, f_x=_zero_xu,
                     x_independent=True, convexity_tag="general")
    diffusion = DiffusionModel(
        alpha=lambda x: np.full_like(np.asarray(x, dtype=float), alpha),
        alpha_x=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        beta=_zero_u,
        beta_prime=_zero_u,
    )
    return flux, diffusion, _sine_u0(amplitude, 0.0, 1), Domain("periodic-torus")


def _build_porous_medium(p):
    m = float(p.pop("m", 2.0))
    amplitude = float(p.pop("amplitude", 1.0))
    radius = float(p.pop("radius", 0.5))
    half_width = float(p.pop("half_width", 2.0))
    _require(1.5 <= m <= 4, "porous-medium-like", "m must be in [1.5, 4]")
    _require(0 < amplitude <= 2, "porous-medium-like", "amplitude must be in (0, 2]")
    _require(0 < radius <= 1, "porous-medium-like", "radius must be in (0, 1]")
    _require(1 <= half_width <= 8, "porous-medium-like", "half_width must be in [1, 8]")

    flux = FluxModel(f=_zero_xu, f_u=_zero_xu, f_x=_zero_xu,
                     x_independent=True, convexity_tag="general")
    diffusion = DiffusionModel(
        alpha=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        alpha_x=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        beta=lambda u: np.asarray(u, dtype=float) * np.abs(np.asarray(u, dtype=float)) ** (m - 1),
        beta_prime=lambda u: m * np.abs(np.asarray(u, dtype=float)) ** (m - 1),
    )

    def u0(x):
        s = np.asarray(x, dtype=float) / radius
        return amplitude * np.maximum(1.0 - s * s, 0.0) ** 2

    return flux, diffusion, u0, Domain("truncated-line", half_width=half_width)


def _build_plateau_beta(p):
    w = float(p.pop("plateau_width", 0.5))
    amplitude = float(p.pop("amplitude", 0.8))
    _require(0 < w <= 2, "plateau-beta", "plateau_width must be in (0, 2]")
    _require(0 < amplitude <= 4, "plateau-beta", "amplitude must be in (0, 4]")

    flux = FluxModel(
        f=lambda x, u: 0.5 * np.asarray(u, dtype=float) ** 2,
        f_u=lambda x, u: np.asarray(u, dtype=float),
        f_x=_zero_xu,
        x_independent=True,
        convexity_tag="strictly-convex",
    )

    def excess(u):
        return np.maximum(np.abs(np.asarray(u, dtype=float)) - w, 0.0)

    diffusion = DiffusionModel(
        alpha=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        alpha_x=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        beta=lambda u: 0.5 * np.sign(np.asarray(u, dtype=float)) * excess(u) ** 2,
        beta_prime=excess,
    )
    return flux, diffusion, _sine_u0(amplitude, 0.0, 1), Domain("periodic-torus")


_CATALOG = {
    "burgers": (
        _build_burgers,
        "amplitude (0,4], mean [-2,2], frequency 1..8",
        _assumptions(),
    ),
    "linear-advection": (
        _build_linear_advection,
        "speed |.| in [0.25,4], amplitude (0,4]",
        _assumptions(A8=VIOLATED),
    ),
    "flat-middle-flux": (
        _build_flat_middle,
        "width (0,2], drift [-4,4], amplitude (0,4]",
        _assumptions(A8=VIOLATED),
    ),
    "x-dependent-convex": (
        _build_x_dependent_convex,
        "phi_amplitude (0,1], amplitude [0,4], mean [-2,2], alpha [0,2]",
        _assumptions(A7=VIOLATED),
    ),
    "heat": (
        _build_heat,
        "alpha (0,4], amplitude (0,4]",
        _assumptions(A1=NOT_CHECKABLE, A7=VIOLATED, A8=VIOLATED),
    ),
    "porous-medium-like": (
        _build_porous_medium,
        "m [1.5,4], amplitude (0,2], radius (0,1], half_width [1,8]",
        _assumptions(A1=NOT_CHECKABLE, A6=NOT_CHECKABLE, A8=VIOLATED),
    ),
    "plateau-beta": (
        _build_plateau_beta,
        "plateau_width (0,2], amplitude (0,4]",
        _assumptions(A8=VIOLATED),
    ),
}


def catalog_names() -> list:
    return sorted(_CATALOG)


def catalog_param_docs(name: str) -> str:
    if name not in _CATALOG:
        raise CatalogError(f"unknown catalog entry {name!r}")
    return _CATALOG[name][1]


def documented_assumptions(name: str) -> dict:
    """Expected validate_assumptions statuses for the entry's defaults."""
    if name not in _CATALOG:
        raise CatalogError(f"unknown catalog entry {name!r}")
    return dict(_CATALOG[name][2])


def builtin_catalog(name: str, params: dict | None = None) -> ProblemSpec:
    """Instantiate a catalog problem.

    ``params`` may also carry ``epsilon`` and, for periodic entries, the
    domain overrides ``domain_kind``/``half_width``.  Unknown keys and values
    outside the documented ranges raise :class:`CatalogError`.
    """
    if name not in _CATALOG:
        raise CatalogError(f"unknown catalog entry {name!r}; known: {catalog_names()}")
    p = dict(params or {})
    epsilon = float(p.pop("epsilon", 0.0))
    domain_kind = p.pop("domain_kind", None)
    half_width = p.pop("half_width_override", None)

    builder = _CATALOG[name][0]
    flux, diffusion, u0, domain = builder(p)
    if p:
        raise CatalogError(f"{name}: unknown parameters {sorted(p)}")
    if domain_kind is not None:
        hw = float(half_width) if half_width is not None else 2.0
        domain = Domain(domain_kind, half_width=hw if domain_kind == "truncated-line" else 0.0)
    return ProblemSpec(flux=flux, diffusion=diffusion, u0=u0, domain=domain,
                       epsilon=epsilon, name=name)
