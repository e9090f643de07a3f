"""Problem definitions and structural analysis.

A problem instance couples a flux f(x, u), a diffusion pair (alpha(x),
beta(u)), initial data u0, a domain, and a viscosity parameter epsilon.
The same instance drives both the conservation-law solver

    u_t + f(x, u)_x = (alpha(x) u_x + beta(u)_x)_x + eps u_xx

and the Hamilton-Jacobi solver for the value function v with u = v_x.

This module also provides two structural tools:

* ``validate_assumptions`` checks the standing hypotheses A1..A8 by dense
  sampling on a compact working box.  Verdicts mean "no violation found at
  this sampling budget", never a proof.
* ``detect_affine_interval`` finds the maximal interval [a, b] around u = 0
  on which the flux is affine and beta is constant, together with the drift
  speed d of the induced linear transport.  That interval controls the
  long-time profile of the Hamilton-Jacobi flow.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import EvaluationError, StructuralError
from .grids import Grid, OUTFLOW, PERIODIC

ASSUMPTION_NAMES = ("A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8")

SATISFIED = "satisfied"
VIOLATED = "violated"
NOT_CHECKABLE = "not-checkable"

#: scan points used by detect_affine_interval over the working range
AFFINE_SCAN_POINTS = 4096
#: bisection width for the interval endpoints
AFFINE_ENDPOINT_TOL = 1e-10


@dataclass(frozen=True)
class FluxModel:
    """Flux f(x, u) with analytic partial derivatives.

    All callables must accept equal-shaped numpy arrays and broadcast like
    ufuncs.  ``x_independent`` asserts f(x, u) == f(u); ``convexity_tag`` is
    "strictly-convex" when u -> f(x, u) is strictly convex for every x,
    otherwise "general".
    """

    f: Callable
    f_u: Callable
    f_x: Callable
    x_independent: bool = False
    convexity_tag: str = "general"

    def __post_init__(self):
        if self.convexity_tag not in ("strictly-convex", "general"):
            raise ValueError(f"bad convexity_tag {self.convexity_tag!r}")

    def f0(self) -> float:
        """f at (x=0, u=0); the gauge constant of the induced HJ flow."""
        return float(np.asarray(self.f(np.float64(0.0), np.float64(0.0))))


@dataclass(frozen=True)
class DiffusionModel:
    """Diffusion pair alpha(x) >= 0 and nondecreasing beta(u), with derivatives."""

    alpha: Callable
    alpha_x: Callable
    beta: Callable
    beta_prime: Callable

    @staticmethod
    def zero() -> "DiffusionModel":
        z = lambda s: np.zeros_like(np.asarray(s, dtype=float))
        return DiffusionModel(alpha=z, alpha_x=z, beta=z, beta_prime=z)


@dataclass(frozen=True)
class Domain:
    """Spatial domain: the unit torus, or a symmetric truncation of the line."""

    kind: str  # "periodic-torus" | "truncated-line"
    half_width: float = 0.0

    def __post_init__(self):
        if self.kind not in ("periodic-torus", "truncated-line"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind == "truncated-line" and not self.half_width > 0:
            raise ValueError("truncated-line domain needs half_width > 0")

    @property
    def length(self) -> float:
        # the torus always has unit length
        return 1.0 if self.kind == "periodic-torus" else 2.0 * self.half_width

    @property
    def x_left(self) -> float:
        return 0.0 if self.kind == "periodic-torus" else -self.half_width

    @property
    def periodic(self) -> bool:
        return self.kind == "periodic-torus"

    def build_grid(self, n_cells: int) -> Grid:
        boundary = PERIODIC if self.periodic else OUTFLOW
        return Grid(n_cells=n_cells, x_left=self.x_left, length=self.length,
                    boundary=boundary)


@dataclass(frozen=True)
class ProblemSpec:
    """A complete problem instance.

    The HJ initial value v0 is always derived as the running integral of u0
    anchored at the left domain edge; it is never stored independently.
    ``working_range`` is the a-priori state box inside which all model
    callables are sampled; it defaults to the sampled range of u0 padded by
    one unit on each side, which covers the maximum-principle bound for
    x-independent fluxes.
    """

    flux: FluxModel
    diffusion: DiffusionModel
    u0: Callable
    domain: Domain
    epsilon: float = 0.0
    working_range: Optional[tuple] = None
    name: str = "custom"

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.working_range is None:
            xs = np.linspace(self.domain.x_left,
                             self.domain.x_left + self.domain.length, 4097)
            vals = np.asarray(self.u0(xs), dtype=float)
            if not np.all(np.isfinite(vals)):
                raise EvaluationError("u0 returned non-finite values")
            object.__setattr__(
                self, "working_range",
                (float(vals.min()) - 1.0, float(vals.max()) + 1.0))
        lo, hi = self.working_range
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise ValueError(f"bad working_range {self.working_range}")
        xs = np.linspace(self.domain.x_left,
                         self.domain.x_left + self.domain.length, 1025)
        vals = np.asarray(self.u0(xs), dtype=float)
        if vals.min() < lo - 1e-12 or vals.max() > hi + 1e-12:
            raise ValueError("u0 values fall outside working_range")

    def with_epsilon(self, epsilon: float) -> "ProblemSpec":
        from dataclasses import replace
        return replace(self, epsilon=float(epsilon))

    def initial_cell_field(self, grid: Grid, epsilon: Optional[float] = None):
        """Sample u0 at cell centers (midpoint cell-average convention)."""
        from .grids import CellField
        values = np.asarray(self.u0(grid.cell_centers()), dtype=float)
        eps = self.epsilon if epsilon is None else epsilon
        return CellField(values=values, grid=grid, time=0.0, epsilon=eps)


@dataclass(frozen=True)
class AffineInterval:
    """Maximal interval [a, b] around 0 where f is affine and beta constant.

    On [a, b] the flux satisfies f(u) = c1 u + c2 and beta(u) = c3, so the
    dynamics reduce to linear transport at the drift speed d = c1.
    """

    a: float
    b: float
    d: float
    c1: float
    c2: float
    c3: float
    degenerate: bool

    def __post_init__(self):
        if not (self.a <= 0.0 <= self.b):
            raise ValueError(f"affine interval must contain 0, got [{self.a}, {self.b}]")


@dataclass(frozen=True)
class AssumptionVerdict:
    status: str  # satisfied | violated | not-checkable
    witness: Optional[dict] = None
    budget: Optional[dict] = None
    note: str = ""

    def __post_init__(self):
        if self.status not in (SATISFIED, VIOLATED, NOT_CHECKABLE):
            raise ValueError(f"bad status {self.status!r}")
        if self.witness is None and self.budget is None:
            raise ValueError("verdict needs a witness or the sampling budget")


@dataclass(frozen=True)
class AssumptionReport:
    verdicts: dict

    def status(self, name: str) -> str:
        return self.verdicts[name].status

    def violated(self) -> list:
        return [k for k, v in sorted(self.verdicts.items()) if v.status == VIOLATED]

    def to_text(self) -> str:
        lines = []
        for name in sorted(self.verdicts):
            v = self.verdicts[name]
            extra = ""
            if v.witness is not None:
                extra = f" witness={v.witness}"
            if v.note:
                extra += f" ({v.note})"
            lines.append(f"{name}: {v.status}{extra}")
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# derivative consistency helpers (used by tests and validators)

def derivative_consistency(flux: FluxModel, working_range, domain: Domain,
                           n_samples: int = 200, seed: int = 0):
    """Max relative error of f_u and f_x against centered differences of f."""
    rng = np.random.default_rng(seed)
    lo, hi = working_range
    xs = domain.x_left + rng.random(n_samples) * domain.length
    us = lo + rng.random(n_samples) * (hi - lo)
    hu = 1e-6 * max(1.0, hi - lo)
    hx = 1e-6 * max(1.0, domain.length)
    fu_fd = (np.asarray(flux.f(xs, us + hu)) - np.asarray(flux.f(xs, us - hu))) / (2 * hu)
    fx_fd = (np.asarray(flux.f(xs + hx, us)) - np.asarray(flux.f(xs - hx, us))) / (2 * hx)
    fu = np.asarray(flux.f_u(xs, us), dtype=float)
    fx = np.asarray(flux.f_x(xs, us), dtype=float)
    scale_u = np.maximum(1.0, np.abs(fu))
    scale_x = np.maximum(1.0, np.abs(fx))
    return (float(np.max(np.abs(fu - fu_fd) / scale_u)),
            float(np.max(np.abs(fx - fx_fd) / scale_x)))


def beta_consistency(diffusion: DiffusionModel, working_range,
                     n_samples: int = 200, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    lo, hi = working_range
    us = lo + rng.random(n_samples) * (hi - lo)
    h = 1e-6 * max(1.0, hi - lo)
    bp_fd = (np.asarray(diffusion.beta(us + h)) - np.asarray(diffusion.beta(us - h))) / (2 * h)
    bp = np.asarray(diffusion.beta_prime(us), dtype=float)
    return float(np.max(np.abs(bp - bp_fd) / np.maximum(1.0, np.abs(bp))))


# ---------------------------------------------------------------------------
# affine interval detection

def detect_affine_interval(flux: FluxModel, diffusion: DiffusionModel,
                           working_range, tol: float = 1e-6,
                           scan_points: int = AFFINE_SCAN_POINTS) -> AffineInterval:
    """Locate the maximal affine/constant interval [a, b] containing u = 0.

    A scan point u passes when the centered second difference of f and the
    one-sided first differences of beta, both divided by the scan step so the
    test is resolution independent, stay below ``tol``.  The surviving run of
    scan points around 0 is then sharpened by bisection on the same predicate,
    which makes the endpoints stable under grid refinement up to one scan
    cell.  The interval is taken closed.
    """
    if not flux.x_independent:
        raise StructuralError("affine interval detection requires an x-independent flux")
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    lo, hi = float(working_range[0]), float(working_range[1])
    if not (lo <= 0.0 <= hi):
        raise ValueError("working_range must contain u = 0")

    h = (hi - lo) / (scan_points - 1)

    def f_of(u):
        return np.asarray(flux.f(np.zeros_like(u), u), dtype=float)

    def beta_of(u):
        return np.asarray(diffusion.beta(u), dtype=float)

    def ok(u):
        u = np.asarray(u, dtype=float)
        d2f = np.abs(f_of(u + h) - 2.0 * f_of(u) + f_of(u - h)) / h**2
        db_r = np.abs(beta_of(u + h) - beta_of(u)) / h
        db_l = np.abs(beta_of(u) - beta_of(u - h)) / h
        vals = np.stack([d2f, db_r, db_l])
        if not np.all(np.isfinite(vals)):
            raise EvaluationError("non-finite flux or beta during affine scan")
        return (d2f <= tol) & (db_r <= tol) & (db_l <= tol)

    grid = np.linspace(lo, hi, scan_points)
    passes = ok(grid)
    i0 = int(np.argmin(np.abs(grid)))

    def f0():
        return float(f_of(np.float64(0.0)))

    def fu0():
        return float(np.asarray(flux.f_u(np.float64(0.0), np.float64(0.0))))

    c2 = f0()
    c3 = float(beta_of(np.float64(0.0)))

    if not passes[i0] and not ok(np.float64(0.0)):
        d = fu0()
        return AffineInterval(a=0.0, b=0.0, d=d, c1=d, c2=c2, c3=c3, degenerate=True)

    # expand the passing run around u = 0
    il = i0
    while il > 0 and passes[il - 1]:
        il -= 1
    ir = i0
    while ir < scan_points - 1 and passes[ir + 1]:
        ir += 1

    def bisect(inside, outside):
        while abs(outside - inside) > AFFINE_ENDPOINT_TOL:
            mid = 0.5 * (inside + outside)
            if bool(ok(np.float64(mid))):
                inside = mid
            else:
                outside = mid
        return inside

    a = grid[il] if il == 0 else bisect(grid[il], grid[il - 1])
    b = grid[ir] if ir == scan_points - 1 else bisect(grid[ir], grid[ir + 1])
    a = min(a, 0.0)
    b = max(b, 0.0)

    degenerate = (b - a) <= 2.0 * h
    if b - a > 2.0 * h:
        fa = float(f_of(np.float64(a)))
        fb = float(f_of(np.float64(b)))
        d = (fb - fa) / (b - a)
    else:
        d = fu0()
    return AffineInterval(a=float(a), b=float(b), d=float(d), c1=float(d),
                          c2=c2, c3=c3, degenerate=bool(degenerate))


# ---------------------------------------------------------------------------
# assumption validation

def _sample_axes(spec: ProblemSpec, n_x: int = 512, n_u: int = 257):
    dom = spec.domain
    xs = np.linspace(dom.x_left, dom.x_left + dom.length, n_x)
    lo, hi = spec.working_range
    us = np.linspace(lo, hi, n_u)
    return xs, us


def _check_finite(name, arr, xs=None, us=None):
    arr = np.asarray(arr, dtype=float)
    if np.all(np.isfinite(arr)):
        return
    idx = np.unravel_index(int(np.argmax(~np.isfinite(arr))), arr.shape)
    x = None if xs is None else float(np.broadcast_to(xs, arr.shape)[idx])
    u = None if us is None else float(np.broadcast_to(us, arr.shape)[idx])
    raise EvaluationError(f"{name} evaluated non-finite at x={x}, u={u}", x=x, u=u)


def validate_assumptions(spec: ProblemSpec, which=None) -> AssumptionReport:
    """Check the requested standing assumptions by sampling.

    ``which`` is an iterable of names from A1..A8 (default: all).  Each
    verdict records either a concrete witness of the violation or the
    sampling budget that found no violation.  The coercivity condition in A1
    is a limit as |u| grows, so it is probed on escape boxes at 2x and 4x the
    working range and reported not-checkable when the probe is flat.
    """
    which = set(ASSUMPTION_NAMES if which is None else which)
    unknown = which - set(ASSUMPTION_NAMES)
    if unknown:
        raise ValueError(f"unknown assumptions {sorted(unknown)}")

    xs, us = _sample_axes(spec)
    budget = {"n_x": len(xs), "n_u": len(us)}
    X, U = np.meshgrid(xs, us, indexing="ij")
    flux, diff, dom = spec.flux, spec.diffusion, spec.domain

    fxu = np.asarray(flux.f(X, U), dtype=float)
    _check_finite("f", fxu, X, U)
    fu = np.asarray(flux.f_u(X, U), dtype=float)
    _check_finite("f_u", fu, X, U)
    fx = np.asarray(flux.f_x(X, U), dtype=float)
    _check_finite("f_x", fx, X, U)
    alpha = np.asarray(diff.alpha(xs), dtype=float)
    _check_finite("alpha", alpha, xs)
    alpha_x = np.asarray(diff.alpha_x(xs), dtype=float)
    _check_finite("alpha_x", alpha_x, xs)
    beta_p = np.asarray(diff.beta_prime(us), dtype=float)
    _check_finite("beta_prime", beta_p, us=us)

    alpha_sup = float(np.max(np.abs(alpha)))
    beta_p_sup = float(np.max(np.abs(beta_p)))

    verdicts = {}

    if "A1" in which:
        verdicts["A1"] = _check_a1(spec, xs, alpha_sup, beta_p_sup, budget)

    if "A2" in which:
        # integrability of f_x and f_xx over the evaluated window
        hx = 1e-5 * max(1.0, dom.length)
        fxx = (np.asarray(flux.f_x(X + hx, U)) - np.asarray(flux.f_x(X - hx, U))) / (2 * hx)
        m1 = np.trapezoid(np.max(np.abs(fx), axis=1), xs)
        m2 = np.trapezoid(np.max(np.abs(fxx), axis=1), xs)
        if np.isfinite(m1) and np.isfinite(m2):
            verdicts["A2"] = AssumptionVerdict(
                SATISFIED, budget=dict(budget, int_fx=float(m1), int_fxx=float(m2)),
                note="integrated over the evaluated window only")
        else:
            verdicts["A2"] = AssumptionVerdict(VIOLATED,
                                               witness={"int_fx": float(m1), "int_fxx": float(m2)})

    if "A3" in which:
        hx = 1e-5 * max(1.0, dom.length)
        fux = (np.asarray(flux.f_u(X + hx, U)) - np.asarray(flux.f_u(X - hx, U))) / (2 * hx)
        m1 = float(np.max(np.abs(fu)))
        m2 = float(np.max(np.abs(fux)))
        verdicts["A3"] = AssumptionVerdict(
            SATISFIED, budget=dict(budget, sup_fu=m1, sup_fux=m2))

    if "A4" in which:
        bad_alpha = alpha < -1e-14
        bad_beta = beta_p < -1e-14
        if np.any(bad_alpha):
            i = int(np.argmax(bad_alpha))
            verdicts["A4"] = AssumptionVerdict(
                VIOLATED, witness={"x": float(xs[i]), "alpha": float(alpha[i])})
        elif np.any(bad_beta):
            i = int(np.argmax(bad_beta))
            verdicts["A4"] = AssumptionVerdict(
                VIOLATED, witness={"u": float(us[i]), "beta_prime": float(beta_p[i])})
        elif not np.all(np.isfinite(alpha_x)):
            verdicts["A4"] = AssumptionVerdict(VIOLATED, witness={"alpha_x": "non-finite"})
        else:
            verdicts["A4"] = AssumptionVerdict(SATISFIED, budget=budget)

    if "A5" in which:
        verdicts["A5"] = _check_a5(spec, budget)

    if "A6" in which:
        verdicts["A6"] = _check_a6(spec, us, budget)

    if "A7" in which:
        x_dep = float(np.max(np.abs(fxu - fxu[:1, :])))
        alpha_max = float(np.max(np.abs(alpha)))
        if x_dep > 1e-10 * (1 + np.max(np.abs(fxu))):
            i, j = np.unravel_index(int(np.argmax(np.abs(fxu - fxu[:1, :]))), fxu.shape)
            verdicts["A7"] = AssumptionVerdict(
                VIOLATED, witness={"x": float(xs[i]), "u": float(us[j]),
                                   "deviation": x_dep})
        elif alpha_max > 1e-14:
            i = int(np.argmax(np.abs(alpha)))
            verdicts["A7"] = AssumptionVerdict(
                VIOLATED, witness={"x": float(xs[i]), "alpha": alpha_max})
        else:
            verdicts["A7"] = AssumptionVerdict(SATISFIED, budget=budget)

    if "A8" in which:
        h = (us[1] - us[0])
        d2 = (fxu[:, 2:] - 2 * fxu[:, 1:-1] + fxu[:, :-2]) / h**2
        min_d2 = float(np.min(d2))
        beta_dev = float(np.max(np.abs(np.asarray(diff.beta(us), dtype=float))))
        if min_d2 <= 1e-10:
            i, j = np.unravel_index(int(np.argmin(d2)), d2.shape)
            verdicts["A8"] = AssumptionVerdict(
                VIOLATED, witness={"x": float(xs[i]), "u": float(us[j + 1]),
                                   "second_difference": min_d2},
                note="u -> f(x, u) not strictly convex at sampled points")
        elif beta_dev > 1e-12:
            verdicts["A8"] = AssumptionVerdict(
                VIOLATED, witness={"max_abs_beta": beta_dev}, note="beta not identically 0")
        else:
            verdicts["A8"] = AssumptionVerdict(
                SATISFIED, budget=dict(budget, min_second_difference=min_d2))

    return AssumptionReport(verdicts={k: verdicts[k] for k in sorted(verdicts)})


def _check_a1(spec, xs, alpha_sup, beta_p_sup, budget):
    """Coercivity probe: (1/2) f^2 - (|alpha| + |beta'| + 1) |f_x u| must grow."""
    flux = spec.flux
    lo, hi = spec.working_range
    edge = max(abs(lo), abs(hi), 1.0)
    K = alpha_sup + beta_p_sup + 1.0

    def phi(u):
        uu = np.full_like(xs, u)
        f = np.asarray(flux.f(xs, uu), dtype=float)
        fx = np.asarray(flux.f_x(xs, uu), dtype=float)
        vals = 0.5 * f**2 - K * np.abs(fx * u)
        _check_finite("A1 expression", vals, xs)
        i = int(np.argmin(vals))
        return float(vals[i]), float(xs[i])

    ladder = []
    for scale in (1.0, 2.0, 4.0):
        for sgn in (-1.0, 1.0):
            u = sgn * scale * edge
            val, xw = phi(u)
            ladder.append((scale, u, val, xw))

    by_scale = {}
    for scale, u, val, xw in ladder:
        by_scale.setdefault(scale, []).append((val, u, xw))
    mins = {s: min(v) for s, v in by_scale.items()}
    v1, v2, v4 = mins[1.0][0], mins[2.0][0], mins[4.0][0]

    # the limit lives at the tail: judge by the outermost probes, allowing a
    # dip at the intermediate scale before quartic-type growth takes over
    span = max(abs(v1), abs(v2), abs(v4), 1.0)
    margin = 1e-9 * span
    if v4 < v2 - margin:
        val, u, xw = mins[4.0]
        return AssumptionVerdict(
            VIOLATED, witness={"u": u, "x": xw, "value": val},
            note="coercivity expression still decreasing at 4x the working range")
    if v4 > max(v1, v2) + margin and v4 > 0.0:
        return AssumptionVerdict(
            SATISFIED, budget=dict(budget, escape_values=(v1, v2, v4)),
            note="growth observed up to 4x the working range only")
    return AssumptionVerdict(
        NOT_CHECKABLE, budget=dict(budget, escape_values=(v1, v2, v4)),
        note="coercivity expression flat or ambiguous on the escape ladder")


def _check_a5(spec, budget):
    """u0 Lipschitz and of bounded variation, by two-resolution sampling."""
    dom = spec.domain
    out = {}
    for n in (2048, 4096):
        xs = np.linspace(dom.x_left, dom.x_left + dom.length, n + 1)
        v = np.asarray(spec.u0(xs), dtype=float)
        _check_finite("u0", v, xs)
        slopes = np.abs(np.diff(v)) / (xs[1] - xs[0])
        out[n] = (float(np.max(slopes)), float(np.sum(np.abs(np.diff(v)))))
    s_coarse, _ = out[2048]
    s_fine, tv_fine = out[4096]
    if s_fine > 1.8 * s_coarse and s_fine > 10.0:
        # slope keeps doubling under refinement: data looks discontinuous
        return AssumptionVerdict(
            VIOLATED,
            witness={"max_slope_coarse": s_coarse, "max_slope_fine": s_fine},
            note="u0 slope doubles under grid refinement")
    return AssumptionVerdict(
        SATISFIED, budget=dict(budget, max_slope=s_fine, total_variation=tv_fine))


def _check_a6(spec, us, budget):
    if not spec.domain.periodic:
        return AssumptionVerdict(
            NOT_CHECKABLE, budget=budget,
            note="domain is a truncated line; periodicity not applicable")
    flux, diff = spec.flux, spec.diffusion
    zeros = np.zeros_like(us)
    ones = np.ones_like(us)
    df = np.max(np.abs(np.asarray(flux.f(zeros, us)) - np.asarray(flux.f(ones, us))))
    da = abs(float(np.asarray(diff.alpha(np.float64(0.0))))
             - float(np.asarray(diff.alpha(np.float64(1.0)))))
    du = abs(float(np.asarray(spec.u0(np.float64(0.0))))
             - float(np.asarray(spec.u0(np.float64(1.0)))))
    worst = max(float(df), da, du)
    if worst > 1e-10:
        return AssumptionVerdict(VIOLATED, witness={"period_mismatch": worst})
    return AssumptionVerdict(SATISFIED, budget=dict(budget, period_mismatch=worst))
