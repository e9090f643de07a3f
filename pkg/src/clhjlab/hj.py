"""Monotone finite-difference solver for the quasilinear equation

    v_t + f(x, v_x) = (alpha(x) + beta'(v_x)) v_xx + eps v_xx

The Hamiltonian is discretized with the Lax-Friedrichs form

    H(p-, p+, x) = f(x, (p- + p+)/2) - theta (p+ - p-)/2

which is consistent and monotone once theta dominates |f_u| over the slope
range the run visits.  The degenerate second-order term is discretized as
the slope-space flux difference (beta(D+ v) - beta(D- v))/dx; this equals
beta'(s) D2 v for some s between the one-sided slopes, stays well defined
where beta' vanishes, and keeps the whole update provably monotone, which
the comparison and contraction guarantees rely on.

``hopf_lax_oracle`` provides the classical variational representation for
the first-order convex x-independent subcase, used as an independent
reference.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import EvaluationError, StabilityError, StructuralError
from .grids import Grid, NodalField
from .problems import FluxModel, ProblemSpec
from .transforms import primitive


@dataclass(frozen=True)
class HJSchemeConfig:
    """Numerical parameters of a Hamilton-Jacobi run.

    ``theta`` set to None derives the dissipation from the measured slope
    range of v0 (inflated by ``theta_inflation``) joined with the problem's
    working range; an explicit theta is validated against the inflated
    initial slopes.  ``epsilon`` None inherits the problem's value.
    """

    numerical_hamiltonian: str = "lax-friedrichs"
    theta: Optional[float] = None
    theta_inflation: float = 0.5
    cfl: float = 0.45
    epsilon: Optional[float] = None
    max_dt: Optional[float] = None

    def __post_init__(self):
        if self.numerical_hamiltonian != "lax-friedrichs":
            raise ValueError(f"unknown Hamiltonian {self.numerical_hamiltonian!r}")
        if not (0.0 < self.cfl <= 1.0):
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.theta is not None and self.theta < 0:
            raise ValueError("theta must be >= 0")
        if self.theta_inflation < 0:
            raise ValueError("theta_inflation must be >= 0")
        if self.epsilon is not None and self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.max_dt is not None and not self.max_dt > 0:
            raise ValueError("max_dt must be positive")

    def resolve_epsilon(self, spec: ProblemSpec) -> float:
        return spec.epsilon if self.epsilon is None else self.epsilon


def numerical_hamiltonian(p_minus: float, p_plus: float, x: float,
                          flux: FluxModel, theta: float) -> float:
    """Lax-Friedrichs numerical Hamiltonian at one node."""
    mid = 0.5 * (p_minus + p_plus)
    f = float(np.asarray(flux.f(np.float64(x), np.float64(mid))))
    out = f - 0.5 * theta * (p_plus - p_minus)
    if not np.isfinite(out):
        raise EvaluationError(f"Hamiltonian non-finite at x={x}", x=x, u=mid)
    return out


def _max_abs_fu(flux: FluxModel, xs, p_lo, p_hi) -> float:
    ps = np.linspace(p_lo, p_hi, 513)
    shape = (len(xs), len(ps))
    X = np.broadcast_to(np.asarray(xs)[:, None], shape)
    P = np.broadcast_to(ps[None, :], shape)
    return float(np.max(np.abs(np.asarray(flux.f_u(X, P), dtype=float))))


class _HJWorkspace:
    def __init__(self, spec: ProblemSpec, config: HJSchemeConfig, grid: Grid,
                 epsilon: float, v0_values, mean_slope):
        self.spec = spec
        self.config = config
        self.grid = grid
        self.epsilon = float(epsilon)
        self.dx = grid.dx
        self.nodes = grid.node_positions()
        self.alpha_nodes = np.asarray(spec.diffusion.alpha(self.nodes), dtype=float)
        self.mean_slope = float(mean_slope)

        dp, dm = self.one_sided_slopes(np.asarray(v0_values, dtype=float))
        s_lo = float(min(dp.min(), dm.min()))
        s_hi = float(max(dp.max(), dm.max()))
        center, half = 0.5 * (s_lo + s_hi), 0.5 * (s_hi - s_lo)
        infl = 1.0 + config.theta_inflation
        inflated = (center - infl * half, center + infl * half)

        if config.theta is None:
            lo, hi = spec.working_range
            self.p_box = (min(inflated[0], lo), max(inflated[1], hi))
            self.theta = _max_abs_fu(spec.flux, self.nodes, *self.p_box)
        else:
            self.p_box = inflated
            self.theta = float(config.theta)
            needed = _max_abs_fu(spec.flux, self.nodes, *self.p_box)
            if self.theta < needed * (1.0 - 1e-12):
                raise ValueError(
                    f"theta={self.theta:.6g} below the monotonicity bound "
                    f"{needed:.6g} on the inflated initial slope range")

    def one_sided_slopes(self, v):
        if self.grid.periodic:
            vp = np.roll(v, -1)
            vp[-1] += self.mean_slope * self.grid.length
            vm = np.roll(v, 1)
            vm[0] -= self.mean_slope * self.grid.length
        else:
            # linear extrapolation ghosts: zero curvature at the boundary
            vp = np.concatenate([v[1:], [2.0 * v[-1] - v[-2]]])
            vm = np.concatenate([[2.0 * v[0] - v[1]], v[:-1]])
        dp = (vp - v) / self.dx
        dm = (v - vm) / self.dx
        return dp, dm

    def rhs(self, v):
        """Semi-discrete right side: returns dv/dt."""
        dp, dm = self.one_sided_slopes(v)
        mid = 0.5 * (dp + dm)
        flux, diff = self.spec.flux, self.spec.diffusion
        ham = np.asarray(flux.f(self.nodes, mid), dtype=float) \
            - 0.5 * self.theta * (dp - dm)
        d2 = (dp - dm) / self.dx
        beta_term = (np.asarray(diff.beta(dp), dtype=float)
                     - np.asarray(diff.beta(dm), dtype=float)) / self.dx
        return -(ham - (self.alpha_nodes + self.epsilon) * d2 - beta_term), dp, dm

    def stable_dt(self, dp, dm) -> float:
        diff = self.spec.diffusion
        bp = np.asarray(diff.beta_prime(dp), dtype=float)
        diff_coef = float(np.max(self.alpha_nodes + bp + self.epsilon))
        if self.grid.periodic:
            diff_coef = max(diff_coef, float(np.max(
                self.alpha_nodes + np.asarray(diff.beta_prime(dm), dtype=float)
                + self.epsilon)))
        denom = self.theta / self.dx + 2.0 * diff_coef / self.dx**2
        cap = self.config.max_dt if self.config.max_dt is not None else np.inf
        if denom <= 0.0:
            return cap
        return min(self.config.cfl / denom, cap)

    def check_slopes(self, dp, t):
        lo, hi = self.p_box
        pad = 1e-9 * (1.0 + hi - lo)
        if dp.min() < lo - pad or dp.max() > hi + pad:
            raise StabilityError(
                f"slopes left the dissipation range [{lo:.4g}, {hi:.4g}] at "
                f"t={t:.6g}; raise theta or theta_inflation", time=t)

    def check_state(self, v, t):
        if not np.all(np.isfinite(v)):
            i = int(np.argmax(~np.isfinite(v)))
            raise EvaluationError(
                f"value function non-finite at t={t:.6g}, x={self.nodes[i]:.6g}",
                x=float(self.nodes[i]), time=t, state=np.array(v))


def _initial_nodal(spec: ProblemSpec, grid: Grid, epsilon: float,
                   initial: Optional[NodalField]):
    if initial is not None:
        return (np.array(initial.values, dtype=float), initial.mean_slope,
                initial.gauge)
    u0 = spec.initial_cell_field(grid, epsilon=epsilon)
    v0 = primitive(u0)
    return np.array(v0.values, dtype=float), v0.mean_slope, 0.0


def stable_dt_hj(state: NodalField, spec: ProblemSpec,
                 config: HJSchemeConfig) -> float:
    ws = _HJWorkspace(spec, config, state.grid, config.resolve_epsilon(spec),
                      state.values, state.mean_slope)
    dp, dm = ws.one_sided_slopes(np.asarray(state.values, dtype=float))
    return ws.stable_dt(dp, dm)


def step_hj(state: NodalField, spec: ProblemSpec, config: HJSchemeConfig,
            dt: float) -> NodalField:
    """One forward-Euler update of the value function."""
    ws = _HJWorkspace(spec, config, state.grid, config.resolve_epsilon(spec),
                      state.values, state.mean_slope)
    v = np.asarray(state.values, dtype=float)
    rate, dp, dm = ws.rhs(v)
    limit = ws.stable_dt(dp, dm)
    if dt > limit * (1.0 + 1e-12):
        raise StabilityError(f"dt={dt:.3e} exceeds stable bound {limit:.3e}",
                             dt=dt, dt_stable=limit, time=state.time)
    v_new = v + dt * rate
    t = state.time + dt
    ws.check_state(v_new, t)
    return NodalField(values=v_new, grid=state.grid, time=t,
                      mean_slope=state.mean_slope, gauge=state.gauge,
                      epsilon=ws.epsilon)


def solve_hj(spec: ProblemSpec, config: HJSchemeConfig, t_end: float,
             snapshot_times: Optional[Sequence[float]] = None,
             n_cells: int = 256, initial: Optional[NodalField] = None,
             record_steps: bool = False) -> list:
    """March the monotone scheme to ``t_end``; see ``solve_cl`` for schedule
    semantics.  The initial value is the running integral of u0 unless an
    explicit nodal field is supplied."""
    from .cl import _snapshot_schedule

    grid = initial.grid if initial is not None else spec.domain.build_grid(n_cells)
    eps = config.resolve_epsilon(spec)
    v, mean_slope, gauge = _initial_nodal(spec, grid, eps, initial)
    ws = _HJWorkspace(spec, config, grid, eps, v, mean_slope)
    ws.check_state(v, 0.0)

    out = [NodalField(values=v.copy(), grid=grid, time=0.0,
                      mean_slope=mean_slope, gauge=gauge, epsilon=eps)]
    t = 0.0
    steps = 0
    max_steps = 50_000_000
    for target in _snapshot_schedule(t_end, snapshot_times):
        while t < target - 1e-13 * max(1.0, target):
            rate, dp, dm = ws.rhs(v)
            ws.check_slopes(dp, t)
            dt = min(ws.stable_dt(dp, dm), target - t)
            if not np.isfinite(dt) or dt <= 0:
                raise StabilityError(f"no admissible dt at t={t:.6g}", time=t)
            v = v + dt * rate
            t += dt
            steps += 1
            if not np.isfinite(float(np.sum(v))):
                ws.check_state(v, t)
            if steps > max_steps:
                raise StabilityError("step budget exhausted", time=t)
            if record_steps:
                out.append(NodalField(values=v.copy(), grid=grid, time=t,
                                      mean_slope=mean_slope, gauge=gauge,
                                      epsilon=eps))
        t = target
        ws.check_state(v, t)
        if not record_steps and target > 0.0:
            out.append(NodalField(values=v.copy(), grid=grid, time=t,
                                  mean_slope=mean_slope, gauge=gauge,
                                  epsilon=eps))
    return out


# ---------------------------------------------------------------------------
# Hopf-Lax variational oracle (first-order convex x-independent case)

def _legendre_transform(flux: FluxModel, q, p_hint_lo, p_hint_hi):
    """f*(q) = max_p (p q - f(p)) for convex x-independent f.

    The maximizer solves f'(p) = q; since f' is nondecreasing, it is found
    by inverse interpolation on a dense slope table plus a Newton polish.
    """
    q = np.asarray(q, dtype=float)
    lo = min(p_hint_lo, float(q.min()))
    hi = max(p_hint_hi, float(q.max()))

    def fp(p):
        return np.asarray(flux.f_u(np.zeros_like(p), p), dtype=float)

    # expand until the slope table covers the needed q range
    for _ in range(60):
        Lo = np.float64(lo)
        Hi = np.float64(hi)
        if fp(np.array([Lo]))[0] <= q.min() and fp(np.array([Hi]))[0] >= q.max():
            break
        lo, hi = lo - (hi - lo) - 1.0, hi + (hi - lo) + 1.0

    pgrid = np.linspace(lo, hi, 8193)
    fpg = fp(pgrid)
    p = np.interp(q, fpg, pgrid)
    h = max(1e-8, 1e-8 * (hi - lo))
    for _ in range(3):
        slope = fp(p)
        curv = (fp(p + h) - fp(p - h)) / (2.0 * h)
        curv = np.maximum(curv, 1e-12)
        p = np.clip(p - (slope - q) / curv, lo, hi)
    fvals = np.asarray(flux.f(np.zeros_like(p), p), dtype=float)
    return p * q - fvals


def hopf_lax_oracle(v0, flux: FluxModel, x, t: float, minimization_grid):
    """Variational value v(x, t) = min_y [ v0(y) + t f*((x - y)/t) ].

    Requires a strictly convex, x-independent, first-order Hamiltonian and
    t > 0.  The minimization grid is refined by doubling until the value
    changes by less than 1e-8.
    """
    if not flux.x_independent:
        raise StructuralError("Hopf-Lax oracle needs an x-independent flux")
    if not t > 0:
        raise ValueError("t must be positive")
    probe = np.linspace(-3.0, 3.0, 257)
    fvals = np.asarray(flux.f(np.zeros_like(probe), probe), dtype=float)
    d2 = np.diff(fvals, 2)
    if np.min(d2) <= 1e-14 * (1.0 + np.max(np.abs(fvals))):
        raise StructuralError("Hopf-Lax oracle needs a strictly convex flux")

    xs = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.sort(np.asarray(minimization_grid, dtype=float))
    if y.size < 2:
        raise ValueError("minimization grid needs at least two points")
    probe = np.asarray(v0(y), dtype=float)
    slope_lo = float(np.min(np.diff(probe) / np.diff(y)))
    slope_hi = float(np.max(np.diff(probe) / np.diff(y)))

    def objective(ymat):
        q = (xs[:, None] - ymat) / t
        fstar = _legendre_transform(flux, q.ravel(), slope_lo, slope_hi)
        return np.asarray(v0(ymat), dtype=float) + t * fstar.reshape(q.shape)

    # global scan on the caller's grid, then per-point window refinement:
    # each zoom re-grids the bracket around the current argmin, so the
    # minimizer cannot stall between grid points
    ymat = np.broadcast_to(y, (xs.size, y.size)).copy()
    vals = None
    zoom_points = 65
    for _ in range(40):
        total = objective(ymat)
        j = np.argmin(total, axis=1)
        new_vals = total[np.arange(xs.size), j]
        jl = np.maximum(j - 1, 0)
        jr = np.minimum(j + 1, ymat.shape[1] - 1)
        lo_b = ymat[np.arange(xs.size), jl]
        hi_b = ymat[np.arange(xs.size), jr]
        done = vals is not None and float(np.max(np.abs(new_vals - vals))) < 1e-8
        vals = new_vals
        if done:
            break
        frac = np.linspace(0.0, 1.0, zoom_points)
        ymat = lo_b[:, None] + (hi_b - lo_b)[:, None] * frac[None, :]
    return vals if np.ndim(x) else float(vals[0])
