"""Acceptance suite.

One test per acceptance criterion, each asserting its stated tolerance and
printing a single summary line (visible with ``pytest -s`` or ``-rA``).
Frozen constants used below:

* rarefaction L1 constant            C = 0.5   (error <= C sqrt(dx))
* Hopf-Lax vs solver max-error       C = 15    (error <= C dx)
* entropy residual slack             1e-10 + 1.0 dt dx
* flux-variable growth allowance     8 (dx + dt0)
* comparison / contraction slack     1e-12 per unit data scale
"""

import time

import numpy as np
import pytest

from clhjlab.catalog import builtin_catalog, catalog_names
from clhjlab.cl import SchemeConfig, _Workspace, solve_cl, stable_dt
from clhjlab.experiments import (
    FAIL,
    PASS,
    audit_entropy_inequality,
    audit_flux_bound,
    audit_lipschitz,
    check_equivalence,
    cl_longtime,
    default_k_levels,
    hj_longtime,
    nearest_flux_root_projection,
    theil_sen_slope,
    vanishing_viscosity_convergence,
)
from clhjlab.grids import CellField
from clhjlab.hj import HJSchemeConfig, hopf_lax_oracle, solve_hj, stable_dt_hj
from clhjlab.problems import DiffusionModel, Domain, ProblemSpec
from clhjlab.scenario import parse_scenario, run_scenario
from clhjlab.transforms import derivative, l1_distance, primitive

from conftest import riemann_spec, smooth_random_field

TWO_PI = 2.0 * np.pi

EQUIVALENCE_LEVELS = [128, 256, 512, 1024]
EQUIVALENCE_PROBLEMS = {
    "burgers": {},
    "flat-middle-flux": {"amplitude": 1.5},  # data must leave the affine band
    "x-dependent-convex": {},
    "plateau-beta": {},
}


def announce(num, name, detail):
    print(f"\nACCEPTANCE {num} [{name}]: PASS  {detail}")


def steep_wave_spec(epsilon=0.0):
    base = builtin_catalog("burgers")
    return ProblemSpec(
        flux=base.flux, diffusion=DiffusionModel.zero(),
        u0=lambda x: -TWO_PI * np.sin(TWO_PI * np.asarray(x, dtype=float)),
        domain=Domain("periodic-torus"), epsilon=epsilon, name="steep-wave")


# ---------------------------------------------------------------------------
# 1. equivalence of the two flows across a refinement ladder

@pytest.mark.parametrize("name", sorted(EQUIVALENCE_PROBLEMS))
def test_criterion_1_equivalence(name):
    spec = builtin_catalog(name, EQUIVALENCE_PROBLEMS[name])
    start = time.time()
    rep = check_equivalence(spec, 0.5, EQUIVALENCE_LEVELS)
    elapsed = time.time() - start
    l1 = rep.final_l1()
    linf = rep.final_linf()
    assert all(b < a for a, b in zip(l1, l1[1:])), l1
    assert all(b < a for a, b in zip(linf, linf[1:])), linf
    assert rep.order_l1 >= 0.4 and rep.order_linf >= 0.4
    assert rep.verdict == PASS
    announce(1, f"equivalence {name}",
             f"orders L1={rep.order_l1:.2f} Linf={rep.order_linf:.2f}, "
             f"defects {l1[0]:.2e}->{l1[-1]:.2e}, {elapsed:.0f}s")


# ---------------------------------------------------------------------------
# 2. exact-solution oracles

def test_criterion_2_exact_oracles():
    # shock position: speed (uL + uR)/2 = 1/2 from x0 = 0.5
    def step_data(x):
        x = np.asarray(x, dtype=float)
        return np.where((x % 1.0) < 0.5, 1.0, 0.0)

    base = builtin_catalog("burgers")
    spec = ProblemSpec(flux=base.flux, diffusion=base.diffusion, u0=step_data,
                       domain=Domain("periodic-torus"), working_range=(-1.0, 2.0))
    n = 200
    u = solve_cl(spec, SchemeConfig(), 0.2, n_cells=n)[-1]
    x = u.grid.cell_centers()
    sel = (x > 0.4) & (x < 0.9)
    shock_x = x[np.nonzero(sel & (u.values < 0.5))[0][0]]
    assert abs(shock_x - 0.6) <= 2.0 / n

    # rarefaction: L1 error <= 0.5 sqrt(dx) against the exact fan
    rspec = riemann_spec(-1.0, 1.0)
    rf = solve_cl(rspec, SchemeConfig(), 0.5, n_cells=400)[-1]
    xs = rf.grid.cell_centers()
    exact = np.clip(xs / 0.5, -1.0, 1.0)
    rare_err = float(np.sum(np.abs(rf.values - exact)) * rf.grid.dx)
    assert rare_err <= 0.5 * np.sqrt(rf.grid.dx)

    # heat kernel decay at t = 0.1
    heat = builtin_catalog("heat")
    hf = solve_cl(heat, SchemeConfig(), 0.1, n_cells=64)[-1]
    hx = hf.grid.cell_centers()
    heat_err = float(np.max(np.abs(
        hf.values - np.exp(-4 * np.pi**2 * 0.1) * np.sin(2 * np.pi * hx))))
    assert heat_err <= 10.0 * np.pi**2 * hf.grid.dx**2

    # variational oracle vs the monotone scheme, first order in dx
    hj_spec = steep_wave_spec()
    t = 0.25
    out = solve_hj(hj_spec, HJSchemeConfig(), t, n_cells=256)[-1]
    nodes = out.grid.node_positions()
    oracle = hopf_lax_oracle(
        lambda y: np.cos(TWO_PI * np.asarray(y, dtype=float)) - 1.0,
        hj_spec.flux, nodes, t, np.linspace(-3.0, 4.0, 4097))
    gap = out.values - oracle
    hl_err = float(np.max(gap) - np.min(gap))
    assert hl_err <= 15.0 / 256

    announce(2, "exact oracles",
             f"shock@{shock_x:.4f}, rarefaction L1={rare_err:.3e}, "
             f"heat Linf={heat_err:.2e}, variational Linf={hl_err:.3e}")


# ---------------------------------------------------------------------------
# 3. entropy inequality audit on every catalog run + broken-scheme sensitivity

def _catalog_audit_run(name):
    spec = builtin_catalog(name)
    setups = {
        "heat": dict(n_cells=64, t_end=0.01),
        "porous-medium-like": dict(n_cells=64, t_end=0.02),
        "plateau-beta": dict(n_cells=96, t_end=0.05),
    }
    cfg = setups.get(name, dict(n_cells=96, t_end=0.05))
    run = solve_cl(spec, SchemeConfig(), cfg["t_end"], n_cells=cfg["n_cells"],
                   record_steps=True)
    return spec, run


def test_criterion_3_entropy_audit():
    worst = {}
    for name in catalog_names():
        spec, run = _catalog_audit_run(name)
        audit = audit_entropy_inequality(run, spec, default_k_levels(spec))
        assert audit.verdict == PASS, f"{name}: worst {audit.worst_overall}"
        worst[name] = audit.worst_overall

    # sensitivity: an anti-diffusive update must fail at a shock
    def step_data(x):
        x = np.asarray(x, dtype=float)
        return np.where((x % 1.0) < 0.5, 1.0, 0.0)

    base = builtin_catalog("burgers")
    spec = ProblemSpec(flux=base.flux, diffusion=base.diffusion, u0=step_data,
                       domain=Domain("periodic-torus"), working_range=(-2.0, 3.0))
    grid = spec.domain.build_grid(64)
    ws = _Workspace(spec, SchemeConfig(), grid, 0.0)
    u = np.asarray(spec.u0(grid.cell_centers()), dtype=float)
    dt = 0.2 * ws.stable_dt(u)
    run = [CellField(values=u.copy(), grid=grid, time=0.0)]
    t = 0.0
    for _ in range(6):
        uL, uR = ws.face_states(u)
        F = 0.5 * (np.asarray(spec.flux.f(ws.x_faces, uL), dtype=float)
                   + np.asarray(spec.flux.f(ws.x_faces, uR), dtype=float)) \
            + 0.5 * ws.lf_lambda * (uR - uL)
        u = u - dt / grid.dx * (F - np.roll(F, 1))
        t += dt
        run.append(CellField(values=u.copy(), grid=grid, time=t))
    broken = audit_entropy_inequality(
        run, spec, default_k_levels(spec, extra=(0.0, 1.0)))
    assert broken.verdict == FAIL
    assert broken.worst_overall < -1e-6

    deepest = min(worst.values())
    announce(3, "entropy audit",
             f"{len(worst)} catalog runs PASS (worst residual {deepest:.2e}); "
             f"anti-diffusive fixture FAIL at {broken.worst_overall:.2e}")


# ---------------------------------------------------------------------------
# 4. flux-variable maximum principle across the viscosity ladder

def test_criterion_4_flux_bound():
    eps_ladder = (0.02, 0.01, 0.005)
    base = builtin_catalog("burgers")
    peaks, bounds = [], []
    for eps in eps_ladder:
        spec = base.with_epsilon(eps)
        run = solve_cl(spec, SchemeConfig(), 0.3,
                       snapshot_times=np.linspace(0.03, 0.3, 10), n_cells=1024)
        audit = audit_flux_bound(run, spec)
        assert audit.verdict == PASS, f"eps={eps}"
        peaks.append(max(audit.max_w))
        bounds.append(audit.initial_bound + audit.tolerance)
    # one constant covers the whole ladder
    uniform = max(bounds)
    assert all(p <= uniform for p in peaks)
    announce(4, "flux-variable bound",
             f"peaks {['%.4f' % p for p in peaks]} within uniform {uniform:.4f}")


# ---------------------------------------------------------------------------
# 5. uniform Lipschitz bounds and the initial-rate constant

def test_criterion_5_lipschitz():
    eps_ladder = (0.02, 0.01, 0.005)
    spec = steep_wave_spec()
    times = [0.002, 0.1, 0.2, 0.3]
    runs = {}
    for eps in eps_ladder:
        cfg = HJSchemeConfig(epsilon=eps)
        runs[eps] = solve_hj(spec, cfg, times[-1], snapshot_times=times,
                             n_cells=512)
    audit = audit_lipschitz(runs, spec)
    assert audit.verdict == PASS
    ratios = []
    for early, bound in zip(audit.early_time_rate, audit.theory_rate_bound):
        ratios.append(abs(early - bound) / bound)
        assert abs(early - bound) <= 0.10 * bound
    announce(5, "uniform Lipschitz",
             f"slope const {audit.uniform_constant:.3f}; "
             f"initial-rate mismatches {['%.1f%%' % (100 * r) for r in ratios]}")


# ---------------------------------------------------------------------------
# 6. vanishing viscosity rates

def test_criterion_6_vanishing_viscosity():
    spec = builtin_catalog("burgers")
    eps = [0.04, 0.02, 0.01, 0.005]

    pre = vanishing_viscosity_convergence(spec, eps, 0.1, n_cells=1024)
    assert pre.verdict == PASS
    assert 0.8 <= pre.fit_exponent <= 1.2

    post = vanishing_viscosity_convergence(spec, eps, 0.35, n_cells=1024)
    assert post.verdict == PASS
    assert 0.5 <= post.fit_exponent <= 1.5
    assert all(b < a for a, b in zip(post.distances, post.distances[1:]))

    announce(6, "vanishing viscosity",
             f"pre-shock exponent {pre.fit_exponent:.2f}, "
             f"post-shock {post.fit_exponent:.2f}")


# ---------------------------------------------------------------------------
# 7. long-time profile of the value function

def test_criterion_7_hj_longtime():
    # data inside the affine band: exact transport at the drift speed
    n = 512
    flat = builtin_catalog("flat-middle-flux")
    rep = hj_longtime(flat, 3.0, np.arange(0.25, 3.0, 0.25),
                      hj_config=HJSchemeConfig(theta=2.0, cfl=1.0), n_cells=n)
    assert rep.verdict == PASS
    dx = 1.0 / n
    assert max(rep.residuals) <= 5.0 * dx
    assert abs(rep.drift_estimate - 2.0) <= 1e-3
    assert abs(rep.drift_theoretical - 2.0) <= 1e-6

    sandwich_tol = 2.0 * dx * max(abs(rep.interval.a), abs(rep.interval.b), 1.0)
    assert rep.extras["sandwich_margin"] >= -sandwich_tol

    # strictly convex flux: the band degenerates and the profile flattens
    nb = 256
    bg = builtin_catalog("burgers")
    rep_b = hj_longtime(bg, 25.0, np.arange(2.5, 25.0, 2.5),
                        hj_config=HJSchemeConfig(), n_cells=nb)
    assert rep_b.interval.degenerate
    assert rep_b.extras["profile_span"] <= 10.0 / nb
    assert rep_b.residual_slope <= 0.0
    assert rep_b.extras["sandwich_margin"] >= -2.0 / nb  # a = b = 0
    assert rep_b.verdict == PASS

    announce(7, "hj long time",
             f"transport residual {max(rep.residuals):.1e} (<= {5 * dx:.1e}), "
             f"drift {rep.drift_estimate:.6f}; degenerate span "
             f"{rep_b.extras['profile_span']:.2e}")


# ---------------------------------------------------------------------------
# 8. long-time profile of the conservation-law state

def test_criterion_8_cl_longtime():
    # zero-mean data relax to the mean below 1e-2 by t = 20 at dx = 1/512
    spec = builtin_catalog("burgers", {"frequency": 2})
    rep = cl_longtime(spec, 20.0, np.arange(1.0, 20.0, 1.0),
                      cl_config=SchemeConfig(max_dt=0.01), n_cells=512)
    assert rep.verdict == PASS
    r_mean = rep.extras["residual_to_mean"]
    late = r_mean[2:]
    assert all(b <= a + 1e-12 for a, b in zip(late, late[1:]))
    assert r_mean[-1] < 1e-2

    # x-dependent strictly convex flux: stationary profile solves
    # f(x, U) = c_bar cell by cell (brute-force root oracle)
    xspec = builtin_catalog("x-dependent-convex")
    xrep = cl_longtime(xspec, 60.0, np.arange(2.0, 60.0, 2.0),
                       cl_config=SchemeConfig(), n_cells=512)
    assert xrep.verdict == PASS
    assert len(xrep.window_estimates) == 2
    assert abs(xrep.window_estimates[0] - xrep.window_estimates[1]) <= 1e-3
    proj = nearest_flux_root_projection(xspec, xrep.profile,
                                        xrep.ergodic_estimate)
    oracle_gap = l1_distance(xrep.profile, proj)
    assert oracle_gap <= 5.0 / 512

    # closed-form rate oracle: data of mean m relax to the constant m, so the
    # rate must converge to f(m) = m^2 / 2
    mspec = builtin_catalog("burgers", {"mean": 0.5})
    mrep = cl_longtime(mspec, 20.0, np.arange(1.0, 20.0, 1.0),
                       cl_config=SchemeConfig(max_dt=0.01), n_cells=256)
    assert abs(mrep.ergodic_estimate - 0.125) <= 1e-3

    announce(8, "cl long time",
             f"mean residual {r_mean[-1]:.3e} at t=20; stationary-oracle gap "
             f"{oracle_gap:.3e}; c windows {xrep.window_estimates}; "
             f"rate {mrep.ergodic_estimate:.6f} vs 0.125")


# ---------------------------------------------------------------------------
# 9. structural invariants

def _comparison_pairs(spec, rng, n_pairs, n_cells=48, t_end=0.04):
    # the comparison and contraction guarantees are statements about one
    # fixed monotone update, so both runs of a pair share the step size and
    # the dissipation constant
    from clhjlab.hj import _max_abs_fu

    grid = spec.domain.build_grid(n_cells)
    x = grid.cell_centers()
    nodes = grid.node_positions()
    theta_shared = _max_abs_fu(spec.flux, nodes, -1.6, 1.6) * 1.2
    cl_viol = 0
    hj_viol = 0
    contraction_viol = 0
    base_cl = SchemeConfig(cfl=0.4)
    base_hj = HJSchemeConfig(cfl=0.4, theta=theta_shared)
    for _ in range(n_pairs):
        raw = smooth_random_field(rng, amplitude=0.4)(x)
        raw = raw / max(1.0, np.max(np.abs(raw)) / 0.6)
        lift = 0.2 * rng.random() * (1.2 + np.sin(TWO_PI * x + rng.random()))
        low = CellField(values=raw, grid=grid)
        high = CellField(values=raw + lift, grid=grid)

        dt_fix = 0.5 * min(stable_dt(low, spec, base_cl),
                           stable_dt(high, spec, base_cl))
        cfg = SchemeConfig(cfl=0.4, max_dt=dt_fix)
        ua = solve_cl(spec, cfg, t_end, n_cells=n_cells, initial=low)[-1]
        ub = solve_cl(spec, cfg, t_end, n_cells=n_cells, initial=high)[-1]
        if np.any(ua.values > ub.values + 1e-12):
            cl_viol += 1

        # ordered value functions with a periodic gap (equal mean slopes),
        # the setting in which torus comparison and contraction make sense
        va = primitive(low)
        node_lift = 0.1 + 0.05 * rng.random() * (
            1.0 + np.sin(TWO_PI * nodes + rng.random()))
        vb = va.with_values(va.values + node_lift)
        dt_fix = 0.5 * min(stable_dt_hj(va, spec, base_hj),
                           stable_dt_hj(vb, spec, base_hj))
        hcfg = HJSchemeConfig(cfl=0.4, theta=theta_shared, max_dt=dt_fix)
        fa = solve_hj(spec, hcfg, t_end, n_cells=n_cells, initial=va)[-1]
        fb = solve_hj(spec, hcfg, t_end, n_cells=n_cells, initial=vb)[-1]
        if np.any(fa.values > fb.values + 1e-12):
            hj_viol += 1
        d0 = np.max(np.abs(va.values - vb.values))
        if np.max(np.abs(fa.values - fb.values)) > d0 + 1e-12:
            contraction_viol += 1
    return cl_viol, hj_viol, contraction_viol


def test_criterion_9_structural_invariants(tmp_path, rng):
    # conservation on long runs
    drifts = []
    for name, t_end, n in (("burgers", 0.5, 256), ("plateau-beta", 0.3, 256)):
        spec = builtin_catalog(name)
        run = solve_cl(spec, SchemeConfig(), t_end,
                       snapshot_times=[t_end / 2, t_end], n_cells=n)
        drifts.append(max(abs(f.total_mass() - run[0].total_mass())
                          for f in run))
    assert max(drifts) <= 1e-10

    # comparison and contraction: 50 ordered pairs per problem, no violations
    totals = {}
    for name in sorted(EQUIVALENCE_PROBLEMS):
        spec = builtin_catalog(name, EQUIVALENCE_PROBLEMS[name])
        totals[name] = _comparison_pairs(spec, rng, n_pairs=50)
        assert totals[name] == (0, 0, 0), f"{name}: {totals[name]}"

    # primitive/derivative exact inversion
    grid = builtin_catalog("burgers").domain.build_grid(64)
    vals = rng.standard_normal(64)
    u = CellField(values=vals, grid=grid)
    assert np.max(np.abs(derivative(primitive(u)).values - vals)) <= 1e-13

    # determinism: identical scenario, identical manifests
    scn = tmp_path / "det.scn"
    scn.write_text("\n".join([
        "scenario.id = det",
        "problem.name = burgers",
        "experiment.kind = solve-cl",
        "experiment.t_end = 0.1",
        "experiment.snapshot_times = [0.05, 0.1]",
        "domain.n_cells = 64",
        f"outputs.dir = {tmp_path / 'out'}",
    ]) + "\n")
    sc = parse_scenario(scn)
    assert run_scenario(sc, echo=lambda *_: None) == 0
    manifest = (tmp_path / "out" / "det" / "manifest.txt").read_text()
    assert run_scenario(sc, echo=lambda *_: None) == 0
    assert (tmp_path / "out" / "det" / "manifest.txt").read_text() == manifest

    announce(9, "structural invariants",
             f"mass drift {max(drifts):.1e}; 50x4 ordered pairs, zero "
             f"violations; transforms exact; reruns hash-identical")
