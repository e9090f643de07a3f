"""Scenario files: parse, validate, run, export.

A scenario is a flat ``key = value`` text file with dotted keys and ``#``
comments.  Values are JSON literals (numbers, lists, strings may omit
quotes).  The documented key set:

    scenario.id                   required; [a-z0-9_-]+, namespaces outputs
    problem.name                  required; a catalog entry
    problem.params.<name>         entry-specific parameters
    domain.kind                   periodic-torus | truncated-line (override)
    domain.half_width             for truncated-line overrides
    domain.n_cells                required
    experiment.kind               required; one of: solve-cl solve-hj
                                  equivalence entropy-audit flux-audit
                                  lipschitz-audit hj-longtime cl-longtime
                                  viscosity-ladder
    experiment.t_end              final time (most kinds)
    experiment.t_max              horizon for the long-time kinds
    experiment.snapshot_times     list of output times
    experiment.checkpoint_times   list of comparison times (long-time kinds)
    experiment.refinement_levels  list of n_cells, each double the previous
    solver.cfl                    in (0, 1]
    solver.flux_scheme            engquist-osher | lax-friedrichs
    solver.epsilon                artificial viscosity
    solver.epsilon_ladder         strictly decreasing positive list
    solver.max_dt                 optional step cap
    solver.theta                  explicit HJ dissipation (default: derived)
    solver.theta_inflation        slope-range inflation for derived theta
    outputs.dir                   required; artifacts land in
                                  <outputs.dir>/<scenario.id>/

Parse and validation errors name the offending key and line.  Outputs are
deterministic: identical scenarios produce byte-identical artifacts, and
``manifest.txt`` lists every artifact with its content hash.  The exit
status of ``run_scenario`` is 0 only when every verdict is PASS.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .catalog import builtin_catalog
from .cl import SchemeConfig, solve_cl, viscosity_ladder
from .errors import ClhjError, ScenarioError
from .experiments import (
    FAIL,
    PASS,
    audit_entropy_inequality,
    audit_flux_bound,
    audit_lipschitz,
    check_equivalence,
    cl_longtime,
    default_k_levels,
    hj_longtime,
    vanishing_viscosity_convergence,
)
from .hj import HJSchemeConfig, solve_hj
from .snapshots import (
    write_cell_snapshots,
    write_manifest,
    write_nodal_snapshots,
    write_table,
)

EXPERIMENT_KINDS = (
    "solve-cl", "solve-hj", "equivalence", "entropy-audit", "flux-audit",
    "lipschitz-audit", "hj-longtime", "cl-longtime", "viscosity-ladder",
)

_KNOWN_KEYS = {
    "scenario.id", "problem.name", "domain.kind", "domain.half_width",
    "domain.n_cells", "experiment.kind", "experiment.t_end",
    "experiment.t_max", "experiment.snapshot_times",
    "experiment.checkpoint_times", "experiment.refinement_levels",
    "solver.cfl", "solver.t_end", "solver.flux_scheme", "solver.epsilon",
    "solver.epsilon_ladder", "solver.max_dt", "solver.theta",
    "solver.theta_inflation", "outputs.dir",
}

_ENV_OUTPUT_ROOT = "CLHJLAB_OUTPUT_ROOT"


@dataclass
class Scenario:
    values: dict          # key -> parsed value
    lines: dict           # key -> line number (for error messages)
    path: str = "<memory>"

    def get(self, key, default=None):
        return self.values.get(key, default)

    def require(self, key):
        if key not in self.values:
            raise ScenarioError(
                f"{self.path}: missing required key '{key}' for experiment "
                f"kind '{self.values.get('experiment.kind', '?')}'", key=key)
        return self.values[key]

    def error(self, key, message):
        line = self.lines.get(key, "?")
        raise ScenarioError(f"{self.path}:{line}: key '{key}': {message}",
                            key=key, line=line)


def parse_scenario(path) -> Scenario:
    """Parse a scenario file; errors name the key and line."""
    path = Path(path)
    values, lines = {}, {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ScenarioError(
                f"{path}:{lineno}: expected 'key = value', got {raw!r}",
                line=lineno)
        key, _, rhs = stripped.partition("=")
        key = key.strip()
        rhs = rhs.strip()
        if not (key in _KNOWN_KEYS or key.startswith("problem.params.")):
            raise ScenarioError(f"{path}:{lineno}: unknown key '{key}'",
                                key=key, line=lineno)
        if key in values:
            raise ScenarioError(f"{path}:{lineno}: duplicate key '{key}'",
                                key=key, line=lineno)
        try:
            value = json.loads(rhs)
        except json.JSONDecodeError:
            value = rhs  # bare string
        values[key] = value
        lines[key] = lineno
    # solver.t_end is the canonical spelling; experiment.t_end is accepted
    if "solver.t_end" in values:
        if "experiment.t_end" in values:
            raise ScenarioError(
                f"{path}:{lines['solver.t_end']}: give either solver.t_end or "
                "experiment.t_end, not both", key="solver.t_end",
                line=lines["solver.t_end"])
        values["experiment.t_end"] = values.pop("solver.t_end")
        lines["experiment.t_end"] = lines.pop("solver.t_end")
    scenario = Scenario(values=values, lines=lines, path=str(path))
    validate_scenario(scenario)
    return scenario


def _check_number(sc, key, lo=None, hi=None, strict_lo=False):
    v = sc.values[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        sc.error(key, f"expected a number, got {v!r}")
    if lo is not None and (v <= lo if strict_lo else v < lo):
        sc.error(key, f"value {v} below allowed minimum {lo}")
    if hi is not None and v > hi:
        sc.error(key, f"value {v} above allowed maximum {hi}")


def validate_scenario(sc: Scenario) -> None:
    sid = sc.require("scenario.id")
    if not isinstance(sid, str) or not re.fullmatch(r"[a-z0-9_-]+", sid):
        sc.error("scenario.id", "must match [a-z0-9_-]+")
    sc.require("problem.name")
    sc.require("outputs.dir")
    kind = sc.require("experiment.kind")
    if kind not in EXPERIMENT_KINDS:
        sc.error("experiment.kind", f"unknown kind {kind!r}; "
                 f"known: {', '.join(EXPERIMENT_KINDS)}")

    if "solver.cfl" in sc.values:
        _check_number(sc, "solver.cfl", lo=0.0, hi=1.0, strict_lo=True)
    if "solver.epsilon" in sc.values:
        _check_number(sc, "solver.epsilon", lo=0.0)
    if "solver.max_dt" in sc.values:
        _check_number(sc, "solver.max_dt", lo=0.0, strict_lo=True)
    if "solver.flux_scheme" in sc.values:
        if sc.values["solver.flux_scheme"] not in ("engquist-osher", "lax-friedrichs"):
            sc.error("solver.flux_scheme", "must be engquist-osher or lax-friedrichs")
    if "domain.n_cells" in sc.values:
        _check_number(sc, "domain.n_cells", lo=4)

    needs_t_end = ("solve-cl", "solve-hj", "equivalence", "entropy-audit",
                   "flux-audit", "lipschitz-audit", "viscosity-ladder")
    if kind in needs_t_end:
        if "experiment.t_end" not in sc.values:
            raise ScenarioError(
                f"{sc.path}: missing required key 'solver.t_end' for "
                f"experiment kind '{kind}'", key="solver.t_end")
        _check_number(sc, "experiment.t_end", lo=0.0)
    if kind in ("hj-longtime", "cl-longtime"):
        sc.require("experiment.t_max")
        _check_number(sc, "experiment.t_max", lo=0.0, strict_lo=True)
        sc.require("experiment.checkpoint_times")
    if kind in ("solve-cl", "solve-hj", "entropy-audit", "flux-audit",
                "lipschitz-audit", "viscosity-ladder", "hj-longtime",
                "cl-longtime"):
        sc.require("domain.n_cells")
    if kind == "equivalence":
        levels = sc.require("experiment.refinement_levels")
        if (not isinstance(levels, list) or len(levels) < 1
                or not all(isinstance(n, int) and n >= 4 for n in levels)):
            sc.error("experiment.refinement_levels",
                     "expected a list of integers >= 4")
        for a, b in zip(levels, levels[1:]):
            if b != 2 * a:
                sc.error("experiment.refinement_levels",
                         f"levels must double at each step, got {a} -> {b}")
    if kind in ("lipschitz-audit", "viscosity-ladder"):
        ladder = sc.require("solver.epsilon_ladder")
        if (not isinstance(ladder, list) or len(ladder) < 1
                or not all(isinstance(e, (int, float)) and e > 0 for e in ladder)
                or any(b >= a for a, b in zip(ladder, ladder[1:]))):
            sc.error("solver.epsilon_ladder",
                     "expected a strictly decreasing list of positive numbers")


def _problem_params(sc: Scenario) -> dict:
    params = {}
    for key, value in sc.values.items():
        if key.startswith("problem.params."):
            params[key[len("problem.params."):]] = value
    if "domain.kind" in sc.values:
        params["domain_kind"] = sc.values["domain.kind"]
        if "domain.half_width" in sc.values:
            params["half_width_override"] = sc.values["domain.half_width"]
    return params


def _configs(sc: Scenario):
    cl_cfg = SchemeConfig(
        flux_scheme=sc.get("solver.flux_scheme", "engquist-osher"),
        cfl=float(sc.get("solver.cfl", 0.45)),
        epsilon=(float(sc.values["solver.epsilon"])
                 if "solver.epsilon" in sc.values else None),
        max_dt=(float(sc.values["solver.max_dt"])
                if "solver.max_dt" in sc.values else None),
    )
    hj_cfg = HJSchemeConfig(
        theta=(float(sc.values["solver.theta"])
               if "solver.theta" in sc.values else None),
        theta_inflation=float(sc.get("solver.theta_inflation", 0.5)),
        cfl=float(sc.get("solver.cfl", 0.45)),
        epsilon=(float(sc.values["solver.epsilon"])
                 if "solver.epsilon" in sc.values else None),
        max_dt=(float(sc.values["solver.max_dt"])
                if "solver.max_dt" in sc.values else None),
    )
    return cl_cfg, hj_cfg


def resolve_output_dir(sc: Scenario) -> Path:
    root = os.environ.get(_ENV_OUTPUT_ROOT)
    base = Path(sc.values["outputs.dir"])
    if root:
        base = Path(root) / base
    return base / sc.values["scenario.id"]


def run_scenario(sc: Scenario, echo=print) -> int:
    """Execute one scenario; returns the process exit status.

    0: every verdict PASS.  1: a verdict is FAIL or DEGRADED.  3: a solver
    aborted (a post-mortem state dump is written next to the artifacts).
    Validation problems raise ScenarioError before any compute.
    """
    out_dir = resolve_output_dir(sc)
    out_dir.mkdir(parents=True, exist_ok=True)
    probe = out_dir / ".write-probe"
    probe.write_text("ok")
    probe.unlink()

    spec = builtin_catalog(sc.values["problem.name"], _problem_params(sc))
    cl_cfg, hj_cfg = _configs(sc)
    kind = sc.values["experiment.kind"]
    n_cells = int(sc.get("domain.n_cells", 256))
    artifacts = []
    verdicts = []

    def emit(name, writer):
        writer(out_dir / name)
        artifacts.append(name)

    try:
        if kind == "solve-cl":
            fields = solve_cl(spec, cl_cfg, float(sc.values["experiment.t_end"]),
                              snapshot_times=sc.get("experiment.snapshot_times"),
                              n_cells=n_cells)
            emit("snapshots.tsv", lambda p: write_cell_snapshots(p, fields))
            drift = abs(fields[-1].total_mass() - fields[0].total_mass())
            body = [f"run completed, {len(fields)} snapshots",
                    f"mass drift: {drift:.6e}"]
            verdict = PASS if (not spec.domain.periodic or drift <= 1e-10) else FAIL
            body.append(f"VERDICT: {verdict}")
            emit("report.txt", lambda p: p.write_text("\n".join(body) + "\n"))
            verdicts.append(verdict)

        elif kind == "solve-hj":
            fields = solve_hj(spec, hj_cfg, float(sc.values["experiment.t_end"]),
                              snapshot_times=sc.get("experiment.snapshot_times"),
                              n_cells=n_cells)
            emit("snapshots.tsv", lambda p: write_nodal_snapshots(p, fields))
            body = [f"run completed, {len(fields)} snapshots", f"VERDICT: {PASS}"]
            emit("report.txt", lambda p: p.write_text("\n".join(body) + "\n"))
            verdicts.append(PASS)

        elif kind == "equivalence":
            levels = sc.values["experiment.refinement_levels"]
            rep = check_equivalence(spec, float(sc.values["experiment.t_end"]),
                                    levels, cl_config=cl_cfg, hj_config=hj_cfg)
            rows = []
            for lv in rep.levels:
                for t, d1, dinf in zip(lv.times, lv.l1_defects, lv.linf_defects):
                    rows.append((lv.n_cells, lv.dx, t, d1, dinf))
            order_l1 = "n/a" if rep.order_l1 is None else rep.order_l1
            order_linf = "n/a" if rep.order_linf is None else rep.order_linf
            emit("equivalence.tsv", lambda p: write_table(
                p, ["n_cells", "dx", "t", "l1_defect", "linf_defect"], rows))
            emit("report.txt", lambda p: p.write_text(rep.to_text() + "\n"))
            verdicts.append(rep.verdict)

        elif kind == "entropy-audit":
            run = solve_cl(spec, cl_cfg, float(sc.values["experiment.t_end"]),
                           n_cells=n_cells, record_steps=True)
            audit = audit_entropy_inequality(run, spec, default_k_levels(spec),
                                             config=cl_cfg)
            rows = list(zip(audit.step_times, audit.dts, audit.worst_residuals))
            emit("entropy.tsv", lambda p: write_table(
                p, ["t", "dt", "worst_residual"], rows))
            emit("report.txt", lambda p: p.write_text(audit.to_text() + "\n"))
            verdicts.append(audit.verdict)

        elif kind == "flux-audit":
            times = sc.get("experiment.snapshot_times")
            fields = solve_cl(spec, cl_cfg, float(sc.values["experiment.t_end"]),
                              snapshot_times=times, n_cells=n_cells)
            audit = audit_flux_bound(fields, spec, config=cl_cfg)
            emit("flux_bound.tsv", lambda p: write_table(
                p, ["t", "max_w"], list(zip(audit.times, audit.max_w))))
            emit("report.txt", lambda p: p.write_text(audit.to_text() + "\n"))
            verdicts.append(audit.verdict)

        elif kind == "lipschitz-audit":
            ladder = sc.values["solver.epsilon_ladder"]
            times = sc.get("experiment.snapshot_times")
            runs = {}
            for eps in ladder:
                cfg = HJSchemeConfig(theta=hj_cfg.theta,
                                     theta_inflation=hj_cfg.theta_inflation,
                                     cfl=hj_cfg.cfl, epsilon=float(eps),
                                     max_dt=hj_cfg.max_dt)
                runs[float(eps)] = solve_hj(
                    spec, cfg, float(sc.values["experiment.t_end"]),
                    snapshot_times=times, n_cells=n_cells)
            audit = audit_lipschitz(runs, spec)
            rows = list(zip(audit.epsilons, audit.max_slope, audit.max_time_rate,
                            audit.early_time_rate, audit.theory_rate_bound))
            emit("lipschitz.tsv", lambda p: write_table(
                p, ["epsilon", "max_slope", "max_time_rate", "early_time_rate",
                    "rate_bound"], rows))
            emit("report.txt", lambda p: p.write_text(audit.to_text() + "\n"))
            verdicts.append(audit.verdict)

        elif kind == "hj-longtime":
            rep = hj_longtime(spec, float(sc.values["experiment.t_max"]),
                              sc.values["experiment.checkpoint_times"],
                              hj_config=hj_cfg, n_cells=n_cells)
            emit("residuals.tsv", lambda p: write_table(
                p, ["t", "residual"], list(zip(rep.residual_times, rep.residuals))))
            emit("profile.tsv", lambda p: write_nodal_snapshots(p, [rep.profile]))
            emit("report.txt", lambda p: p.write_text(rep.to_text() + "\n"))
            verdicts.append(rep.verdict)

        elif kind == "cl-longtime":
            rep = cl_longtime(spec, float(sc.values["experiment.t_max"]),
                              sc.values["experiment.checkpoint_times"],
                              cl_config=cl_cfg, n_cells=n_cells)
            emit("residuals.tsv", lambda p: write_table(
                p, ["t", "residual"], list(zip(rep.residual_times, rep.residuals))))
            emit("profile.tsv", lambda p: write_cell_snapshots(p, [rep.profile]))
            emit("report.txt", lambda p: p.write_text(rep.to_text() + "\n"))
            verdicts.append(rep.verdict)

        elif kind == "viscosity-ladder":
            rep = vanishing_viscosity_convergence(
                spec, sc.values["solver.epsilon_ladder"],
                float(sc.values["experiment.t_end"]), cl_config=cl_cfg,
                n_cells=n_cells)
            emit("ladder.tsv", lambda p: write_table(
                p, ["epsilon", "l1_distance_to_zero_viscosity"],
                list(zip(rep.epsilons, rep.distances))))
            emit("report.txt", lambda p: p.write_text(rep.to_text() + "\n"))
            verdicts.append(rep.verdict)

    except ClhjError as exc:
        state = getattr(exc, "state", None)
        if state is not None:
            np.savetxt(out_dir / "postmortem_state.tsv", np.asarray(state),
                       fmt="%.17g", delimiter="\t")
        (out_dir / "report.txt").write_text(
            f"aborted: {exc}\nVERDICT: FAIL\n")
        echo(f"scenario {sc.values['scenario.id']}: aborted: {exc}")
        return 3

    write_manifest(out_dir, artifacts)
    status = 0 if all(v == PASS for v in verdicts) else 1
    echo(f"scenario {sc.values['scenario.id']}: "
         f"{'all PASS' if status == 0 else 'verdict ' + ','.join(verdicts)} "
         f"-> {out_dir}")
    return status


def refinement_table(sc: Scenario, levels=None, out_path=None):
    """Defect ladder rows for a refinement-capable scenario.

    One row per grid level: n_cells, dx, both final-time defects, and the
    fitted orders (written as 'n/a' when a single level makes the fit
    meaningless).  Levels must double at each step; anything else is refused
    because the order fit assumes a fixed ratio.  Only the equivalence
    experiment supports refinement.
    """
    kind = sc.values.get("experiment.kind")
    if kind != "equivalence":
        raise ScenarioError(
            f"experiment kind '{kind}' does not support refinement tables",
            key="experiment.kind")
    levels = list(sc.values["experiment.refinement_levels"]
                  if levels is None else levels)
    for a, b in zip(levels, levels[1:]):
        if b != 2 * a:
            raise ScenarioError(
                f"refinement levels must double at each step, got {a} -> {b}",
                key="experiment.refinement_levels")
    spec = builtin_catalog(sc.values["problem.name"], _problem_params(sc))
    cl_cfg, hj_cfg = _configs(sc)
    rep = check_equivalence(spec, float(sc.values["experiment.t_end"]), levels,
                            cl_config=cl_cfg, hj_config=hj_cfg)
    order_l1 = "n/a" if rep.order_l1 is None else rep.order_l1
    order_linf = "n/a" if rep.order_linf is None else rep.order_linf
    rows = [(lv.n_cells, lv.dx, lv.l1_defects[-1], lv.linf_defects[-1],
             order_l1, order_linf) for lv in rep.levels]
    if out_path is not None:
        write_table(out_path,
                    ["n_cells", "dx", "l1_defect", "linf_defect",
                     "order_l1", "order_linf"], rows)
    return rows
