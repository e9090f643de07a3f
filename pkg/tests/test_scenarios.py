import numpy as np
import pytest

from clhjlab.cl import SchemeConfig, solve_cl
from clhjlab.cli import main
from clhjlab.errors import ScenarioError
from clhjlab.catalog import builtin_catalog, catalog_names
from clhjlab.hj import HJSchemeConfig, solve_hj
from clhjlab.scenario import parse_scenario, run_scenario
from clhjlab.snapshots import (
    read_cell_snapshots,
    read_nodal_snapshots,
    sha256_file,
    write_cell_snapshots,
    write_nodal_snapshots,
)


def write_scenario(tmp_path, name="s.scn", **overrides):
    base = {
        "scenario.id": "test-run",
        "problem.name": "linear-advection",
        "experiment.kind": "equivalence",
        "experiment.t_end": 0.25,
        "experiment.refinement_levels": [32, 64],
        "solver.cfl": 0.45,
        "outputs.dir": str(tmp_path / "out"),
    }
    base.update(overrides)
    lines = []
    for k, v in base.items():
        if v is None:
            continue
        if isinstance(v, str):
            lines.append(f"{k} = {v}")
        else:
            import json
            lines.append(f"{k} = {json.dumps(v)}")
    p = tmp_path / name
    p.write_text("# test scenario\n" + "\n".join(lines) + "\n")
    return p


# ---------------------------------------------------------------------------
# parsing and validation

def test_parse_names_unknown_key_and_line(tmp_path):
    p = tmp_path / "bad.scn"
    p.write_text("scenario.id = x\nbogus.key = 1\n")
    with pytest.raises(ScenarioError) as err:
        parse_scenario(p)
    assert "bogus.key" in str(err.value)
    assert ":2:" in str(err.value)


def test_parse_rejects_out_of_range_cfl(tmp_path):
    p = write_scenario(tmp_path, **{"solver.cfl": 1.5})
    with pytest.raises(ScenarioError) as err:
        parse_scenario(p)
    assert "solver.cfl" in str(err.value)
    # no compute happened: output dir untouched
    assert not (tmp_path / "out").exists()


def test_parse_rejects_missing_required_key(tmp_path):
    p = tmp_path / "missing.scn"
    p.write_text("scenario.id = x\nproblem.name = burgers\n"
                 "experiment.kind = equivalence\noutputs.dir = out\n"
                 "experiment.refinement_levels = [32, 64]\n")
    with pytest.raises(ScenarioError) as err:
        parse_scenario(p)
    assert "solver.t_end" in str(err.value)


def test_parse_rejects_duplicate_key(tmp_path):
    p = tmp_path / "dup.scn"
    p.write_text("scenario.id = x\nscenario.id = y\n")
    with pytest.raises(ScenarioError) as err:
        parse_scenario(p)
    assert "duplicate" in str(err.value)


def test_parse_rejects_non_doubling_levels(tmp_path):
    p = write_scenario(tmp_path, **{"experiment.refinement_levels": [32, 60]})
    with pytest.raises(ScenarioError) as err:
        parse_scenario(p)
    assert "double" in str(err.value)


def test_parse_rejects_bad_epsilon_ladder(tmp_path):
    p = write_scenario(
        tmp_path,
        **{"experiment.kind": "viscosity-ladder",
           "experiment.refinement_levels": None,
           "domain.n_cells": 512,
           "solver.epsilon_ladder": [0.01, 0.02]})
    with pytest.raises(ScenarioError) as err:
        parse_scenario(p)
    assert "epsilon_ladder" in str(err.value)


# ---------------------------------------------------------------------------
# running

def test_run_linear_equivalence_exit_zero(tmp_path):
    p = write_scenario(tmp_path)
    sc = parse_scenario(p)
    assert run_scenario(sc, echo=lambda *_: None) == 0
    out = tmp_path / "out" / "test-run"
    report = (out / "report.txt").read_text()
    assert "VERDICT: PASS" in report
    table = (out / "equivalence.tsv").read_text().splitlines()
    for row in table[1:]:
        cells = row.split("\t")
        assert float(cells[3]) <= 1e-10
        assert float(cells[4]) <= 1e-10
    assert (out / "manifest.txt").exists()


def test_rerun_is_byte_identical(tmp_path):
    p = write_scenario(tmp_path)
    sc = parse_scenario(p)
    run_scenario(sc, echo=lambda *_: None)
    out = tmp_path / "out" / "test-run"
    first = (out / "manifest.txt").read_text()
    hashes = {name: sha256_file(out / name)
              for name in ("equivalence.tsv", "report.txt")}
    run_scenario(sc, echo=lambda *_: None)
    assert (out / "manifest.txt").read_text() == first
    for name, digest in hashes.items():
        assert sha256_file(out / name) == digest


def test_run_solve_cl_writes_snapshots(tmp_path):
    p = write_scenario(
        tmp_path,
        **{"experiment.kind": "solve-cl",
           "experiment.refinement_levels": None,
           "experiment.snapshot_times": [0.1, 0.2],
           "domain.n_cells": 64,
           "problem.name": "burgers"})
    sc = parse_scenario(p)
    assert run_scenario(sc, echo=lambda *_: None) == 0
    fields = read_cell_snapshots(tmp_path / "out" / "test-run" / "snapshots.tsv")
    assert [f.time for f in fields] == [0.0, 0.1, 0.2, 0.25]


def test_output_root_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("CLHJLAB_OUTPUT_ROOT", str(tmp_path / "root"))
    p = write_scenario(tmp_path, **{"outputs.dir": "rel"})
    sc = parse_scenario(p)
    run_scenario(sc, echo=lambda *_: None)
    assert (tmp_path / "root" / "rel" / "test-run" / "report.txt").exists()


# ---------------------------------------------------------------------------
# snapshot round trips

def test_cell_snapshot_roundtrip_bit_identical(tmp_path, rng):
    spec = builtin_catalog("burgers")
    fields = solve_cl(spec, SchemeConfig(), 0.2, snapshot_times=[0.1, 0.2],
                      n_cells=64)
    path = tmp_path / "cells.tsv"
    write_cell_snapshots(path, fields)
    back = read_cell_snapshots(path)
    assert len(back) == len(fields)
    for a, b in zip(fields, back):
        assert a.time == b.time
        assert a.gauge == b.gauge
        assert a.epsilon == b.epsilon
        assert np.array_equal(a.values, b.values)
        assert a.grid == b.grid


def test_nodal_snapshot_roundtrip_bit_identical(tmp_path):
    spec = builtin_catalog("burgers")
    fields = solve_hj(spec, HJSchemeConfig(), 0.2, snapshot_times=[0.1],
                      n_cells=64)
    path = tmp_path / "nodes.tsv"
    write_nodal_snapshots(path, fields)
    back = read_nodal_snapshots(path)
    for a, b in zip(fields, back):
        assert a.time == b.time
        assert a.mean_slope == b.mean_slope
        assert np.array_equal(a.values, b.values)


# ---------------------------------------------------------------------------
# command line

def test_cli_validate_and_run(tmp_path, capsys):
    p = write_scenario(tmp_path)
    assert main(["validate", str(p)]) == 0
    assert "OK" in capsys.readouterr().out
    assert main(["run", str(p)]) == 0


def test_cli_bad_scenario_exit_two(tmp_path, capsys):
    p = write_scenario(tmp_path, **{"solver.cfl": 1.5})
    assert main(["validate", str(p)]) == 2
    assert main(["run", str(p)]) == 2
    err = capsys.readouterr().err
    assert "solver.cfl" in err


def test_cli_list_catalog(capsys):
    assert main(["list-catalog"]) == 0
    out = capsys.readouterr().out
    for name in catalog_names():
        assert name in out


def test_solver_t_end_key_accepted(tmp_path):
    p = tmp_path / "alt.scn"
    p.write_text("\n".join([
        "scenario.id = alt",
        "problem.name = linear-advection",
        "experiment.kind = equivalence",
        "solver.t_end = 0.25",
        "experiment.refinement_levels = [32, 64]",
        f"outputs.dir = {tmp_path / 'out'}",
    ]) + "\n")
    sc = parse_scenario(p)
    assert sc.values["experiment.t_end"] == 0.25
    both = tmp_path / "both.scn"
    both.write_text(p.read_text() + "experiment.t_end = 0.3\n")
    with pytest.raises(ScenarioError):
        parse_scenario(both)


def test_missing_t_end_names_solver_key(tmp_path):
    p = tmp_path / "missing2.scn"
    p.write_text("\n".join([
        "scenario.id = x",
        "problem.name = burgers",
        "experiment.kind = solve-cl",
        "domain.n_cells = 32",
        "outputs.dir = out",
    ]) + "\n")
    with pytest.raises(ScenarioError) as err:
        parse_scenario(p)
    assert "solver.t_end" in str(err.value)


def test_refinement_table_rows_and_orders(tmp_path):
    from clhjlab.scenario import refinement_table

    p = write_scenario(tmp_path, **{"problem.name": "burgers",
                                    "experiment.refinement_levels": [32, 64, 128, 256]})
    sc = parse_scenario(p)
    out = tmp_path / "table.tsv"
    rows = refinement_table(sc, out_path=out)
    assert len(rows) == 4
    defects = [r[2] for r in rows]
    assert all(b < a for a, b in zip(defects, defects[1:]))
    assert out.exists()

    single = refinement_table(sc, levels=[64])
    assert len(single) == 1
    assert single[0][4] == "n/a" and single[0][5] == "n/a"

    with pytest.raises(ScenarioError):
        refinement_table(sc, levels=[32, 60])

    solve = write_scenario(tmp_path, name="s2.scn",
                           **{"experiment.kind": "solve-cl",
                              "experiment.refinement_levels": None,
                              "domain.n_cells": 32})
    with pytest.raises(ScenarioError):
        refinement_table(parse_scenario(solve))


def test_solver_abort_dumps_postmortem(tmp_path, monkeypatch):
    import clhjlab.scenario as scenario_mod
    from clhjlab.errors import EvaluationError

    def boom(*args, **kwargs):
        raise EvaluationError("state became non-finite at t=0.01",
                              time=0.01, state=np.zeros(8))

    monkeypatch.setattr(scenario_mod, "solve_cl", boom)
    p = write_scenario(tmp_path, **{"experiment.kind": "solve-cl",
                                    "experiment.refinement_levels": None,
                                    "domain.n_cells": 64,
                                    "problem.name": "burgers"})
    sc = parse_scenario(p)
    assert run_scenario(sc, echo=lambda *_: None) == 3
    out = tmp_path / "out" / "test-run"
    assert (out / "postmortem_state.tsv").exists()
    assert "VERDICT: FAIL" in (out / "report.txt").read_text()
