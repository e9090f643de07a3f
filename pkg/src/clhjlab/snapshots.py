"""Delimited-text export and import of solver output, plus table helpers.

All floats are printed with 17 significant digits so a round trip through
text reproduces the binary values exactly.  Snapshot files carry one record
per (time, position) pair; grid and per-snapshot metadata travel in
``#``-prefixed header lines so re-import rebuilds bit-identical fields.
Writers emit rows in a fixed order and never include timestamps, which makes
repeated runs byte-identical.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

import numpy as np

from .grids import CellField, Grid, NodalField

FMT = "%.17g"


def _fmt(x) -> str:
    return FMT % float(x)


def _grid_header(grid: Grid) -> str:
    return ("# grid n_cells=%d x_left=%s length=%s boundary=%s"
            % (grid.n_cells, _fmt(grid.x_left), _fmt(grid.length), grid.boundary))


def _parse_grid(line: str) -> Grid:
    parts = dict(p.split("=", 1) for p in line.split()[2:])
    return Grid(n_cells=int(parts["n_cells"]), x_left=float(parts["x_left"]),
                length=float(parts["length"]), boundary=parts["boundary"])


def write_cell_snapshots(path, fields) -> None:
    """One record per (time, cell): columns t, x, u, tab separated."""
    path = Path(path)
    lines = ["# clhjlab cell snapshots", _grid_header(fields[0].grid),
             "# columns: t\tx\tu"]
    for f in fields:
        lines.append("# snapshot t=%s gauge=%s epsilon=%s"
                      % (_fmt(f.time), _fmt(f.gauge), _fmt(f.epsilon)))
        xs = f.grid.cell_centers()
        t = _fmt(f.time)
        for x, u in zip(xs, f.values):
            lines.append(f"{t}\t{_fmt(x)}\t{_fmt(u)}")
    path.write_text("\n".join(lines) + "\n")


def read_cell_snapshots(path) -> list:
    path = Path(path)
    grid = None
    metas = []   # (time, gauge, epsilon)
    rows = {}
    for line in path.read_text().splitlines():
        if line.startswith("# grid"):
            grid = _parse_grid(line)
        elif line.startswith("# snapshot"):
            parts = dict(p.split("=", 1) for p in line.split()[2:])
            metas.append((float(parts["t"]), float(parts["gauge"]),
                          float(parts["epsilon"])))
            rows[len(metas) - 1] = []
        elif line.startswith("#") or not line.strip():
            continue
        else:
            t, x, u = line.split("\t")
            rows[len(metas) - 1].append(float(u))
    if grid is None:
        raise ValueError(f"{path}: missing grid header")
    out = []
    for i, (t, gauge, eps) in enumerate(metas):
        out.append(CellField(values=np.array(rows[i]), grid=grid, time=t,
                             gauge=gauge, epsilon=eps))
    return out


def write_nodal_snapshots(path, fields) -> None:
    """One record per (time, node): columns t, x, v, gauge, tab separated."""
    path = Path(path)
    lines = ["# clhjlab nodal snapshots", _grid_header(fields[0].grid),
             "# columns: t\tx\tv\tgauge"]
    for f in fields:
        lines.append("# snapshot t=%s gauge=%s epsilon=%s mean_slope=%s"
                      % (_fmt(f.time), _fmt(f.gauge), _fmt(f.epsilon),
                         _fmt(f.mean_slope)))
        xs = f.grid.node_positions()
        t = _fmt(f.time)
        g = _fmt(f.gauge)
        for x, v in zip(xs, f.values):
            lines.append(f"{t}\t{_fmt(x)}\t{_fmt(v)}\t{g}")
    path.write_text("\n".join(lines) + "\n")


def read_nodal_snapshots(path) -> list:
    path = Path(path)
    grid = None
    metas = []
    rows = {}
    for line in path.read_text().splitlines():
        if line.startswith("# grid"):
            grid = _parse_grid(line)
        elif line.startswith("# snapshot"):
            parts = dict(p.split("=", 1) for p in line.split()[2:])
            metas.append((float(parts["t"]), float(parts["gauge"]),
                          float(parts["epsilon"]), float(parts["mean_slope"])))
            rows[len(metas) - 1] = []
        elif line.startswith("#") or not line.strip():
            continue
        else:
            vals = line.split("\t")
            rows[len(metas) - 1].append(float(vals[2]))
    if grid is None:
        raise ValueError(f"{path}: missing grid header")
    out = []
    for i, (t, gauge, eps, slope) in enumerate(metas):
        out.append(NodalField(values=np.array(rows[i]), grid=grid, time=t,
                              mean_slope=slope, gauge=gauge, epsilon=eps))
    return out


def write_table(path, columns, rows) -> None:
    """Tab-separated table; floats at full precision, deterministic order."""
    path = Path(path)
    lines = ["\t".join(columns)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            elif isinstance(v, (float, np.floating)):
                cells.append(_fmt(v))
            else:
                cells.append(str(v))
        lines.append("\t".join(cells))
    path.write_text("\n".join(lines) + "\n")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def write_manifest(directory, names) -> Path:
    """List every artifact with a content hash; sorted, reproducible."""
    directory = Path(directory)
    lines = []
    for name in sorted(names):
        lines.append(f"{sha256_file(directory / name)}  {name}")
    out = directory / "manifest.txt"
    out.write_text("\n".join(lines) + "\n")
    return out
