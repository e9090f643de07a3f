"""Uniform 1D grids and the field containers used by both solvers.

A ``Grid`` covers ``[x_left, x_left + length)`` with ``n_cells`` equal cells.
Cell ``j`` is centered at ``x_left + (j + 1/2) dx``; face ``j`` sits at
``x_left + j dx`` and is the left face of cell ``j``.  ``CellField`` holds
cell averages (conservation-law states); ``NodalField`` holds face/node
values (Hamilton-Jacobi states).

All containers are immutable after construction and safe to share across
parallel runs; solvers always return fresh fields.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import GridMismatchError

PERIODIC = "periodic"
OUTFLOW = "outflow"


@dataclass(frozen=True)
class Grid:
    n_cells: int
    x_left: float
    length: float
    boundary: str = PERIODIC

    def __post_init__(self):
        if self.n_cells < 4:
            raise ValueError(f"n_cells must be >= 4, got {self.n_cells}")
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length}")
        if self.boundary not in (PERIODIC, OUTFLOW):
            raise ValueError(f"unknown boundary {self.boundary!r}")

    @property
    def dx(self) -> float:
        return self.length / self.n_cells

    @property
    def periodic(self) -> bool:
        return self.boundary == PERIODIC

    def cell_centers(self) -> np.ndarray:
        return self.x_left + (np.arange(self.n_cells) + 0.5) * self.dx

    def face_positions(self) -> np.ndarray:
        """All n_cells+1 faces; on a periodic grid the last wraps onto the first."""
        return self.x_left + np.arange(self.n_cells + 1) * self.dx

    def node_positions(self) -> np.ndarray:
        """Node sample points for NodalField values (one period, or all faces)."""
        faces = self.face_positions()
        return faces[:-1] if self.periodic else faces

    @property
    def n_nodes(self) -> int:
        return self.n_cells if self.periodic else self.n_cells + 1


def _freeze(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class CellField:
    """Cell-averaged state u_j at one time level.

    ``gauge`` accumulates the time integral of the anchor-face flux variable
    so that ``primitive(field) + gauge`` evolves like the matching
    Hamilton-Jacobi value function.  ``epsilon`` records the artificial
    viscosity of the run that produced the field.
    """

    values: np.ndarray
    grid: Grid
    time: float = 0.0
    gauge: float = 0.0
    epsilon: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))
        if self.values.shape != (self.grid.n_cells,):
            raise ValueError(
                f"expected {self.grid.n_cells} cell values, got {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("cell values must be finite")
        if self.time < 0:
            raise ValueError("time must be >= 0")

    def with_values(self, values, time=None, gauge=None) -> "CellField":
        return replace(
            self,
            values=values,
            time=self.time if time is None else time,
            gauge=self.gauge if gauge is None else gauge,
        )

    def total_mass(self) -> float:
        return float(np.sum(self.values) * self.grid.dx)


@dataclass(frozen=True)
class NodalField:
    """Node values v_i of a value function at one time level.

    On a periodic grid the stored values cover one period and the field
    carries ``mean_slope`` m so that v(x + L) = v(x) + m L; v itself need not
    be periodic.  ``gauge`` records any constant-in-x shift applied on top of
    the raw solver values (for example a f(0) t normalization).
    """

    values: np.ndarray
    grid: Grid
    time: float = 0.0
    mean_slope: float = 0.0
    gauge: float = 0.0
    epsilon: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))
        if self.values.shape != (self.grid.n_nodes,):
            raise ValueError(
                f"expected {self.grid.n_nodes} node values, got {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("node values must be finite")
        if self.time < 0:
            raise ValueError("time must be >= 0")

    def with_values(self, values, time=None, gauge=None) -> "NodalField":
        return replace(
            self,
            values=values,
            time=self.time if time is None else time,
            gauge=self.gauge if gauge is None else gauge,
        )

    def closed_values(self) -> np.ndarray:
        """Values on all n_cells+1 faces, closing the period with mean_slope."""
        if not self.grid.periodic:
            return self.values
        right = self.values[0] + self.mean_slope * self.grid.length
        return np.concatenate([self.values, [right]])


def require_same_grid(a, b):
    ga, gb = a.grid, b.grid
    if (
        ga.n_cells != gb.n_cells
        or ga.boundary != gb.boundary
        or abs(ga.x_left - gb.x_left) > 1e-14
        or abs(ga.length - gb.length) > 1e-14
    ):
        raise GridMismatchError(f"grids differ: {ga} vs {gb}")
    if isinstance(a, NodalField) and isinstance(b, NodalField):
        if abs(a.mean_slope - b.mean_slope) > 1e-10 * (1 + abs(a.mean_slope)):
            raise GridMismatchError(
                "nodal fields carry different mean slopes; "
                "their difference is not periodic"
            )
