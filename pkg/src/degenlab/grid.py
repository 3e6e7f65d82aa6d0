"""Graded 1D grids, fields on them, time series of fields, and finite-difference operators."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ArgumentError


@dataclass(frozen=True, eq=False)
class Grid:
    """Strictly increasing nodes x_0 < ... < x_M, all positive, at least 3 of them."""

    nodes: np.ndarray

    def __post_init__(self):
        x = np.array(self.nodes, dtype=float)
        if x.ndim != 1 or x.size < 3:
            raise ArgumentError("a grid needs at least 3 nodes")
        if not np.all(np.isfinite(x)) or x[0] <= 0:
            raise ArgumentError("grid nodes must be finite and positive")
        if np.any(np.diff(x) <= 0):
            raise ArgumentError("grid nodes must be strictly increasing")
        x.flags.writeable = False
        object.__setattr__(self, "nodes", x)

    def __len__(self):
        return self.nodes.size

    @property
    def a(self) -> float:
        return float(self.nodes[0])

    @property
    def b(self) -> float:
        return float(self.nodes[-1])

    @cached_property
    def spacing(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def h_max(self) -> float:
        return float(self.spacing.max())

    def trapezoid_weights(self) -> np.ndarray:
        h = self.spacing
        w = np.zeros(self.nodes.size)
        w[:-1] += 0.5 * h
        w[1:] += 0.5 * h
        return w


def make_graded_grid(a: float, b: float, count: int, grading: float = 1.0) -> Grid:
    """Nodes a + (b - a) (j/M)^grading, j = 0..M; grading > 1 clusters nodes near a."""
    if not (0 < a < b) or not np.isfinite(b):
        raise ArgumentError(f"need 0 < a < b < inf, got a={a}, b={b}")
    if int(count) != count or count < 3:
        raise ArgumentError("count must be an integer >= 3")
    if grading < 1:
        raise ArgumentError("grading must be >= 1")
    s = np.linspace(0.0, 1.0, int(count))
    x = a + (b - a) * s**grading
    x[-1] = b
    return Grid(x)


@dataclass(frozen=True, eq=False)
class Field:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.grid.nodes.shape:
            raise ArgumentError("field values must match the grid length")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    def with_values(self, values) -> "Field":
        return Field(self.grid, values)

    @classmethod
    def from_function(cls, grid: Grid, f) -> "Field":
        return cls(grid, f(grid.nodes))


@dataclass(frozen=True, eq=False)
class FieldSeries:
    """Snapshots u(t_k, x_i) on a shared grid.

    ``times`` start at 0; ``t0`` is the physical time of the first snapshot, so
    the physical clock is ``t0 + times``.
    """

    grid: Grid
    times: np.ndarray
    values: np.ndarray
    t0: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        v = np.array(self.values, dtype=float)
        if t.ndim != 1 or t.size < 1:
            raise ArgumentError("a series needs at least one time")
        if t[0] != 0:
            raise ArgumentError("series times must start at 0")
        if np.any(np.diff(t) <= 0):
            raise ArgumentError("series times must be strictly increasing")
        if v.shape != (t.size, len(self.grid)):
            raise ArgumentError(f"values shape {v.shape} != {(t.size, len(self.grid))}")
        t.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.times.size

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def T(self) -> float:
        return float(self.times[-1])

    @property
    def physical_times(self) -> np.ndarray:
        return self.t0 + self.times

    def snapshot(self, k: int) -> Field:
        return Field(self.grid, self.values[k])

    @property
    def snapshots(self) -> list[Field]:
        return [self.snapshot(k) for k in range(len(self))]

    @property
    def initial(self) -> Field:
        return self.snapshot(0)

    @property
    def final(self) -> Field:
        return self.snapshot(-1)

    def with_values(self, values) -> "FieldSeries":
        return FieldSeries(self.grid, self.times, values, self.t0, dict(self.meta))

    def window(self, t_lo: float, t_hi: float, x_lo: float, x_hi: float) -> "FieldSeries":
        """Sub-series on physical times [t_lo, t_hi] and nodes in [x_lo, x_hi]."""
        tp = self.physical_times
        tk = np.flatnonzero((tp >= t_lo - 1e-12) & (tp <= t_hi + 1e-12))
        xk = np.flatnonzero((self.grid.nodes >= x_lo) & (self.grid.nodes <= x_hi))
        if tk.size < 1 or xk.size < 3:
            raise ArgumentError("window holds too few snapshots or nodes")
        times = self.times[tk]
        return FieldSeries(Grid(self.grid.nodes[xk]), times - times[0], self.values[np.ix_(tk, xk)],
                           self.t0 + float(times[0]), dict(self.meta))

    @classmethod
    def from_fields(cls, times, fields, t0: float = 0.0) -> "FieldSeries":
        grid = fields[0].grid
        for f in fields:
            if f.grid is not grid and not np.array_equal(f.grid.nodes, grid.nodes):
                raise ArgumentError("snapshots must share one grid")
        return cls(grid, np.asarray(times), np.stack([f.values for f in fields]), t0)

    # -- CSV: header t,x,u; one row per (time, node); 17 significant digits

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "u"])
        x = self.grid.nodes
        for t, row in zip(self.physical_times, self.values):
            for xi, ui in zip(x, row):
                w.writerow([f"{t:.17g}", f"{xi:.17g}", f"{ui:.17g}"])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path) -> "FieldSeries":
        return cls.from_csv_text(Path(path).read_text())

    @classmethod
    def from_csv_text(cls, text: str) -> "FieldSeries":
        rows = list(csv.reader(io.StringIO(text)))
        if rows[0] != ["t", "x", "u"]:
            raise ArgumentError("expected header t,x,u")
        data = np.array(rows[1:], dtype=float)
        times = np.unique(data[:, 0])
        nt = times.size
        nx = data.shape[0] // nt
        if nx * nt != data.shape[0]:
            raise ArgumentError("CSV rows do not form a full time x node table")
        x = data[:nx, 1]
        values = data[:, 2].reshape(nt, nx)
        t0 = float(times[0])
        return cls(Grid(x), times - t0, values, t0)


def laplacian_nonuniform(f: Field) -> Field:
    """Three-point second difference on a nonuniform grid (exact for quadratics).

    Endpoint entries copy the adjacent interior value; they are diagnostic only.
    """
    u = f.values
    h = f.grid.spacing
    hl, hr = h[:-1], h[1:]
    out = np.empty_like(u)
    out[1:-1] = 2.0 * ((u[2:] - u[1:-1]) / hr - (u[1:-1] - u[:-2]) / hl) / (hl + hr)
    out[0] = out[1]
    out[-1] = out[-2]
    return Field(f.grid, out)


def laplacian_coefficients(grid: Grid):
    """(lower, upper) weights so that (L u)_i = lo_i (u_{i-1} - u_i) + up_i (u_{i+1} - u_i)."""
    h = grid.spacing
    hl, hr = h[:-1], h[1:]
    return 2.0 / (hl * (hl + hr)), 2.0 / (hr * (hl + hr))


def gradient(f: Field) -> Field:
    """Second-order central differences inside, first-order one-sided at the ends."""
    return Field(f.grid, np.gradient(f.values, f.grid.nodes, edge_order=1))


def gradient_values(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Row-wise spatial gradient for a (time, node) array."""
    return np.gradient(values, grid.nodes, axis=-1, edge_order=1)


def time_derivative(series: FieldSeries) -> FieldSeries:
    """Centered differences in time inside, one-sided at the first and last snapshot."""
    if len(series) < 2:
        raise ArgumentError("time derivative needs at least 2 snapshots")
    dv = np.gradient(series.values, series.times, axis=0, edge_order=1)
    return FieldSeries(series.grid, series.times, dv, series.t0)
