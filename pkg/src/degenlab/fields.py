"""Grid snapshots and time series of the evolving field, with CSV round-trip.

A series serialises to a directory of per-snapshot CSV files (header
``x1,xN,u``) plus ``times.csv``; the format is consumed by the estimate
suite and by external plotting.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grid import StripGrid


@dataclass(frozen=True, eq=False)
class FieldSnapshot:
    """Field values at every grid node at one time."""

    values: np.ndarray  # (Mx, J+1)
    t: float

    def __post_init__(self) -> None:
        if self.values.ndim != 2:
            raise ValueError("snapshot values must be 2-D (tangential, normal)")


@dataclass(frozen=True, eq=False)
class FieldSeries:
    """Snapshots at uniformly spaced, strictly increasing save times."""

    grid: StripGrid
    times: np.ndarray  # (K,)
    data: np.ndarray  # (K, Mx, J+1)

    def __post_init__(self) -> None:
        if self.data.shape != (self.times.size, self.grid.Mx, self.grid.J + 1):
            raise ValueError("series data does not match grid/time shapes")
        dt = np.diff(self.times)
        if self.times.size > 1 and not np.all(dt > 0):
            raise ValueError("save times must be strictly increasing")
        if self.times.size > 2 and not np.allclose(dt, dt[0], rtol=1e-9, atol=0.0):
            raise ValueError("save times must be uniformly spaced")

    def __len__(self) -> int:
        return self.times.size

    def snapshot(self, k: int) -> FieldSnapshot:
        return FieldSnapshot(self.data[k], float(self.times[k]))

    @property
    def dt_save(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self) > 1 else 0.0

    def time_derivative(self) -> np.ndarray:
        """d(u)/dt of the saved snapshots: centered differences, one-sided ends."""
        if len(self) < 2:
            raise ValueError("need at least two snapshots to difference in time")
        return np.gradient(self.data, self.times, axis=0)


def save_series(series: FieldSeries, directory: str | Path) -> list[Path]:
    """Write one ``snap_*.csv`` per save time plus ``times.csv``; returns paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    times_path = directory / "times.csv"
    with times_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "t"])
        for k, t in enumerate(series.times):
            writer.writerow([k, repr(float(t))])
    paths.append(times_path)
    x1 = series.grid.x1
    xn = series.grid.xn
    for k in range(len(series)):
        path = directory / f"snap_{k:05d}.csv"
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x1", "xN", "u"])
            snap = series.data[k]
            for i in range(series.grid.Mx):
                for j in range(series.grid.J + 1):
                    writer.writerow([repr(float(x1[i])), repr(float(xn[j])), repr(float(snap[i, j]))])
        paths.append(path)
    return paths


def load_series(directory: str | Path, grid: StripGrid) -> FieldSeries:
    """Read a series written by :func:`save_series`; node order is verified."""
    directory = Path(directory)
    with (directory / "times.csv").open() as fh:
        rows = list(csv.reader(fh))[1:]
    times = np.array([float(t) for _, t in rows])
    data = np.empty((times.size, grid.Mx, grid.J + 1))
    for k in range(times.size):
        with (directory / f"snap_{k:05d}.csv").open() as fh:
            body = list(csv.reader(fh))[1:]
        if len(body) != grid.Mx * (grid.J + 1):
            raise ValueError(f"snapshot {k} has wrong node count")
        flat = np.array([[float(a), float(b), float(c)] for a, b, c in body])
        x1 = flat[:, 0].reshape(grid.Mx, grid.J + 1)
        xn = flat[:, 1].reshape(grid.Mx, grid.J + 1)
        if not (np.allclose(x1[:, 0], grid.x1) and np.allclose(xn[0], grid.xn)):
            raise ValueError(f"snapshot {k} does not match the grid")
        data[k] = flat[:, 2].reshape(grid.Mx, grid.J + 1)
    return FieldSeries(grid, times, data)
