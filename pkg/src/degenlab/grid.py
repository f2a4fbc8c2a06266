"""Discrete geometry of the periodic half-space strip and parabolic cylinders.

The strip is periodic in the tangential direction ``x1`` (period ``Lx``,
uniform spacing) and resolved in the normal direction ``xN`` by a graded mesh
``x_j = Xmax * (j/J)**gamma`` that clusters nodes at the degenerate boundary
``xN = 0``.  A parabolic cylinder is a spatial box of radius ``R`` crossed
with the two-sided time window ``(tc - R**2, tc + R**2)``.

Cylinder integrals use per-axis dual-cell overlap weights, which makes them
exact for constants and monotone under cylinder nesting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np


@dataclass(frozen=True, eq=False)
class StripGrid:
    """Tensor grid on ``[0, Lx) x [0, Xmax]`` with graded normal nodes."""

    Lx: float
    Mx: int
    Xmax: float
    J: int
    gamma: float
    #: exact value of Lx / pi when the period is a rational multiple of pi
    lx_over_pi: Fraction | None = None
    x1: np.ndarray = field(repr=False, default=None)
    xn: np.ndarray = field(repr=False, default=None)

    @property
    def hx(self) -> float:
        return self.Lx / self.Mx

    @property
    def shape(self) -> tuple[int, int]:
        return (self.Mx, self.J + 1)

    def normal_spacings(self) -> np.ndarray:
        """h_j = x_j - x_{j-1} for j = 1..J."""
        return np.diff(self.xn)

    def normal_cell_edges(self) -> np.ndarray:
        """Dual-cell edges 0 = e_0 < e_1 < ... < e_{J+1} = Xmax around each node."""
        mid = 0.5 * (self.xn[:-1] + self.xn[1:])
        return np.concatenate(([0.0], mid, [self.Xmax]))

    def trapezoid_weights_normal(self) -> np.ndarray:
        w = np.empty(self.J + 1)
        h = self.normal_spacings()
        w[0] = 0.5 * h[0]
        w[1:-1] = 0.5 * (h[:-1] + h[1:])
        w[-1] = 0.5 * h[-1]
        return w


def build_grid(
    Lx: float,
    Mx: int,
    Xmax: float,
    J: int,
    gamma: float,
    lx_over_pi: Fraction | None = None,
) -> StripGrid:
    """Build the strip grid; gamma = 1 gives uniform normal nodes."""
    if Lx <= 0 or Xmax <= 0:
        raise ValueError("Lx and Xmax must be positive")
    if Mx % 2 != 0:
        raise ValueError(f"Mx must be even, got {Mx}")
    if Mx < 8 or J < 8:
        raise ValueError("Mx and J must both be at least 8")
    if gamma < 1:
        raise ValueError("grading exponent gamma must be >= 1")
    x1 = np.arange(Mx) * (Lx / Mx)
    xn = Xmax * (np.arange(J + 1) / J) ** gamma
    if not np.all(np.diff(xn) > 0):
        raise ValueError("normal nodes are not strictly increasing")
    return StripGrid(float(Lx), int(Mx), float(Xmax), int(J), float(gamma), lx_over_pi, x1, xn)


@dataclass(frozen=True)
class ParabolicCylinder:
    """Spatial box ``|x1-x1c| < R``, ``|xN-xNc| < R`` (cut to xN > 0) times
    the time window ``(tc - R^2, tc + R^2)``."""

    x1c: float
    xnc: float
    tc: float
    R: float

    def __post_init__(self) -> None:
        if self.R <= 0:
            raise ValueError("cylinder radius must be positive")

    def scaled(self, factor: float) -> "ParabolicCylinder":
        return ParabolicCylinder(self.x1c, self.xnc, self.tc, factor * self.R)


@dataclass(frozen=True, eq=False)
class CylinderMask:
    """Per-axis index sets of grid nodes / snapshots inside a cylinder."""

    i_idx: np.ndarray
    j_idx: np.ndarray
    k_idx: np.ndarray
    clipped: bool

    @property
    def count(self) -> int:
        return self.i_idx.size * self.j_idx.size * self.k_idx.size

    @property
    def is_empty(self) -> bool:
        return self.count == 0


def _periodic_offset(x: np.ndarray, center: float, period: float) -> np.ndarray:
    """Signed offsets from center mapped into [-period/2, period/2)."""
    return (x - center + 0.5 * period) % period - 0.5 * period


def cylinder_mask(
    grid: StripGrid, cyl: ParabolicCylinder, snapshot_times: np.ndarray
) -> CylinderMask:
    """Indices of all (node, snapshot) pairs inside the cylinder.

    The clipped flag is set when the cylinder leaves the computational box
    through the outer boundary, wraps around the tangential period, or
    extends outside the run's time window.  The cut at xN = 0 is part of the
    cylinder's definition, not clipping.
    """
    times = np.asarray(snapshot_times, dtype=float)
    clipped = False

    if cyl.R > 0.5 * grid.Lx:
        clipped = True
    d1 = np.abs(_periodic_offset(grid.x1, cyl.x1c, grid.Lx))
    i_idx = np.nonzero(d1 < cyl.R)[0]

    if cyl.xnc + cyl.R > grid.Xmax:
        clipped = True
    j_idx = np.nonzero((np.abs(grid.xn - cyl.xnc) < cyl.R) & (grid.xn > 0))[0]

    t_lo, t_hi = cyl.tc - cyl.R**2, cyl.tc + cyl.R**2
    if times.size == 0 or t_lo < times[0] or t_hi > times[-1]:
        clipped = True
    k_idx = np.nonzero((times > t_lo) & (times < t_hi))[0]

    return CylinderMask(i_idx, j_idx, k_idx, clipped)


def _overlap_weights(edges: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Length of the overlap of each cell [edges[i], edges[i+1]] with [lo, hi]."""
    left = np.maximum(edges[:-1], lo)
    right = np.minimum(edges[1:], hi)
    return np.maximum(right - left, 0.0)


def _overlap_cells_unordered(offs: np.ndarray, h: float, R: float) -> np.ndarray:
    lo = np.maximum(offs - h, -R)
    hi = np.minimum(offs + h, R)
    return np.maximum(hi - lo, 0.0)


def _time_cell_edges(times: np.ndarray) -> np.ndarray:
    mid = 0.5 * (times[:-1] + times[1:])
    return np.concatenate(([times[0]], mid, [times[-1]]))


def integrate_cylinder(
    values: np.ndarray,
    cyl: ParabolicCylinder,
    grid: StripGrid,
    snapshot_times: np.ndarray,
) -> float:
    """Quadrature of ``values`` (time, x1, xN) over the space-time cylinder.

    Dual-cell overlap weights per axis: exact for per-cell constants and for
    the total measure, and second-order accurate for smooth integrands.
    """
    times = np.asarray(snapshot_times, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.shape != (times.size, grid.Mx, grid.J + 1):
        raise ValueError(
            f"values shape {values.shape} does not match (times, Mx, J+1)"
        )
    mask = cylinder_mask(grid, cyl, times)
    if mask.is_empty:
        raise ValueError("degenerate cylinder: no (node, snapshot) pair inside")

    if cyl.R >= 0.5 * grid.Lx:
        wi = np.full(grid.Mx, grid.hx)  # cylinder wraps the whole period
    else:
        wi = _overlap_cells_unordered(
            _periodic_offset(grid.x1, cyl.x1c, grid.Lx), 0.5 * grid.hx, cyl.R
        )
    wj = _overlap_weights(
        grid.normal_cell_edges(), max(cyl.xnc - cyl.R, 0.0), min(cyl.xnc + cyl.R, grid.Xmax)
    )
    wk = _overlap_weights(
        _time_cell_edges(times),
        max(cyl.tc - cyl.R**2, times[0]),
        min(cyl.tc + cyl.R**2, times[-1]),
    )
    return float(np.einsum("kij,k,i,j->", values, wk, wi, wj))


@dataclass(frozen=True, eq=False)
class QuadratureWeights:
    """Trapezoid-type weights for full-box space and time integrals."""

    space: np.ndarray  # (Mx, J+1), tangential uniform x normal trapezoid
    time: np.ndarray | None = None

    def integrate_space(self, snapshot_values: np.ndarray) -> float:
        return float(np.sum(self.space * snapshot_values))


def quadrature_weights(grid: StripGrid, snapshot_times: np.ndarray | None = None) -> QuadratureWeights:
    wn = grid.trapezoid_weights_normal()
    space = np.full(grid.Mx, grid.hx)[:, None] * wn[None, :]
    time = None
    if snapshot_times is not None:
        times = np.asarray(snapshot_times, dtype=float)
        time = np.empty(times.size)
        dt = np.diff(times)
        time[0] = 0.5 * dt[0]
        time[1:-1] = 0.5 * (dt[:-1] + dt[1:])
        time[-1] = 0.5 * dt[-1]
    return QuadratureWeights(space, time)
