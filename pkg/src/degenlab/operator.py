"""Discrete spatial operator ``A u = div(xN^2 grad(Lap u) - beta grad u)``.

The operator is realised in flux (finite-volume) form on the strip grid:
the normal direction uses face fluxes ``xN^2 * d(Lap u)/dxN`` at cell
midpoints, with the first cell's inner face placed at ``xN = 0`` where the
degenerate weight vanishes identically.  That zero boundary flux is what
closes the problem at the degenerate boundary without a second boundary
condition.  Periodicity in the tangential direction diagonalises the
operator over discrete Fourier modes, leaving one pentadiagonal system per
mode over the interior normal nodes ``1..J-1``.

The outer truncation boundary is clamped: the node value at ``Xmax`` and a
ghost value one spacing beyond are prescribed (zero or supplied data), which
pins value and slope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Literal

import numpy as np

from . import kernels
from .fields import FieldSnapshot
from .grid import StripGrid


@dataclass(frozen=True)
class OperatorParams:
    """Coefficient, grid and outer-boundary closure of the operator."""

    beta: float | Fraction
    grid: StripGrid
    outer_bc: Literal["clamped_zero", "clamped_manufactured"] = "clamped_zero"

    def __post_init__(self) -> None:
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.outer_bc not in ("clamped_zero", "clamped_manufactured"):
            raise ValueError(f"unknown outer boundary closure {self.outer_bc!r}")

    @property
    def beta_float(self) -> float:
        return float(self.beta)

    def beta_exact(self) -> Fraction:
        if not isinstance(self.beta, Fraction):
            raise TypeError("this operation requires an exact rational beta")
        return self.beta


def tangential_symbol(m: int, grid: StripGrid) -> float:
    """Eigenvalue of minus the periodic second difference: (4/hx^2) sin^2(pi m / Mx)."""
    if not 0 <= m < grid.Mx:
        raise ValueError(f"mode index {m} outside 0..{grid.Mx - 1}")
    return 4.0 / grid.hx**2 * math.sin(math.pi * m / grid.Mx) ** 2


def _extended_nodes(grid: StripGrid) -> np.ndarray:
    """Normal nodes plus one ghost node mirroring the last spacing."""
    xn = grid.xn
    return np.concatenate((xn, [2.0 * xn[-1] - xn[-2]]))


def _second_diff_coeffs(grid: StripGrid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nonuniform 3-point second-difference coefficients at nodes 1..J.

    Returned arrays have length J+1 and are indexed by node; index 0 is
    unused.  Node J reaches the ghost node.
    """
    x = _extended_nodes(grid)
    h = np.diff(x)
    J = grid.J
    cl = np.zeros(J + 1)
    cc = np.zeros(J + 1)
    cr = np.zeros(J + 1)
    hl, hr = h[:J], h[1 : J + 1]
    cl[1:] = 2.0 / (hl * (hl + hr))
    cc[1:] = -2.0 / (hl * hr)
    cr[1:] = 2.0 / (hr * (hl + hr))
    return cl, cc, cr


def _flux_geometry(grid: StripGrid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Face weights xi^2 (first face degenerate: exactly zero), face spacings,
    and control volumes for rows 1..J-1."""
    x = grid.xn
    J = grid.J
    fw = (0.5 * (x[:-1] + x[1:])) ** 2  # (J,) midpoint faces
    fw[0] = 0.0  # boundary face moved to xN = 0: weight vanishes identically
    h = np.diff(x)  # (J,)
    vol = np.zeros(J + 1)
    vol[2:J] = 0.5 * (x[3 : J + 1] - x[1 : J - 1])
    vol[1] = 0.5 * (x[1] + x[2])
    return fw, h, vol


@dataclass(frozen=True, eq=False)
class ModeOperator:
    """Pentadiagonal realisation of the operator for one tangential mode.

    ``bands`` is 5-row band storage over interior nodes ``1..J-1``;
    ``boundary_cols`` holds the columns multiplying the eliminated Dirichlet
    value, the outer clamp value and the ghost value.
    """

    m: int
    lam: float
    bands: np.ndarray  # (5, n)
    boundary_cols: np.ndarray  # (3, n)
    face_weights: np.ndarray  # (J,)
    beta: float

    @property
    def n(self) -> int:
        return self.bands.shape[1]

    def to_dense(self) -> np.ndarray:
        n = self.n
        dense = np.zeros((n, n))
        for d in range(-kernels.KL, kernels.KU + 1):
            for p in range(max(0, -d), n - max(0, d)):
                dense[p, p + d] = self.bands[kernels.KU - d, p + d]
        return dense

    def dump_dense(self, path: str | Path) -> Path:
        """Debug dump: dense matrix, row-major, space-separated."""
        path = Path(path)
        np.savetxt(path, self.to_dense(), fmt="%.17g", delimiter=" ")
        return path


@dataclass(frozen=True, eq=False)
class ModeOperatorSet:
    """Stacked mode operators for the real-FFT mode range 0..Mx/2."""

    params: OperatorParams
    lams: np.ndarray  # (Mm,)
    bands: np.ndarray  # (Mm, 5, n)
    boundary_cols: np.ndarray  # (Mm, 3, n)
    face_weights: np.ndarray  # (J,)

    @property
    def n(self) -> int:
        return self.bands.shape[2]

    @property
    def n_modes(self) -> int:
        return self.bands.shape[0]

    def mode(self, m: int) -> ModeOperator:
        return ModeOperator(
            m,
            float(self.lams[m]),
            self.bands[m],
            self.boundary_cols[m],
            self.face_weights,
            self.params.beta_float,
        )


def _assemble_bands(grid: StripGrid, beta: float, lam: float) -> tuple[np.ndarray, np.ndarray]:
    J = grid.J
    n = J - 1
    cl, cc, cr = _second_diff_coeffs(grid)
    fw, h, vol = _flux_geometry(grid)
    x = grid.xn

    rows = np.arange(1, J)  # output rows
    tm = fw[rows - 1] / (h[rows - 1] * vol[rows])
    tp = fw[rows] / (h[rows] * vol[rows])
    tc = -tm - tp - lam * x[rows] ** 2 - beta

    sl, sc, sr = cl, cc - lam, cr  # second-difference stage, node-indexed

    e = {d: np.zeros(n) for d in range(-2, 3)}
    e[-2] = tm * sl[rows - 1]
    e[-1] = tm * sc[rows - 1] + tc * sl[rows]
    e[0] = tm * sr[rows - 1] + tc * sc[rows] + tp * sl[rows + 1]
    e[1] = tc * sr[rows] + tp * sc[rows + 1]
    e[2] = tp * sr[rows + 1]

    bands = np.zeros((5, n))
    bcols = np.zeros((3, n))
    for d in range(-2, 3):
        cols = rows + d  # node index hit by this diagonal
        vals = e[d]
        interior = (cols >= 1) & (cols <= J - 1)
        p = rows[interior] - 1
        q = cols[interior] - 1
        bands[2 - d, q] = vals[interior]
        bcols[0, rows[cols == 0] - 1] += vals[cols == 0]
        bcols[1, rows[cols == J] - 1] += vals[cols == J]
        bcols[2, rows[cols == J + 1] - 1] += vals[cols == J + 1]
    return bands, bcols


def assemble_mode_operator(params: OperatorParams, m: int) -> ModeOperator:
    """Banded operator for tangential mode ``m`` with Dirichlet and clamp
    values eliminated into boundary columns."""
    lam = tangential_symbol(m, params.grid)
    bands, bcols = _assemble_bands(params.grid, params.beta_float, lam)
    fw, _, _ = _flux_geometry(params.grid)
    return ModeOperator(m, lam, bands, bcols, fw, params.beta_float)


def assemble_all(params: OperatorParams) -> ModeOperatorSet:
    grid = params.grid
    n_modes = grid.Mx // 2 + 1
    lams = np.array([tangential_symbol(m, grid) for m in range(n_modes)])
    n = grid.J - 1
    bands = np.empty((n_modes, 5, n))
    bcols = np.empty((n_modes, 3, n))
    for m in range(n_modes):
        bands[m], bcols[m] = _assemble_bands(grid, params.beta_float, lams[m])
    fw, _, _ = _flux_geometry(grid)
    return ModeOperatorSet(params, lams, bands, bcols, fw)


# ---------------------------------------------------------------------------
# application in physical space
# ---------------------------------------------------------------------------

def _boundary_rows(values: np.ndarray, ghost_row: np.ndarray | None, Mx: int) -> np.ndarray:
    ghost = np.zeros(Mx) if ghost_row is None else np.asarray(ghost_row, dtype=float)
    return np.stack((values[:, 0], values[:, -1], ghost))


def apply_operator_modes(
    opset: ModeOperatorSet, values: np.ndarray, ghost_row: np.ndarray | None = None
) -> np.ndarray:
    """Apply via forward tangential transform, banded multiply, inverse transform."""
    grid = opset.params.grid
    J = grid.J
    u_hat = np.fft.rfft(values, axis=0)
    bd_hat = np.fft.rfft(_boundary_rows(values, ghost_row, grid.Mx), axis=1)
    y = kernels.band_matvec(opset.bands, u_hat[:, 1:J])
    y = y + np.einsum("mcn,cm->mn", opset.boundary_cols, bd_hat)
    out = np.zeros_like(values)
    out[:, 1:J] = np.fft.irfft(y, n=grid.Mx, axis=0)
    return out


def apply_operator(
    params: OperatorParams, snapshot: FieldSnapshot, ghost_row: np.ndarray | None = None
) -> FieldSnapshot:
    """A u on the interior nodes; output boundary rows are zero."""
    opset = assemble_all(params)
    return FieldSnapshot(apply_operator_modes(opset, snapshot.values, ghost_row), snapshot.t)


def tangential_second_difference(values: np.ndarray, hx: float) -> np.ndarray:
    return (np.roll(values, -1, axis=0) - 2.0 * values + np.roll(values, 1, axis=0)) / hx**2


def discrete_laplacian(grid: StripGrid, values: np.ndarray, ghost_row: np.ndarray | None = None) -> np.ndarray:
    """Tangential + normal second differences at normal nodes 1..J (0 elsewhere)."""
    Mx, J = grid.Mx, grid.J
    cl, cc, cr = _second_diff_coeffs(grid)
    ghost = np.zeros(Mx) if ghost_row is None else np.asarray(ghost_row, dtype=float)
    u_ext = np.concatenate((values, ghost[:, None]), axis=1)
    w = np.zeros_like(values)
    w[:, 1:] = (
        cl[1:] * u_ext[:, :J]
        + cc[1:] * u_ext[:, 1 : J + 1]
        + cr[1:] * u_ext[:, 2 : J + 2]
    )
    w[:, 1:] += tangential_second_difference(values, grid.hx)[:, 1:]
    return w


def apply_operator_direct(
    params: OperatorParams, values: np.ndarray, ghost_row: np.ndarray | None = None
) -> np.ndarray:
    """Same operator applied as a real-space stencil (reference path)."""
    grid = params.grid
    J = grid.J
    beta = params.beta_float
    w = discrete_laplacian(grid, values, ghost_row)
    fw, h, vol = _flux_geometry(grid)
    rows = np.arange(1, J)
    flux = fw[None, :] * (w[:, 1:] - w[:, :-1]) / h[None, :]
    out = np.zeros_like(values)
    out[:, 1:J] = (flux[:, 1:J] - flux[:, 0 : J - 1]) / vol[rows]
    out[:, 1:J] += grid.xn[rows] ** 2 * tangential_second_difference(w, grid.hx)[:, 1:J]
    out[:, 1:J] -= beta * w[:, 1:J]
    return out


# ---------------------------------------------------------------------------
# structural identities (discrete integration by parts)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StructureCheck:
    """Residual of a discrete identity plus the scale it should be read against."""

    residual: float
    scale: float
    compact_support: bool


def _norm_weights(grid: StripGrid) -> np.ndarray:
    """Control-volume weights of the interior node inner product (J+1; rows 0, J zero)."""
    w = np.zeros(grid.J + 1)
    w[1:-1] = 0.5 * (grid.xn[2:] - grid.xn[:-2])
    return w


def _has_compact_support(values: np.ndarray, width: int = 3) -> bool:
    return bool(
        np.all(values[:, :width] == 0.0) and np.all(values[:, -width:] == 0.0)
    )


def sbp_residual(grid: StripGrid, face_values: np.ndarray, v: np.ndarray) -> StructureCheck:
    """| <D* F, v>_nodes + <F, D v>_faces | for the matched difference pair.

    ``face_values`` lives on the J normal faces, ``v`` on the nodes.  The sum
    telescopes to pure boundary terms, so it vanishes identically for ``v``
    supported away from the normal boundaries; otherwise the leaked boundary
    term is returned with the compact-support flag cleared.
    """
    J = grid.J
    if face_values.shape != (grid.Mx, J) or v.shape != (grid.Mx, J + 1):
        raise ValueError("face_values must be (Mx, J) and v must be (Mx, J+1)")
    hx = grid.hx
    div = face_values[:, 1:J] - face_values[:, 0 : J - 1]  # (D*F)_j * V_j
    node_part = hx * np.sum(div * v[:, 1:J])
    dv = v[:, 1:] - v[:, :-1]  # (Dv)_f * h_f
    face_part = hx * np.sum(face_values * dv)
    residual = abs(node_part + face_part)
    scale = hx * (np.sum(np.abs(div * v[:, 1:J])) + np.sum(np.abs(face_values * dv)))
    return StructureCheck(residual, float(scale) or 1.0, _has_compact_support(v))


def energy_identity_residual(params: OperatorParams, u: np.ndarray) -> StructureCheck:
    """Residual of the discrete energy identity for the weighted flux part.

    With ``w`` the discrete Laplacian of a compactly supported ``u`` and
    ``A1 u = div(xN^2 grad w)`` built from matched difference pairs,

        <A1 u, u>  =  int xN^2 w^2  +  int w * G(u),

    where ``G`` is the discrete remainder ``div(xN^2 grad u) - xN^2 Lap u``
    (the analogue of ``2 xN du/dxN``).  Both integration-by-parts steps are
    exact summations, so the residual is pure roundoff for admissible input.
    """
    grid = params.grid
    J, hx = grid.J, grid.hx
    x = grid.xn
    compact = _has_compact_support(u)
    w = discrete_laplacian(grid, u)
    w[:, J] = 0.0  # outer row irrelevant for compact u; keep it out of sums

    fw = (0.5 * (x[:-1] + x[1:])) ** 2  # plain midpoint faces on the whole line
    h = np.diff(x)
    vw = _norm_weights(grid)

    def flux_div(z: np.ndarray) -> np.ndarray:
        flux = fw[None, :] * (z[:, 1:] - z[:, :-1]) / h[None, :]
        out = np.zeros_like(z)
        out[:, 1:J] = (flux[:, 1:J] - flux[:, : J - 1]) / vw[1:J]
        out[:, 1:J] += x[1:J] ** 2 * tangential_second_difference(z, hx)[:, 1:J]
        return out

    a1u = flux_div(w)
    t1 = hx * np.sum(vw[None, :] * a1u * u)
    t2 = hx * np.sum(vw[None, :] * x[None, :] ** 2 * w * w)

    du = (u[:, 1:] - u[:, :-1]) / h[None, :]
    excess_r = fw - x[:-1] ** 2  # (xi_f^2 - x_j^2) seen from the left node
    excess_l = fw - x[1:] ** 2  # seen from the right node
    g = np.zeros_like(u)
    g[:, 1:J] = excess_r[None, 1:J] * du[:, 1:J] - excess_l[None, 0 : J - 1] * du[:, 0 : J - 1]
    t3 = hx * np.sum(w[:, 1:J] * g[:, 1:J])

    residual = abs(t1 - t2 - t3)
    scale = abs(t1) + abs(t2) + abs(t3)
    return StructureCheck(residual, float(scale) or 1.0, compact)
