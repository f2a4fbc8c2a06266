"""Implicit time integration and steady solves for the strip problem.

The theta-scheme (backward Euler by default) advances each tangential Fourier
mode independently:

    (I + theta dt L_m) u^{n+1} = (I - (1-theta) dt L_m) u^n
                                 + dt [theta F^{n+1} + (1-theta) F^n],

where ``F`` is the forcing with the eliminated Dirichlet/clamp columns folded
in.  Mode systems are pentadiagonal; the left-hand operator is factored once
per run and reused every step.

Manufactured solutions are separable products ``p(t) * T(x1) * V(xN)`` with a
polynomial time factor, a single tangential Fourier factor and an exact
power-log normal factor, so their forcing ``f = u_t + A u`` is available in
closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Literal

import numpy as np

from . import kernels, powerlog
from .fields import FieldSeries, FieldSnapshot
from .grid import StripGrid
from .operator import ModeOperatorSet, OperatorParams, assemble_all
from .powerlog import TermSum

BoundaryValues = Callable[[float], np.ndarray]
ClampValues = Callable[[float], tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class SchemeConfig:
    """Theta-scheme parameters; theta = 1 is backward Euler."""

    theta: float
    dt: float
    T: float
    save_every: int = 1

    def __post_init__(self) -> None:
        if not 0.5 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [1/2, 1]")
        if self.dt <= 0 or self.T <= 0 or self.dt > self.T:
            raise ValueError("need 0 < dt <= T")
        if self.save_every < 1:
            raise ValueError("save_every must be a positive integer")

    @property
    def n_steps(self) -> int:
        n = round(self.T / self.dt)
        if abs(n * self.dt - self.T) > 1e-9 * self.T or n < 1:
            raise ValueError("T must be an integer multiple of dt")
        if n % self.save_every != 0:
            raise ValueError("save_every must divide the number of steps")
        return n


def _as_row_provider(g, Mx: int) -> BoundaryValues:
    if g is None:
        zero = np.zeros(Mx)
        return lambda t: zero
    if np.isscalar(g):
        row = np.full(Mx, float(g))
        return lambda t: row
    if isinstance(g, np.ndarray):
        row = g.astype(float)
        return lambda t: row
    return g


def _as_field_provider(f, shape) -> Callable[[float], np.ndarray]:
    if f is None:
        zero = np.zeros(shape)
        return lambda t: zero
    if isinstance(f, np.ndarray):
        arr = f.astype(float)
        return lambda t: arr
    return f


def _as_clamp_provider(clamps, params: OperatorParams) -> ClampValues:
    Mx = params.grid.Mx
    if clamps is None:
        if params.outer_bc == "clamped_manufactured":
            raise ValueError("clamped_manufactured closure requires clamp values")
        zero = np.zeros(Mx)
        return lambda t: (zero, zero)
    if params.outer_bc == "clamped_zero":
        raise ValueError("clamped_zero closure does not accept clamp values")
    return clamps


class _StepSolver:
    """Factored per-mode systems for one (params, scheme) pair."""

    def __init__(self, params: OperatorParams, scheme: SchemeConfig):
        self.params = params
        self.scheme = scheme
        self.opset: ModeOperatorSet = assemble_all(params)
        th, dt = scheme.theta, scheme.dt
        lhs = th * dt * self.opset.bands
        rhs = -(1.0 - th) * dt * self.opset.bands
        lhs[:, kernels.KU, :] += 1.0
        rhs[:, kernels.KU, :] += 1.0
        self.rhs_bands = rhs
        try:
            self.fact = kernels.factor(lhs)
        except kernels.SingularBandError as err:
            raise RuntimeError(
                f"time-step system singular: tangential mode {err.system}, "
                f"pivot column {err.column}"
            ) from err

    def boundary_term(self, bd_hat: np.ndarray) -> np.ndarray:
        return np.einsum("mcn,cm->mn", self.opset.boundary_cols, bd_hat)

    def advance(
        self,
        u_hat: np.ndarray,
        forcing_n: np.ndarray,
        forcing_p: np.ndarray,
    ) -> np.ndarray:
        """One theta step in mode space; forcings already include boundary terms."""
        th, dt = self.scheme.theta, self.scheme.dt
        rhs = kernels.band_matvec(self.rhs_bands, u_hat)
        rhs += dt * (th * forcing_p + (1.0 - th) * forcing_n)
        stacked = np.stack((rhs.real, rhs.imag), axis=-1)
        out = kernels.solve(self.fact, stacked)
        return out[..., 0] + 1j * out[..., 1]


def _interior_hat(values: np.ndarray, J: int) -> np.ndarray:
    return np.fft.rfft(values, axis=0)[:, 1:J]


def _boundary_hat(g_row: np.ndarray, clamp_row: np.ndarray, ghost_row: np.ndarray) -> np.ndarray:
    return np.fft.rfft(np.stack((g_row, clamp_row, ghost_row)), axis=1)


def step(
    params: OperatorParams,
    scheme: SchemeConfig,
    u_n: FieldSnapshot,
    f_n: np.ndarray | None,
    f_np1: np.ndarray | None,
    g=None,
    clamps: ClampValues | None = None,
) -> FieldSnapshot:
    """Advance one time step from ``u_n``; boundary data re-imposed on output."""
    grid = params.grid
    J, Mx = grid.J, grid.Mx
    solver = _StepSolver(params, scheme)
    gfun = _as_row_provider(g, Mx)
    cfun = _as_clamp_provider(clamps, params)
    t_n = u_n.t
    t_p = t_n + scheme.dt

    zero_field = np.zeros((Mx, J + 1))
    fn = zero_field if f_n is None else f_n
    fp = zero_field if f_np1 is None else f_np1

    clamp_n, ghost_n = cfun(t_n)
    clamp_p, ghost_p = cfun(t_p)
    force_n = _interior_hat(fn, J) - solver.boundary_term(
        _boundary_hat(gfun(t_n), clamp_n, ghost_n)
    )
    force_p = _interior_hat(fp, J) - solver.boundary_term(
        _boundary_hat(gfun(t_p), clamp_p, ghost_p)
    )
    u_hat = solver.advance(_interior_hat(u_n.values, J), force_n, force_p)

    out = np.zeros((Mx, J + 1))
    out[:, 1:J] = np.fft.irfft(u_hat, n=Mx, axis=0)
    out[:, 0] = gfun(t_p)
    out[:, J] = clamp_p
    return FieldSnapshot(out, t_p)


def evolve(
    params: OperatorParams,
    scheme: SchemeConfig,
    f=None,
    g=None,
    u0: np.ndarray | None = None,
    clamps: ClampValues | None = None,
) -> FieldSeries:
    """Run the theta-scheme over [0, T] and collect snapshots at save times.

    Deterministic: identical inputs produce bit-identical series.  Aborts
    with the offending time if the state picks up NaNs.
    """
    grid = params.grid
    J, Mx = grid.J, grid.Mx
    n_steps = scheme.n_steps
    gfun = _as_row_provider(g, Mx)
    cfun = _as_clamp_provider(clamps, params)
    ffun = _as_field_provider(f, (Mx, J + 1))
    if u0 is None:
        u0 = np.zeros((Mx, J + 1))
    if u0.shape != (Mx, J + 1):
        raise ValueError("u0 shape does not match the grid")
    g0 = gfun(0.0)
    scale = max(1.0, float(np.max(np.abs(u0))))
    if not np.allclose(u0[:, 0], g0, atol=1e-12 * scale, rtol=0.0):
        raise ValueError("u0 does not satisfy the Dirichlet condition at t=0")

    solver = _StepSolver(params, scheme)

    n_saves = n_steps // scheme.save_every + 1
    times = np.empty(n_saves)
    data = np.empty((n_saves, Mx, J + 1))
    clamp0, _ = cfun(0.0)
    first = u0.copy()
    first[:, 0] = g0
    first[:, J] = clamp0
    times[0], data[0] = 0.0, first

    u_hat = _interior_hat(first, J)

    def forcing_at(t: float) -> np.ndarray:
        clamp_row, ghost_row = cfun(t)
        return _interior_hat(ffun(t), J) - solver.boundary_term(
            _boundary_hat(gfun(t), clamp_row, ghost_row)
        )

    force_n = forcing_at(0.0)
    for n in range(n_steps):
        t_p = (n + 1) * scheme.dt
        force_p = forcing_at(t_p)
        u_hat = solver.advance(u_hat, force_n, force_p)
        force_n = force_p
        if np.isnan(u_hat).any():
            raise RuntimeError(f"evolution produced NaN at t = {t_p:.6g}")
        if (n + 1) % scheme.save_every == 0:
            k = (n + 1) // scheme.save_every
            snap = np.zeros((Mx, J + 1))
            snap[:, 1:J] = np.fft.irfft(u_hat, n=Mx, axis=0)
            snap[:, 0] = gfun(t_p)
            snap[:, J] = cfun(t_p)[0]
            times[k], data[k] = t_p, snap
    return FieldSeries(grid, times, data)


# ---------------------------------------------------------------------------
# steady problems
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SteadyProblem:
    """``A u = f`` with Dirichlet value, outer clamp and ghost value."""

    params: OperatorParams
    forcing: np.ndarray  # (Mx, J+1); boundary rows ignored
    dirichlet: np.ndarray | float = 0.0
    clamp: np.ndarray | float = 0.0
    ghost: np.ndarray | float = 0.0

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.forcing)):
            raise ValueError("steady forcing must be finite at all nodes")


def solve_steady(problem: SteadyProblem) -> FieldSnapshot:
    """Direct per-mode banded solve of the steady problem."""
    params = problem.params
    grid = params.grid
    J, Mx = grid.J, grid.Mx
    opset = assemble_all(params)

    def row(v) -> np.ndarray:
        return np.full(Mx, float(v)) if np.isscalar(v) else np.asarray(v, dtype=float)

    g_row, clamp_row, ghost_row = row(problem.dirichlet), row(problem.clamp), row(problem.ghost)
    bd_hat = _boundary_hat(g_row, clamp_row, ghost_row)
    rhs = _interior_hat(problem.forcing, J) - np.einsum(
        "mcn,cm->mn", opset.boundary_cols, bd_hat
    )
    try:
        fact = kernels.factor(opset.bands.copy())
    except kernels.SingularBandError as err:
        raise RuntimeError(
            f"steady system singular: tangential mode {err.system}, "
            f"pivot column {err.column}"
        ) from err
    stacked = np.stack((rhs.real, rhs.imag), axis=-1)
    sol = kernels.solve(fact, stacked)
    u_hat = sol[..., 0] + 1j * sol[..., 1]
    out = np.zeros((Mx, J + 1))
    out[:, 1:J] = np.fft.irfft(u_hat, n=Mx, axis=0)
    out[:, 0] = g_row
    out[:, J] = clamp_row
    return FieldSnapshot(out, 0.0)


# ---------------------------------------------------------------------------
# manufactured solutions
# ---------------------------------------------------------------------------

def _poly_value(coeffs: tuple[Fraction, ...], t: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * t + float(c)
    return acc


def _poly_derivative(coeffs: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
    return tuple(k * c for k, c in enumerate(coeffs) if k > 0)


def _eval_at_nodes(v: TermSum, xn: np.ndarray) -> np.ndarray:
    """Evaluate on nodes; the xN = 0 entry is set to zero (used only where the
    sum has positive exponents or the value is never read)."""
    out = np.zeros(xn.size)
    for j, x in enumerate(xn):
        if x > 0:
            out[j] = powerlog.evaluate(v, float(x))
    return out


@dataclass(frozen=True)
class ManufacturedSolution:
    """Separable exact solution ``p(t) * T(x1) * V(xN)``.

    ``V`` must be admissible with strictly positive exponents, so the trace
    at ``xN = 0`` (the Dirichlet datum) is identically zero.
    """

    time_coeffs: tuple[Fraction, ...]
    tangential: Literal["const", "cos", "sin"]
    k: int
    normal: TermSum

    def __post_init__(self) -> None:
        if self.tangential not in ("const", "cos", "sin"):
            raise ValueError(f"unknown tangential factor {self.tangential!r}")
        if self.tangential == "const" and self.k != 0:
            raise ValueError("constant tangential factor requires k = 0")
        if self.tangential != "const" and self.k < 1:
            raise ValueError("oscillatory tangential factor requires k >= 1")
        for term in self.normal.terms:
            if term.exponent.sign() <= 0:
                raise ValueError("normal factor needs strictly positive exponents")
            if not powerlog.admissible(term):
                raise ValueError(f"normal factor term {term!r} is not admissible")

    def mu(self, grid: StripGrid) -> Fraction:
        """Exact tangential symbol (2 pi k / Lx)^2; zero for the constant factor."""
        if self.k == 0:
            return Fraction(0)
        if grid.lx_over_pi is None:
            raise ValueError(
                "oscillatory manufactured solutions need Lx as an exact multiple of pi"
            )
        return (Fraction(2 * self.k) / grid.lx_over_pi) ** 2

    def tangential_values(self, grid: StripGrid) -> np.ndarray:
        if self.tangential == "const":
            return np.ones(grid.Mx)
        phase = 2.0 * math.pi * self.k * grid.x1 / grid.Lx
        return np.cos(phase) if self.tangential == "cos" else np.sin(phase)

    def u_values(self, grid: StripGrid, t: float, xn: np.ndarray | None = None) -> np.ndarray:
        nodes = grid.xn if xn is None else xn
        profile = _eval_at_nodes(self.normal, nodes)
        return _poly_value(self.time_coeffs, t) * np.outer(self.tangential_values(grid), profile)

    def clamp_provider(self, grid: StripGrid) -> ClampValues:
        x_ghost = 2.0 * grid.xn[-1] - grid.xn[-2]
        v_end = powerlog.evaluate(self.normal, float(grid.xn[-1]))
        v_ghost = powerlog.evaluate(self.normal, float(x_ghost))
        tang = self.tangential_values(grid)

        def clamps(t: float) -> tuple[np.ndarray, np.ndarray]:
            p = _poly_value(self.time_coeffs, t)
            return p * v_end * tang, p * v_ghost * tang

        return clamps


@dataclass(frozen=True, eq=False)
class ManufacturedForcing:
    """Closed-form ``f = u_t + A u`` for a separable manufactured solution.

    ``normal_operator_image`` is the exact power-log sum
    ``(x^2 W')' - mu x^2 W - beta W`` with ``W = V'' - mu V``.
    """

    solution: ManufacturedSolution
    mu: Fraction
    beta: Fraction
    normal_operator_image: TermSum
    _tang: np.ndarray
    _v_nodes: np.ndarray
    _av_nodes: np.ndarray
    _dt_coeffs: tuple[Fraction, ...]

    def sample(self, t: float) -> np.ndarray:
        p = _poly_value(self.solution.time_coeffs, t)
        pdot = _poly_value(self._dt_coeffs, t)
        return np.outer(self._tang, pdot * self._v_nodes + p * self._av_nodes)


def manufactured_forcing(ms: ManufacturedSolution, params: OperatorParams) -> ManufacturedForcing:
    """Exact forcing; sampled values drive :func:`evolve`.

    Tangential derivatives act as multiplication by ``-mu`` on the separable
    factor; normal derivatives are exact power-log calculus.
    """
    grid = params.grid
    beta = params.beta_exact()
    mu = ms.mu(grid)
    v = ms.normal
    w = powerlog.differentiate(powerlog.differentiate(v)) - v.scale(mu)
    av = (
        powerlog.differentiate(powerlog.differentiate(w).shift(2))
        - w.shift(2).scale(mu)
        - w.scale(beta)
    )
    return ManufacturedForcing(
        solution=ms,
        mu=mu,
        beta=beta,
        normal_operator_image=av,
        _tang=ms.tangential_values(grid),
        _v_nodes=_eval_at_nodes(v, grid.xn),
        _av_nodes=_eval_at_nodes(av, grid.xn),
        _dt_coeffs=_poly_derivative(ms.time_coeffs),
    )
