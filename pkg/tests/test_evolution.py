"""Time integration, steady solves and manufactured forcing."""

import math
from fractions import Fraction as F

import numpy as np
import pytest

from degenlab import powerlog as pl
from degenlab.evolution import (
    ManufacturedSolution,
    SchemeConfig,
    SteadyProblem,
    evolve,
    manufactured_forcing,
    solve_steady,
    step,
)
from degenlab.fields import FieldSnapshot, load_series, save_series
from degenlab.grid import build_grid
from degenlab.operator import OperatorParams, apply_operator_modes, assemble_all

TWO_PI = 2.0 * math.pi


def make_grid(Mx=16, J=32, Xmax=1.0):
    return build_grid(TWO_PI, Mx, Xmax, J, 2.0, F(2))


def test_scheme_validation():
    with pytest.raises(ValueError):
        SchemeConfig(0.4, 1e-3, 1.0)
    with pytest.raises(ValueError):
        SchemeConfig(1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        SchemeConfig(1.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        SchemeConfig(1.0, 1e-3, 1.0, save_every=0)
    assert SchemeConfig(1.0, 0.1, 1.0, 5).n_steps == 10
    with pytest.raises(ValueError):
        SchemeConfig(1.0, 0.1, 1.0, 3).n_steps  # 10 steps not divisible by 3
    with pytest.raises(ValueError):
        SchemeConfig(1.0, 0.3, 1.0).n_steps  # T not a multiple of dt


def test_step_zero_fixed_point():
    grid = make_grid()
    params = OperatorParams(F(1), grid)
    scheme = SchemeConfig(1.0, 1e-2, 1.0)
    u0 = FieldSnapshot(np.zeros(grid.shape), 0.0)
    out = step(params, scheme, u0, None, None)
    assert np.all(out.values == 0.0)
    assert out.t == pytest.approx(1e-2)


def test_backward_euler_step_is_banded_solve():
    """One theta = 1 step solves (I + dt L) u = u_n + dt f per mode."""
    grid = make_grid(Mx=8, J=16)
    params = OperatorParams(F(1), grid)
    dt = 1e-3
    scheme = SchemeConfig(1.0, dt, 1.0)
    rng = np.random.default_rng(4)
    u_vals = rng.standard_normal(grid.shape)
    u_vals[:, 0] = 0.0
    u_vals[:, -1] = 0.0
    f_vals = rng.standard_normal(grid.shape)
    out = step(params, scheme, FieldSnapshot(u_vals, 0.0), f_vals, f_vals)

    opset = assemble_all(params)
    J = grid.J
    u_hat = np.fft.rfft(u_vals, axis=0)[:, 1:J]
    f_hat = np.fft.rfft(f_vals, axis=0)[:, 1:J]
    for m in range(opset.n_modes):
        dense = np.eye(J - 1) + dt * opset.mode(m).to_dense()
        expected = np.linalg.solve(dense, u_hat[m] + dt * f_hat[m])
        got = np.fft.rfft(out.values, axis=0)[m, 1:J]
        np.testing.assert_allclose(got, expected, rtol=1e-10, atol=1e-12)


def test_steady_fixed_point():
    grid = make_grid(J=48)
    params = OperatorParams(F(1), grid)
    forcing = np.ones(grid.shape)
    steady = solve_steady(SteadyProblem(params, forcing))
    scheme = SchemeConfig(1.0, 1e-2, 1.0)
    out = step(params, scheme, FieldSnapshot(steady.values, 0.0), forcing, forcing)
    tol = 1e-10 * max(1.0, float(np.max(np.abs(steady.values))))
    assert np.max(np.abs(out.values - steady.values)) <= 10 * tol


def test_zero_preservation_bitwise():
    grid = make_grid()
    params = OperatorParams(F(2), grid)
    series = evolve(params, SchemeConfig(1.0, 1e-2, 0.2, 4))
    assert series.data.shape[0] == 6
    assert np.all(series.data == 0.0)


def test_evolve_deterministic_bytes():
    grid = make_grid(Mx=16, J=24)
    params = OperatorParams(F(1), grid)

    def f(t):
        return np.outer(np.sin(grid.x1), grid.xn * (1.0 - grid.xn)) * math.cos(t)

    runs = []
    for _ in range(2):
        series = evolve(params, SchemeConfig(1.0, 5e-3, 0.1, 4), f=f)
        runs.append(series.data.tobytes())
    assert runs[0] == runs[1]


def test_mode_decoupling():
    grid = make_grid(Mx=32, J=24)
    params = OperatorParams(F(1), grid)
    mode = 3
    profile = grid.xn**2 * (1.0 - grid.xn) ** 2
    u0 = np.outer(np.cos(mode * grid.x1), profile)
    f = np.outer(np.cos(mode * grid.x1), profile)
    series = evolve(params, SchemeConfig(1.0, 1e-3, 0.05, 10), f=f, u0=u0)
    spec = np.abs(np.fft.rfft(series.data[-1], axis=0)) ** 2
    total = spec.sum()
    other = total - spec[mode].sum()
    assert other <= 1e-12 * total


def test_evolve_rejects_inconsistent_initial_trace():
    grid = make_grid()
    params = OperatorParams(F(1), grid)
    u0 = np.ones(grid.shape)  # nonzero trace at xN = 0 but g = 0
    with pytest.raises(ValueError, match="Dirichlet"):
        evolve(params, SchemeConfig(1.0, 1e-2, 0.1), u0=u0)


def test_evolve_nan_abort():
    grid = make_grid()
    params = OperatorParams(F(1), grid)
    f = np.full(grid.shape, np.nan)
    with pytest.raises(RuntimeError, match="NaN at t"):
        evolve(params, SchemeConfig(1.0, 1e-2, 0.1), f=f)


def test_solve_steady_exact_quadratic():
    grid = make_grid(J=48)
    params = OperatorParams(F(1), grid, "clamped_manufactured")
    exact = -0.5 * grid.xn**2
    xg = 2.0 * grid.xn[-1] - grid.xn[-2]
    prob = SteadyProblem(
        params,
        np.ones(grid.shape),
        dirichlet=0.0,
        clamp=float(exact[-1]),
        ghost=float(-0.5 * xg**2),
    )
    snap = solve_steady(prob)
    assert np.max(np.abs(snap.values - exact[None, :])) <= 1e-10


def test_solve_steady_zero_data():
    grid = make_grid()
    params = OperatorParams(F(3, 4), grid)
    snap = solve_steady(SteadyProblem(params, np.zeros(grid.shape)))
    assert np.all(snap.values == 0.0)


def test_solve_steady_recovers_surd_kernel_element():
    errs = []
    for J in (24, 48):
        grid = make_grid(Mx=8, J=J)
        params = OperatorParams(F(3, 4), grid, "clamped_manufactured")
        exact = grid.xn**2.5
        xg = 2.0 * grid.xn[-1] - grid.xn[-2]
        prob = SteadyProblem(
            params,
            np.zeros(grid.shape),
            dirichlet=0.0,
            clamp=float(exact[-1]),
            ghost=float(xg**2.5),
        )
        snap = solve_steady(prob)
        errs.append(float(np.max(np.abs(snap.values - exact[None, :]))))
    assert errs[0] / errs[1] >= 3.5  # second order


def test_steady_forcing_must_be_finite():
    grid = make_grid()
    params = OperatorParams(F(1), grid)
    bad = np.zeros(grid.shape)
    bad[3, 3] = np.inf
    with pytest.raises(ValueError, match="finite"):
        SteadyProblem(params, bad)


# ---------------------------------------------------------------------------
# manufactured solutions
# ---------------------------------------------------------------------------

def test_manufactured_forcing_quadratic_profile():
    grid = make_grid(Mx=8, J=16)
    params = OperatorParams(F(1), grid, "clamped_manufactured")
    ms = ManufacturedSolution((F(0), F(1)), "const", 0, pl.monomial(2))
    forcing = manufactured_forcing(ms, params)
    assert forcing.normal_operator_image == pl.monomial(0, coeff=-2)
    t = 0.7
    sample = forcing.sample(t)
    expected = np.broadcast_to(grid.xn**2 - 2.0 * t, sample.shape)
    np.testing.assert_allclose(sample[:, 1:], expected[:, 1:], rtol=1e-13)


def test_manufactured_forcing_kernel_profile_is_zero():
    grid = make_grid(Mx=8, J=16)
    for beta in (F(0), F(1), F(7, 2)):
        params = OperatorParams(beta, grid, "clamped_manufactured")
        ms = ManufacturedSolution((F(1),), "const", 0, pl.monomial(1))
        forcing = manufactured_forcing(ms, params)
        assert forcing.normal_operator_image.is_zero
        assert np.all(forcing.sample(0.3) == 0.0)


def test_manufactured_forcing_matches_discrete_operator():
    """Separable closed-form A u agrees with the assembled operator at
    second order under refinement."""
    ms = ManufacturedSolution((F(1),), "sin", 1, pl.monomial(3))
    errs = []
    for Mx, J in ((16, 24), (32, 48)):
        grid = make_grid(Mx=Mx, J=J)
        params = OperatorParams(F(0), grid, "clamped_manufactured")
        forcing = manufactured_forcing(ms, params)
        u = ms.u_values(grid, 0.0)
        xg = 2.0 * grid.xn[-1] - grid.xn[-2]
        ghost = ms.u_values(grid, 0.0, xn=np.array([xg]))[:, 0]
        opset = assemble_all(params)
        discrete = apply_operator_modes(opset, u, ghost)
        exact = forcing.sample(0.0)  # u_t = 0, so f = A u
        window = (grid.xn >= 0.1) & (grid.xn <= 0.9)
        errs.append(float(np.max(np.abs(discrete - exact)[:, window])))
    assert errs[0] / errs[1] >= 3.0


def test_manufactured_validation():
    with pytest.raises(ValueError, match="positive exponents"):
        ManufacturedSolution((F(1),), "const", 0, pl.monomial(0))
    with pytest.raises(ValueError, match="admissible"):
        ManufacturedSolution((F(1),), "const", 0, pl.monomial(1, logpow=1))
    with pytest.raises(ValueError, match="k"):
        ManufacturedSolution((F(1),), "cos", 0, pl.monomial(2))


def test_manufactured_mu_requires_exact_pi_multiple():
    grid = build_grid(6.0, 16, 1.0, 16, 2.0)  # Lx = 6, not a pi multiple
    ms = ManufacturedSolution((F(1),), "sin", 2, pl.monomial(2))
    with pytest.raises(ValueError, match="pi"):
        ms.mu(grid)
    grid_pi = make_grid()
    assert ms.mu(grid_pi) == F(4)  # (2 pi k / Lx)^2 = k^2 for Lx = 2 pi


def test_manufactured_convergence_order():
    ms = ManufacturedSolution((F(1),), "sin", 1, pl.monomial(3))
    errs = []
    for level, (Mx, J) in enumerate(((16, 32), (32, 64))):
        grid = make_grid(Mx=Mx, J=J)
        params = OperatorParams(F(0), grid, "clamped_manufactured")
        forcing = manufactured_forcing(ms, params)
        dt = 2e-3 / 4**level
        n = round(0.25 / dt)
        series = evolve(
            params,
            SchemeConfig(1.0, dt, 0.25, n),
            f=forcing.sample,
            u0=ms.u_values(grid, 0.0),
            clamps=ms.clamp_provider(grid),
        )
        errs.append(float(np.max(np.abs(series.data[-1] - ms.u_values(grid, 0.25)))))
    assert math.log2(errs[0] / errs[1]) >= 1.8


def test_longtime_relaxation_to_steady():
    """Constant forcing relaxes to the steady solution as t grows."""
    grid = make_grid(Mx=8, J=32)
    params = OperatorParams(F(1), grid)
    forcing = np.ones(grid.shape)
    steady = solve_steady(SteadyProblem(params, forcing))
    series = evolve(params, SchemeConfig(1.0, 5e-3, 6.0, 300), f=forcing)
    gap = np.max(np.abs(series.data[-1] - steady.values))
    assert gap <= 1e-6


def test_series_csv_round_trip(tmp_path):
    grid = make_grid(Mx=8, J=8)
    params = OperatorParams(F(1), grid)

    def f(t):
        return np.outer(np.sin(grid.x1), grid.xn) * (1.0 + t)

    series = evolve(params, SchemeConfig(1.0, 1e-2, 0.05, 1), f=f)
    save_series(series, tmp_path / "run")
    loaded = load_series(tmp_path / "run", grid)
    np.testing.assert_allclose(loaded.times, series.times, rtol=0, atol=0)
    np.testing.assert_allclose(loaded.data, series.data, rtol=0, atol=0)


def test_uniqueness_negative_control_perturbation_decays():
    """A 1e-15 seed at one node decays under the dissipative scheme."""
    grid = make_grid(Mx=16, J=32)
    params = OperatorParams(F(1), grid)
    u0 = np.zeros(grid.shape)
    u0[5, grid.J // 2] = 1e-15
    series = evolve(params, SchemeConfig(1.0, 1e-2, 0.5, 10), u0=u0)
    assert np.max(np.abs(series.data[0])) == 1e-15
    assert np.max(np.abs(series.data[-1])) < 1e-15


def test_manufactured_negative_control_wrong_forcing():
    """Deliberately wrong forcing destroys the convergence order."""
    ms = ManufacturedSolution((F(1),), "sin", 1, pl.monomial(3))
    errs = []
    for level, (Mx, J) in enumerate(((16, 32), (32, 64))):
        grid = make_grid(Mx=Mx, J=J)
        params = OperatorParams(F(0), grid, "clamped_manufactured")
        forcing = manufactured_forcing(ms, params)

        def wrong(t, forcing=forcing):
            return forcing.sample(t) + 0.01  # constant contamination

        dt = 2e-3 / 4**level
        series = evolve(
            params,
            SchemeConfig(1.0, dt, 0.25, round(0.25 / dt)),
            f=wrong,
            u0=ms.u_values(grid, 0.0),
            clamps=ms.clamp_provider(grid),
        )
        errs.append(float(np.max(np.abs(series.data[-1] - ms.u_values(grid, 0.25)))))
    order = math.log2(errs[0] / errs[1])
    assert order < 1.0  # stalls near zero instead of reaching second order


def test_solve_steady_nonzero_dirichlet_kernel_element():
    """u = 1 + x solves A u = 0 for every beta; recovering it exercises the
    eliminated Dirichlet column exactly."""
    grid = make_grid(Mx=8, J=32)
    exact = 1.0 + grid.xn
    xg = 2.0 * grid.xn[-1] - grid.xn[-2]
    for beta in (F(0), F(1), F(7, 2)):
        params = OperatorParams(beta, grid, "clamped_manufactured")
        prob = SteadyProblem(
            params,
            np.zeros(grid.shape),
            dirichlet=1.0,
            clamp=float(exact[-1]),
            ghost=float(1.0 + xg),
        )
        snap = solve_steady(prob)
        assert np.max(np.abs(snap.values - exact[None, :])) <= 1e-9


def test_evolve_reimposes_time_dependent_dirichlet_row():
    grid = make_grid(Mx=16, J=24)
    params = OperatorParams(F(1), grid)

    def g(t):
        return np.sin(grid.x1) * (1.0 + t)

    u0 = np.zeros(grid.shape)
    u0[:, 0] = g(0.0)
    series = evolve(params, SchemeConfig(1.0, 5e-3, 0.1, 5), g=g, u0=u0)
    for k, t in enumerate(series.times):
        np.testing.assert_array_equal(series.data[k][:, 0], g(float(t)))
    assert np.max(np.abs(series.data[-1][:, 1:])) > 0.0  # interior responds


def test_manufactured_forcing_requires_exact_beta():
    grid = make_grid(Mx=8, J=16)
    params = OperatorParams(1.0, grid, "clamped_manufactured")  # float beta
    ms = ManufacturedSolution((F(1),), "const", 0, pl.monomial(2))
    with pytest.raises(TypeError, match="exact rational"):
        manufactured_forcing(ms, params)
