"""Scenario orchestration: audits, convergence studies and estimate batteries.

Each runner consumes a :class:`~degenlab.config.RunConfig`, executes its
checks, and emits a JSON report (plus CSV tables) into the output directory.
A scenario passes only if every embedded assertion passes; informational
notes never flip the outcome.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import estimates, powerlog
from .config import RunConfig, serialize_config
from .evolution import (
    ManufacturedSolution,
    SchemeConfig,
    SteadyProblem,
    evolve,
    manufactured_forcing,
    solve_steady,
)
from .fields import FieldSeries, save_series
from .grid import StripGrid, build_grid
from .operator import OperatorParams
from .parallel import worker_count


@dataclass(frozen=True)
class ScenarioResult:
    """Outcome of one scenario run."""

    status: str  # "pass" or "fail"
    report_path: Path
    csv_paths: tuple[Path, ...]
    duration: float
    metrics: dict

    @property
    def passed(self) -> bool:
        return self.status == "pass"


def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else repr(value)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


class ScenarioReport:
    """Collects metrics and tables; writes report.json and CSV artifacts."""

    def __init__(self, scenario: str, cfg: RunConfig):
        self.scenario = scenario
        self.cfg = cfg
        self.metrics: dict[str, dict] = {}
        self.tables: dict[str, list[dict]] = {}
        self._t0 = time.perf_counter()

    def add(self, name, value=None, bound=None, passed=None, note=""):
        if passed is None:
            if bound is None:
                passed = value is not None
            else:
                passed = value is not None and value <= bound
        self.metrics[name] = {
            "value": None if value is None else float(value),
            "bound": None if bound is None else float(bound),
            "pass": bool(passed),
            "note": note,
        }

    def info(self, name, value=None, note=""):
        """Informational entry; never affects the exit status."""
        self.metrics[name] = {
            "value": None if value is None else float(value),
            "bound": None,
            "pass": True,
            "note": note or "informational",
        }

    def add_table(self, name: str, rows: list[dict]):
        self.tables[name] = rows

    @property
    def all_pass(self) -> bool:
        return all(m["pass"] for m in self.metrics.values())

    def failed_metrics(self) -> list[str]:
        return [k for k, m in self.metrics.items() if not m["pass"]]

    def finish(self, out_dir: str | Path, extra_payload: dict | None = None) -> ScenarioResult:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_paths = []
        for name, rows in self.tables.items():
            path = out / f"{name}.csv"
            with path.open("w", newline="") as fh:
                if rows:
                    names: list[str] = []
                    for row in rows:
                        names.extend(k for k in row if k not in names)
                    writer = csv.DictWriter(fh, fieldnames=names, restval="")
                    writer.writeheader()
                    for row in rows:
                        writer.writerow({k: _jsonify(v) for k, v in row.items()})
            csv_paths.append(path)
        payload = {
            "scenario": self.scenario,
            "config": {
                "raw": self.cfg.raw_text or serialize_config(self.cfg),
                "canonical": serialize_config(self.cfg),
            },
            "metrics": self.metrics,
            "artifacts": [p.name for p in csv_paths],
        }
        if extra_payload:
            payload.update(_jsonify(extra_payload))
        report_path = out / "report.json"
        report_path.write_text(
            json.dumps(_jsonify(payload), sort_keys=True, indent=2) + "\n",
            encoding="utf-8",
        )
        status = "pass" if self.all_pass else "fail"
        return ScenarioResult(
            status,
            report_path,
            tuple(csv_paths),
            time.perf_counter() - self._t0,
            self.metrics,
        )


# ---------------------------------------------------------------------------
# remark11
# ---------------------------------------------------------------------------

def run_remark11(cfg: RunConfig, out_dir: str | Path) -> ScenarioResult:
    """Closed-form audit: kernel exactness, admissibility, published exponents."""
    rep = ScenarioReport("remark11", cfg)
    audit = powerlog.remark11_report(cfg.beta, cfg.b)

    kernel_ok = all(
        powerlog.apply_lbeta(cfg.beta, v).is_zero for v in audit.kernel
    )
    rep.add("kernel_exact", value=0.0 if kernel_ok else 1.0, bound=0.0, passed=kernel_ok)

    roots_ok = all(
        powerlog.indicial_residual(cfg.beta, r).is_zero
        for r in audit.indicial.derived_roots
    )
    rep.add("roots_residual_zero", value=0.0 if roots_ok else 1.0, bound=0.0, passed=roots_ok)

    flags_ok = True
    for v, flag in zip(audit.kernel, audit.admissible_flags):
        term = v.terms[0]
        a = term.exponent
        if term.logpow == 0:
            expected = a >= 2 or a in (powerlog.SURD_ZERO, powerlog.SURD_ONE)
        else:
            expected = a > 2
        flags_ok &= flag == expected
    rep.add("admissibility_verdicts", value=0.0 if flags_ok else 1.0, bound=0.0, passed=flags_ok)

    if cfg.beta == 0:
        expected = {
            powerlog.monomial(0),
            powerlog.monomial(1),
            powerlog.monomial(2),
            powerlog.monomial(1, logpow=1),
        }
        match = set(audit.kernel) == expected
        rep.add("beta0_basis_match", value=0.0 if match else 1.0, bound=0.0, passed=match)
        inadmissible = [
            v for v, ok in zip(audit.kernel, audit.admissible_flags) if not ok
        ]
        unique_xlnx = inadmissible == [powerlog.monomial(1, logpow=1)]
        rep.add(
            "beta0_xlnx_excluded",
            value=0.0 if unique_xlnx else 1.0,
            bound=0.0,
            passed=unique_xlnx,
        )

    particular_image = powerlog.apply_lbeta(cfg.beta, audit.particular)
    expected_image = powerlog.monomial(0, coeff=cfg.b)
    rep.add(
        "particular_residual_exact",
        value=0.0 if particular_image == expected_image else 1.0,
        bound=0.0,
        passed=particular_image == expected_image,
    )

    n_nonzero = sum(1 for r in audit.indicial.published_residuals if not r.is_zero)
    rep.info(
        "published_exponent_discrepancies",
        value=float(n_nonzero),
        note="nonzero residuals of the published exponent pair; never a failure",
    )

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    audit_path = out / "remark11.json"
    audit_path.write_text(
        json.dumps(_jsonify(audit.to_json_dict()), sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    return rep.finish(out_dir, {"remark11": audit.to_json_dict()})


# ---------------------------------------------------------------------------
# manufactured convergence
# ---------------------------------------------------------------------------

def _manufactured_level(cfg: RunConfig, level: int) -> tuple[float, float]:
    """Run one refinement level; returns (max error at T, exact scale)."""
    factor = 2**level
    grid = build_grid(
        cfg.Lx, cfg.Mx * factor, cfg.Xmax, cfg.J * factor, cfg.gamma, cfg.lx_over_pi
    )
    dt = cfg.dt / factor**2
    n_steps = round(cfg.T / dt)
    scheme = SchemeConfig(cfg.theta, dt, cfg.T, save_every=n_steps)
    params = OperatorParams(cfg.beta, grid, "clamped_manufactured")
    ms = ManufacturedSolution(cfg.ms_time, cfg.ms_tangential, cfg.ms_k, cfg.ms_normal)
    forcing = manufactured_forcing(ms, params)
    series = evolve(
        params,
        scheme,
        f=forcing.sample,
        g=None,
        u0=ms.u_values(grid, 0.0),
        clamps=ms.clamp_provider(grid),
    )
    exact = ms.u_values(grid, cfg.T)
    err = float(np.max(np.abs(series.data[-1] - exact)))
    return err, float(np.max(np.abs(exact)))


def run_manufactured(cfg: RunConfig, out_dir: str | Path) -> ScenarioResult:
    """Three-level refinement study against the exact separable solution.

    Passes when the finest-pair observed order is at least 1.8, or when the
    finest errors sit at the machine floor (the scheme reproduces some
    separable solutions exactly, leaving nothing to converge)."""
    rep = ScenarioReport("manufactured", cfg)
    errors, scales = [], []
    rows = []
    for level in range(cfg.levels):
        err, scale = _manufactured_level(cfg, level)
        errors.append(err)
        scales.append(scale)
        rows.append(
            {
                "level": level,
                "J": cfg.J * 2**level,
                "Mx": cfg.Mx * 2**level,
                "dt": cfg.dt / 4**level,
                "max_error": err,
            }
        )
        rep.info(f"error_level_{level}", value=err)
    orders = []
    for a, b in zip(errors, errors[1:]):
        orders.append(math.log2(a / b) if (a > 0 and b > 0) else math.inf)
    for i, order in enumerate(orders):
        rows[i + 1]["observed_order"] = order
        rep.info(f"order_pair_{i}", value=None if math.isinf(order) else order)
    rep.add_table("manufactured_errors", rows)

    floor = 1e-10 * (1.0 + max(scales))
    machine_level = errors[-1] <= floor and errors[-2] <= floor
    finest_order = orders[-1] if orders else math.inf
    ok = machine_level or finest_order >= 1.8
    note = (
        "errors at machine floor; scheme reproduces this solution exactly"
        if machine_level
        else f"finest-pair observed order {finest_order:.3f}"
    )
    rep.add(
        "manufactured_convergence",
        value=0.0 if ok else 1.0,
        bound=0.0,
        passed=ok,
        note=note,
    )
    return rep.finish(out_dir)


# ---------------------------------------------------------------------------
# polynomial-in-time structure
# ---------------------------------------------------------------------------

def _fit_time_degree(times: np.ndarray, samples: np.ndarray, scale: float) -> int:
    """Largest significant polynomial degree of samples(t), up to cubic."""
    deg = min(3, times.size - 1)
    coeffs = np.polynomial.polynomial.polyfit(times, samples, deg)
    tmax = float(np.max(np.abs(times))) or 1.0
    significant = [
        d for d, c in enumerate(coeffs) if abs(c) * tmax**d > 1e-6 * max(scale, 1e-300)
    ]
    return max(significant, default=0)


def run_liouville_t(cfg: RunConfig, out_dir: str | Path) -> ScenarioResult:
    """Tangentially constant forcing ``f = c0 + c1 t``: the solution must stay
    on the degree-1 ansatz ``b + a t`` built from two steady solves."""
    rep = ScenarioReport("liouville-t", cfg)
    grid = cfg.grid()
    params = OperatorParams(cfg.beta, grid, "clamped_zero")
    shape = (grid.Mx, grid.J + 1)
    ones = np.ones(shape)

    a_snap = solve_steady(SteadyProblem(params, float(cfg.c1) * ones))
    b_snap = solve_steady(SteadyProblem(params, float(cfg.c0) * ones - a_snap.values))

    scheme = cfg.scheme()

    def forcing(t: float) -> np.ndarray:
        return (float(cfg.c0) + float(cfg.c1) * t) * ones

    series = evolve(params, scheme, f=forcing, u0=b_snap.values.copy())

    deviation = 0.0
    for k, t in enumerate(series.times):
        ansatz = b_snap.values + t * a_snap.values
        gap = float(np.max(np.abs(series.data[k] - ansatz)))
        deviation = max(deviation, gap / (1.0 + abs(t)))
    rep.add("ansatz_deviation", value=deviation, bound=cfg.liouville_tol)

    scale = float(np.max(np.abs(series.data)))
    probes = [
        (0, grid.J // 2),
        (grid.Mx // 3, max(1, grid.J // 3)),
        (grid.Mx // 2, min(grid.J - 1, 2 * grid.J // 3)),
    ]
    degrees = [
        _fit_time_degree(series.times, series.data[:, i, j], scale) for i, j in probes
    ]
    fitted = max(degrees, default=0)
    expected = 1 if cfg.c1 != 0 else 0
    undefined = scale == 0.0
    rep.add(
        "fitted_time_degree",
        value=float(fitted),
        passed=(fitted == expected) or undefined,
        note="solution identically zero: degree undefined" if undefined else f"expected {expected}",
    )
    return rep.finish(out_dir)


# ---------------------------------------------------------------------------
# uniqueness
# ---------------------------------------------------------------------------

def run_uniqueness(cfg: RunConfig, out_dir: str | Path) -> ScenarioResult:
    """All-zero data must produce exactly-zero snapshots (bitwise)."""
    rep = ScenarioReport("uniqueness", cfg)
    grid = cfg.grid()
    params = OperatorParams(cfg.beta, grid, "clamped_zero")
    series = evolve(params, cfg.scheme())
    max_abs = float(np.max(np.abs(series.data)))
    rep.add("zero_preserved_max_abs", value=max_abs, bound=0.0)
    return rep.finish(out_dir)


# ---------------------------------------------------------------------------
# estimates battery
# ---------------------------------------------------------------------------

def _bump(u: np.ndarray) -> np.ndarray:
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return out


def decaying_initial_bump(grid: StripGrid) -> np.ndarray:
    """Compactly supported product bump away from all boundaries."""
    x1 = _bump((grid.x1 - 0.5 * grid.Lx) / (0.3 * grid.Lx))
    xn = _bump((grid.xn - 0.45 * grid.Xmax) / (0.28 * grid.Xmax))
    return np.outer(x1, xn) / _bump(np.array([0.0]))[0] ** 2


def _hardy_battery(seed: int) -> list[tuple]:
    x = np.linspace(0.0, 1.0, 65)
    out = []
    linear = estimates.hardy_ratio(1.0 - x, x).require()
    out.append(("hardy_linear_ratio_error", abs(linear - 1.0), 0.01, None, "w = R - x"))
    parab = estimates.hardy_ratio(x * (1.0 - x), x).require()
    out.append(
        ("hardy_parabolic_ratio_error", abs(parab - 0.25), 0.0025, None, "w = x (R - x)")
    )
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        w = estimates.random_piecewise_cubic(rng, x)
        res = estimates.hardy_ratio(w, x)
        if res.defined:
            worst = max(worst, res.require())
    out.append(("hardy_random_max_ratio", worst, 4.04, None, "100 piecewise cubics"))
    zero = estimates.hardy_ratio(np.zeros_like(x), x)
    out.append(
        ("hardy_zero_undefined", 0.0 if not zero.defined else 1.0, 0.0, None, "w = 0 flagged")
    )
    return out


def _interpolation_battery(seed: int) -> list[tuple]:
    grid = build_grid(2.0 * math.pi, 64, 1.0, 64, 2.0)
    rng = np.random.default_rng(seed + 1)
    xn_win = _bump((grid.xn - 0.5) / 0.3)
    worst = 0.0
    for _ in range(20):
        modes = rng.integers(1, 6, size=2)
        amps = rng.uniform(-1.0, 1.0, size=2)
        tang = sum(
            a * np.cos(m * 2.0 * math.pi * grid.x1 / grid.Lx + rng.uniform(0, 2 * math.pi))
            for a, m in zip(amps, modes)
        )
        v = (1.0 + 0.5 * tang)[:, None] * xn_win[None, :]
        res = estimates.interpolation_check(v, grid)
        if res.defined:
            worst = max(worst, res.require())
    single = np.cos(3.0 * 2.0 * math.pi * grid.x1 / grid.Lx)[:, None] * xn_win[None, :]
    single_ratio = estimates.interpolation_check(single, grid).require()
    return [
        ("interpolation_random_max_ratio", worst, 1.05, None, "random compact fields"),
        ("interpolation_single_mode_ratio", single_ratio, 1.05, None, "single mode x bump"),
    ]


def _cutoff_battery() -> list[tuple]:
    out = []
    grid = build_grid(2.0 * math.pi, 64, 2.0, 64, 1.0)
    times = np.arange(0.0, 2.2 + 1e-12, 0.02)
    center = (math.pi, 0.0, 1.1)
    cut = estimates.build_cutoff(grid, times, R=0.5, q=2.0, center=center)
    k = int(np.argmin(np.abs(times - 1.1)))
    i = int(np.argmin(np.abs(grid.x1 - math.pi)))
    out.append(("cutoff_center_value_error", abs(cut.values[k, i, 0] - 1.0), 1e-12, None, ""))
    qR = 2.0 * 0.5
    d1 = np.abs((grid.x1 - center[0] + 0.5 * grid.Lx) % grid.Lx - 0.5 * grid.Lx)
    dn = np.abs(grid.xn - center[1])
    dt = np.abs(times - center[2])
    outside = (
        (dt >= qR**2)[:, None, None]
        | (d1 >= qR)[None, :, None]
        | (dn >= qR)[None, None, :]
    )
    out.append(("cutoff_outside_max", float(np.max(np.abs(cut.values[outside]))), 0.0, None, ""))
    worst = 0.0
    for order, measured in cut.measured_bounds.items():
        worst = max(worst, measured / cut.bound(order))
    out.append(("cutoff_bound_ratio_max", worst, 1.0, None, "measured / profile bound"))

    # scaling sweeps on nearly-1-D lattices
    for axis in ("x1", "t"):
        ratios = []
        for qm1 in (0.25, 0.5, 1.0):
            for R in (0.5, 1.0):
                q = 1.0 + qm1
                if axis == "x1":
                    g = build_grid(2.0 * math.pi, 1024, 2.5, 8, 1.0)
                    ts = np.linspace(0.0, 9.0, 9)
                    c = (math.pi, 0.0, 4.5)
                    cutf = estimates.build_cutoff(g, ts, R=R, q=q, center=c)
                    measured = cutf.measured_bounds[(1, 0, 0)]
                    ratios.append(measured * (qm1 * R) / estimates.SMOOTHSTEP_D1_MAX)
                else:
                    g = build_grid(2.0 * math.pi, 8, 2.5, 8, 1.0)
                    ts = np.arange(0.0, 9.0 + 1e-9, 1.0 / 512.0)
                    c = (math.pi, 0.0, 4.5)
                    cutf = estimates.build_cutoff(g, ts, R=R, q=q, center=c)
                    measured = cutf.measured_bounds[(0, 0, 1)]
                    ratios.append(measured * (qm1 * R) ** 2 / estimates.SMOOTHSTEP_D1_MAX)
        spread = max(ratios) / min(ratios) - 1.0
        out.append(
            (
                f"cutoff_scaling_spread_{axis}",
                spread,
                0.15,
                None,
                "relative spread of scaled first-derivative maxima",
            )
        )
    return out


def _mollifier_battery(cfg: RunConfig) -> list[tuple]:
    eps = cfg.mollifier_eps
    dx = dt = eps / 8.0
    kernel = estimates.build_mollifier(eps, dx, dt)
    out = []
    out.append(("mollifier_tap_mass_error", abs(float(kernel.taps.sum()) - 1.0), 1e-10, None, ""))

    nx, nt = 81, 81
    xs = (np.arange(nx) - nx // 2) * dx
    ts = (np.arange(nt) - nt // 2) * dt
    ones = np.ones((nx, nt))
    const = estimates.mollify(ones, kernel)
    out.append(("mollifier_constant_error", float(np.max(np.abs(const.values - 1.0))), 1e-10, None, ""))

    lin = np.broadcast_to(xs[:, None], (nx, nt)).copy()
    smooth = estimates.mollify(lin, kernel)
    xs_in = xs[smooth.margin_x : nx - smooth.margin_x]
    out.append(
        (
            "mollifier_odd_moment_error",
            float(np.max(np.abs(smooth.values - xs_in[:, None]))),
            1e-12,
            None,
            "x1 preserved by symmetry",
        )
    )

    quad = np.broadcast_to(xs[:, None] ** 2, (nx, nt)).copy()
    sq = estimates.mollify(quad, kernel)
    m2 = kernel.second_moment_x()
    out.append(
        (
            "mollifier_second_moment_error",
            float(np.max(np.abs(sq.values - xs_in[:, None] ** 2 - m2))),
            1e-12,
            None,
            "x1^2 shifts by the tap second moment",
        )
    )

    checks = [
        (np.broadcast_to((ts**2)[None, :], (nx, nt)), 2, "t^2"),
        (ones, 0, "constant"),
        (xs[:, None] ** 3 * ts[None, :], 4, "x1^3 t"),
        ((xs[:, None] + ts[None, :]) ** 6, 6, "(x1+t)^6"),
    ]
    for samples, expected, label in checks:
        fit = estimates.mollifier_degree_check(np.ascontiguousarray(samples), xs, ts, kernel)
        out.append(
            (
                f"mollifier_degree_{label.replace(' ', '_').replace('^', '')}",
                float(fit.degree),
                None,
                fit.degree == expected,
                f"fit degree for {label}",
            )
        )
        out.append(
            (
                f"mollifier_fit_residual_{label.replace(' ', '_').replace('^', '')}",
                fit.residual,
                1e-8 * fit.scale,
                None,
                "",
            )
        )

    db = estimates.mollifier_derivative_bound(ones, kernel, (1, 0), sup_u=1.0)
    out.append(("mollifier_constant_annihilation", db.measured, 1e-10, None, "d/dx1 of constant"))

    # growth-class bound: |u| <= R_probe**M on the probe lattice
    r_probe = max(float(xs[-1]), 1.0)
    sup_bound = r_probe ** float(cfg.growth_M)
    rng = np.random.default_rng(cfg.seed + 2)
    rough = rng.uniform(-1.0, 1.0, size=(nx, nt)) * sup_bound
    meas = {}
    for eps_k in (eps, eps / 2.0):
        k2 = estimates.build_mollifier(eps_k, eps_k / 8.0, eps_k / 8.0)
        d = estimates.mollifier_derivative_bound(rough, k2, (1, 0), sup_u=sup_bound)
        out.append(
            (f"mollifier_derivative_ratio_eps_{eps_k:g}", d.ratio, 1.0, None, "measured / bound")
        )
        meas[eps_k] = d.measured
    scaling = meas[eps / 2.0] / meas[eps] / 2.0
    out.append(
        (
            "mollifier_derivative_scaling_error",
            abs(scaling - 1.0),
            0.2,
            None,
            "halving eps doubles the first-derivative bound",
        )
    )
    return out


def _iteration_battery() -> list[tuple]:
    out = []
    r = np.linspace(1.0, 2.0, 41)
    const = estimates.IterationLemmaInput(r, np.ones_like(r), 0.5, 1.0, 1.0, 1.0)
    res = estimates.iteration_lemma_check(const)
    out.append(
        ("iteration_const_hypothesis", 0.0 if res.hypothesis_ok else 1.0, 0.0, None, "f = B")
    )
    out.append(("iteration_const_constant", res.min_constant, 1.0 + 1e-12, None, ""))

    delta, a = 0.25, 2.0
    f = (2.0 + delta - r) ** (-a)
    blow = estimates.IterationLemmaInput(r, f, 0.5, 1.0, 0.0, a)
    res = estimates.iteration_lemma_check(blow)
    ok = res.hypothesis_ok and math.isfinite(res.min_constant)
    out.append(
        ("iteration_blowup_family", 0.0 if ok else 1.0, 0.0, None, "f = A (r1 + d - t)^-a")
    )

    spike = np.ones_like(r)
    spike[r.size // 2] = 10.0
    bad = estimates.IterationLemmaInput(r, spike, 0.5, 0.0, 1.0, 1.0)
    res = estimates.iteration_lemma_check(bad)
    out.append(
        (
            "iteration_spike_detected",
            0.0 if not res.hypothesis_ok else 1.0,
            0.0,
            None,
            "interior spike must violate the hypothesis",
        )
    )

    vac = estimates.IterationLemmaInput(r, np.ones_like(r), 0.5, 0.0, 0.0, 1.0)
    res = estimates.iteration_lemma_check(vac)
    out.append(
        (
            "iteration_vacuous_flagged",
            0.0 if res.conclusion_vacuous else 1.0,
            0.0,
            None,
            "A = B = 0 with positive f",
        )
    )
    return out


def _decaying_run(cfg: RunConfig, factor: int) -> tuple[FieldSeries, OperatorParams]:
    grid = build_grid(
        cfg.Lx, cfg.Mx * factor, cfg.Xmax, cfg.J * factor, cfg.gamma, cfg.lx_over_pi
    )
    params = OperatorParams(cfg.beta, grid, "clamped_zero")
    scheme = SchemeConfig(cfg.theta, cfg.dt / factor, cfg.T, cfg.save_every)
    series = evolve(params, scheme, u0=decaying_initial_bump(grid))
    return series, params


def _caccioppoli_battery(cfg: RunConfig, rep: ScenarioReport, out_dir: Path) -> list[Path]:
    levels = {}
    for factor in (1, 2):
        series, params = _decaying_run(cfg, factor)
        rows = estimates.caccioppoli_report(
            series, params, cfg.centers, cfg.radii, cfg.q
        )
        levels[factor] = (series, params, rows)

    table = []
    coarse_rows = levels[1][2]
    fine_rows = levels[2][2]
    for idx, (row_c, row_f) in enumerate(zip(coarse_rows, fine_rows)):
        key = f"c{idx // max(len(cfg.radii), 1)}_R_{row_c.R:g}" if len(cfg.centers) > 1 else f"R_{row_c.R:g}"
        defined = row_c.defined and row_f.defined
        rep.add(f"caccioppoli_defined_{key}", value=1.0 if defined else 0.0, passed=defined)
        if defined:
            for label, vc, vf in (
                ("rho_grad", row_c.rho_grad, row_f.rho_grad),
                ("rho_time", row_c.rho_time, row_f.rho_time),
            ):
                rep.info(f"caccioppoli_{label}_{key}", value=vc)
                drift = abs(vf / vc - 1.0) if vc else math.inf
                rep.add(f"caccioppoli_{label}_stability_{key}", value=drift, bound=0.25)
        for level, row in (("coarse", row_c), ("fine", row_f)):
            table.append(
                {
                    "level": level,
                    "center_x1": row.center[0],
                    "center_xN": row.center[1],
                    "center_t": row.center[2],
                    "R": row.R,
                    "q": row.q,
                    "rho_grad": row.rho_grad,
                    "rho_time": row.rho_time,
                    "defined": row.defined,
                }
            )
    rep.add_table("caccioppoli", table)

    # cross-checks between the general derivative ratios and the base report
    series, params, rows = levels[1]
    center, R = cfg.centers[0], cfg.radii[0]
    base = rows[0]
    h00 = estimates.higher_derivative_ratios(series, params, 0, 0, R, cfg.q, center)
    rep.add("higher_ratio_identity", value=h00.require(), bound=1.0 + 1e-12)
    if base.defined:
        h10 = estimates.higher_derivative_ratios(series, params, 1, 0, R, cfg.q, center)
        rep.add(
            "higher_ratio_tangential_vs_gradient",
            value=h10.require(),
            bound=base.rho_grad * 1.05 + 1e-12,
            note="tangential part cannot exceed the full gradient ratio",
        )
        h01 = estimates.higher_derivative_ratios(series, params, 0, 1, R, cfg.q, center)
        rel = abs(h01.require() / base.rho_time - 1.0) if base.rho_time else math.inf
        rep.add("higher_ratio_time_matches_rho2", value=rel, bound=1e-9)

    # weighted-class sups over three refinements (non-exploding trend)
    sups = []
    wrows = []
    for factor in (1, 2):
        series_f = levels[factor][0]
        wrep = estimates.weighted_class_report(series_f, series_f.grid)
        sups.append((wrep.sup_x2_d4, wrep.sup_x_d3))
        for row in wrep.per_node:
            wrows.append({"refinement": factor, **row})
    half_mx = max(8, (cfg.Mx // 4) * 2)  # stay even and >= the grid minimum
    half_j = max(9, cfg.J // 2)  # keep 8 interior nodes for the weighted sups
    half_grid = build_grid(
        cfg.Lx, half_mx, cfg.Xmax, half_j, cfg.gamma, cfg.lx_over_pi
    )
    half_params = OperatorParams(cfg.beta, half_grid, "clamped_zero")
    half_series = evolve(
        half_params,
        SchemeConfig(cfg.theta, 2 * cfg.dt, cfg.T, cfg.save_every),
        u0=decaying_initial_bump(half_grid),
    )
    wrep0 = estimates.weighted_class_report(half_series, half_grid)
    sups.insert(0, (wrep0.sup_x2_d4, wrep0.sup_x_d3))
    for row in wrep0.per_node:
        wrows.append({"refinement": 0, **row})
    rep.add_table("weighted_class", wrows)
    for idx, label in ((0, "x2_d4"), (1, "x_d3")):
        values = [s[idx] for s in sups]
        rep.info(f"weighted_{label}_sups", value=values[-1], note=f"levels: {values}")
        # exploding diagnostics (inadmissible boundary behaviour) grow by ~4x
        # per refinement of the first-node position; bounded data stays flat
        # or converges, so a factor 1.5 separates the two cleanly
        rep.add(
            f"weighted_{label}_non_exploding",
            value=values[-1],
            bound=1.5 * values[-2] + 1e-8,
        )

    paths = save_series(levels[1][0], out_dir / "series_coarse")
    return paths


def run_estimates(cfg: RunConfig, out_dir: str | Path) -> ScenarioResult:
    """Full battery: structural inequalities plus the decaying-run ratios."""
    rep = ScenarioReport("estimates", cfg)
    out = Path(out_dir)
    batteries = {
        "hardy": lambda: _hardy_battery(cfg.seed),
        "interpolation": lambda: _interpolation_battery(cfg.seed),
        "cutoff": _cutoff_battery,
        "mollifier": lambda: _mollifier_battery(cfg),
        "iteration": _iteration_battery,
    }
    with ThreadPoolExecutor(max_workers=min(worker_count(), len(batteries))) as pool:
        futures = {name: pool.submit(fn) for name, fn in batteries.items()}
        results = {name: fut.result() for name, fut in futures.items()}
    for name in sorted(results):
        for entry in results[name]:
            metric, value, bound, passed, note = entry
            rep.add(metric, value=value, bound=bound, passed=passed, note=note)

    _caccioppoli_battery(cfg, rep, out)
    return rep.finish(out_dir)


SCENARIO_RUNNERS = {
    "remark11": run_remark11,
    "manufactured": run_manufactured,
    "liouville-t": run_liouville_t,
    "uniqueness": run_uniqueness,
    "estimates": run_estimates,
}
