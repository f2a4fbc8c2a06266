"""Numerical verification toolbox for the local integral inequalities.

Each check measures a ratio or constant on concrete grid data and reports it
against the bound the inequality asserts:

* weighted Hardy ratio with constant 4,
* gradient interpolation in the sharp integrated-by-parts form,
* cutoff functions with scaled derivative bounds,
* smoothing kernels (unit mass, degree preservation, derivative bounds),
* the two-parameter iteration lemma for radius absorption,
* weighted sups of high normal derivatives near the degenerate boundary,
* Caccioppoli-type ratios of local space-time integrals on nested
  parabolic cylinders.

Everything is a pure function over immutable inputs; reports aggregate named
metrics, per-cylinder tables and provenance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fields import FieldSeries
from .grid import ParabolicCylinder, StripGrid, cylinder_mask, integrate_cylinder
from .operator import OperatorParams, discrete_laplacian

# maxima of the quintic smoothstep 6 s^5 - 15 s^4 + 10 s^3 on [0, 1]
SMOOTHSTEP_D1_MAX = 1.875
SMOOTHSTEP_D2_MAX = 10.0 / math.sqrt(3.0)


@dataclass(frozen=True)
class RatioResult:
    """A measured ratio with an optional undefined flag (zero denominator)."""

    value: float | None
    defined: bool

    def require(self) -> float:
        if not self.defined or self.value is None:
            raise ValueError("ratio is undefined")
        return self.value


# ---------------------------------------------------------------------------
# Hardy ratio
# ---------------------------------------------------------------------------

def hardy_ratio(w: np.ndarray, x: np.ndarray) -> RatioResult:
    """``int w^2 / int x^2 (w')^2`` on nodes ``0 = x_0 < ... < x_n = R``.

    Requires ``w(R) = 0`` (up to 1e-12 of the max); the weighted inequality
    asserts the ratio is at most 4.
    """
    w = np.asarray(w, dtype=float)
    x = np.asarray(x, dtype=float)
    if w.shape != x.shape or w.ndim != 1:
        raise ValueError("w and x must be matching 1-D arrays")
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    if scale and abs(w[-1]) > 1e-12 * scale:
        raise ValueError("w must vanish at the right endpoint x = R")
    h = np.diff(x)
    num = float(np.trapezoid(w * w, x))
    xi = 0.5 * (x[:-1] + x[1:])
    slopes = np.diff(w) / h
    den = float(np.sum(xi * xi * slopes * slopes * h))
    if den <= 0.0:
        return RatioResult(None, False)
    return RatioResult(num / den, True)


def random_piecewise_cubic(rng: np.random.Generator, x: np.ndarray, n_knots: int = 6) -> np.ndarray:
    """Random C^1 piecewise-cubic profile on [0, x[-1]] vanishing at the right end."""
    R = float(x[-1])
    knots = np.linspace(0.0, R, n_knots)
    vals = rng.uniform(-1.0, 1.0, n_knots)
    slopes = rng.uniform(-2.0, 2.0, n_knots) / max(R, 1e-30)
    vals[-1] = 0.0
    seg = np.clip(np.searchsorted(knots, x, side="right") - 1, 0, n_knots - 2)
    h = knots[seg + 1] - knots[seg]
    s = (x - knots[seg]) / h
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return (
        h00 * vals[seg]
        + h10 * h * slopes[seg]
        + h01 * vals[seg + 1]
        + h11 * h * slopes[seg + 1]
    )


# ---------------------------------------------------------------------------
# gradient interpolation
# ---------------------------------------------------------------------------

def interpolation_check(v: np.ndarray, grid: StripGrid) -> RatioResult:
    """``int |grad v|^2 / sqrt(int (Lap v)^2 * int v^2)`` for compact ``v``.

    With matched difference pairs the numerator equals ``-<Lap v, v>``
    exactly, so the ratio obeys the Cauchy-Schwarz bound 1.
    """
    if v.shape != (grid.Mx, grid.J + 1):
        raise ValueError("v does not match the grid")
    hx = grid.hx
    J = grid.J
    vw = np.zeros(grid.J + 1)
    vw[1:-1] = 0.5 * (grid.xn[2:] - grid.xn[:-2])

    if not np.any(v):
        return RatioResult(None, False)

    dtan = (np.roll(v, -1, axis=0) - v) / hx
    num = float(np.sum(dtan * dtan * hx * vw[None, :]))
    h = np.diff(grid.xn)
    dn = (v[:, 1:] - v[:, :-1]) / h[None, :]
    num += float(np.sum(dn * dn * h[None, :] * hx))

    w = discrete_laplacian(grid, v)
    w[:, J] = 0.0
    d1 = float(np.sum(w * w * hx * vw[None, :]))
    d2 = float(np.sum(v * v * hx * vw[None, :]))
    den = math.sqrt(d1 * d2)
    if den <= 0.0:
        return RatioResult(None, False)
    return RatioResult(num / den, True)


# ---------------------------------------------------------------------------
# cutoff functions
# ---------------------------------------------------------------------------

def _smoothstep(s: np.ndarray) -> np.ndarray:
    s = np.clip(s, 0.0, 1.0)
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s))


def _axis_profile(dist: np.ndarray, inner: float, width: float) -> np.ndarray:
    return _smoothstep((inner + width - dist) / width)


#: profile-dependent constants of the measured bounds, keyed by
#: (tangential order, normal order, time order)
CUTOFF_PROFILE_CONSTANTS: dict[tuple[int, int, int], float] = {
    (1, 0, 0): SMOOTHSTEP_D1_MAX,
    (0, 1, 0): SMOOTHSTEP_D1_MAX,
    (0, 0, 1): SMOOTHSTEP_D1_MAX,
    (2, 0, 0): SMOOTHSTEP_D2_MAX,
    (0, 2, 0): SMOOTHSTEP_D2_MAX,
    (1, 1, 0): SMOOTHSTEP_D1_MAX**2,
}


@dataclass(frozen=True, eq=False)
class CutoffFunction:
    """Sampled cutoff: 1 on Q_R, 0 outside Q_qR, with measured derivative maxima.

    Transitions run over width ``(q-1) R`` in each space axis and
    ``((q-1) R)^2`` in time (which stays inside the ``(qR)^2`` window because
    ``1 + (q-1)^2 <= q^2``), so every measured maximum obeys
    ``C_profile / ((q-1) R)**(|alpha| + 2 beta)`` with the constants above.
    """

    values: np.ndarray  # (K, Mx, J+1)
    times: np.ndarray
    R: float
    q: float
    center: tuple[float, float, float]
    measured_bounds: dict[tuple[int, int, int], float]

    def bound(self, order: tuple[int, int, int]) -> float:
        a1, an, at = order
        exponent = a1 + an + 2 * at
        return CUTOFF_PROFILE_CONSTANTS[order] / ((self.q - 1.0) * self.R) ** exponent


def _diff_axis_first(values: np.ndarray, coords: np.ndarray, axis: int, periodic: bool, period: float = 0.0) -> np.ndarray:
    if periodic:
        h = coords[1] - coords[0]
        return (np.roll(values, -1, axis=axis) - np.roll(values, 1, axis=axis)) / (2.0 * h)
    return np.gradient(values, coords, axis=axis, edge_order=2)


def _diff_axis_second(values: np.ndarray, coords: np.ndarray, axis: int, periodic: bool) -> np.ndarray:
    if periodic:
        h = coords[1] - coords[0]
        return (
            np.roll(values, -1, axis=axis) - 2.0 * values + np.roll(values, 1, axis=axis)
        ) / h**2
    out = np.zeros_like(values)
    v = np.moveaxis(values, axis, 0)
    o = np.moveaxis(out, axis, 0)
    hl = np.diff(coords)[:-1]
    hr = np.diff(coords)[1:]
    shape = (-1,) + (1,) * (values.ndim - 1)
    hl, hr = hl.reshape(shape), hr.reshape(shape)
    o[1:-1] = 2.0 * (hl * v[2:] - (hl + hr) * v[1:-1] + hr * v[:-2]) / (hl * hr * (hl + hr))
    return out


def build_cutoff(
    grid: StripGrid,
    times: np.ndarray,
    R: float,
    q: float,
    center: tuple[float, float, float],
) -> CutoffFunction:
    """Smooth-step cutoff for the cylinder pair (Q_R, Q_qR) around ``center``."""
    if not 1.0 < q < 3.0:
        raise ValueError("q must lie in (1, 3)")
    times = np.asarray(times, dtype=float)
    x1c, xnc, tc = center
    outer = ParabolicCylinder(x1c, xnc, tc, q * R)
    if cylinder_mask(grid, outer, times).clipped:
        raise ValueError("cutoff cylinder Q_qR is clipped by the box or time window")

    width = (q - 1.0) * R
    d1 = np.abs((grid.x1 - x1c + 0.5 * grid.Lx) % grid.Lx - 0.5 * grid.Lx)
    dn = np.abs(grid.xn - xnc)
    dt = np.abs(times - tc)
    phi1 = _axis_profile(d1, R, width)
    phin = _axis_profile(dn, R, width)
    phit = _axis_profile(dt, R * R, width * width)
    eta = phit[:, None, None] * phi1[None, :, None] * phin[None, None, :]

    measured: dict[tuple[int, int, int], float] = {}
    for order in CUTOFF_PROFILE_CONSTANTS:
        a1, an, at = order
        arr = eta
        for _ in range(at):
            arr = _diff_axis_first(arr, times, axis=0, periodic=False)
        if a1 == 1:
            arr = _diff_axis_first(arr, grid.x1, axis=1, periodic=True)
        elif a1 == 2:
            arr = _diff_axis_second(arr, grid.x1, axis=1, periodic=True)
        if an == 1:
            arr = _diff_axis_first(arr, grid.xn, axis=2, periodic=False)
        elif an == 2:
            arr = _diff_axis_second(arr, grid.xn, axis=2, periodic=False)
        measured[order] = float(np.max(np.abs(arr)))
    return CutoffFunction(eta, times, float(R), float(q), center, measured)


# ---------------------------------------------------------------------------
# mollifier
# ---------------------------------------------------------------------------

def _bump(u: np.ndarray) -> np.ndarray:
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return out


def _bump_d1(u: np.ndarray) -> np.ndarray:
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    ui = u[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ui**2)) * (-2.0 * ui / (1.0 - ui**2) ** 2)
    return out


def _bump_d2(u: np.ndarray) -> np.ndarray:
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    ui = u[inside]
    one = 1.0 - ui**2
    out[inside] = np.exp(-1.0 / one) * (4.0 * ui**2 - (2.0 + 6.0 * ui**2) * one) / one**4
    return out


_BUMP_DERIVS = (_bump, _bump_d1, _bump_d2)


def _profile(y: np.ndarray, t: np.ndarray, dy: int = 0, dt: int = 0) -> np.ndarray:
    """Unnormalised smooth profile B(y+t) B(y-t) (support: |y|+|t| < 1) and its
    derivatives up to total order 2 via the rotated product rule."""
    if dy + dt > 2:
        raise ValueError("profile derivatives implemented up to total order 2")
    p, m = y + t, y - t
    if (dy, dt) == (0, 0):
        return _bump(p) * _bump(m)
    if (dy, dt) == (1, 0):
        return _bump_d1(p) * _bump(m) + _bump(p) * _bump_d1(m)
    if (dy, dt) == (0, 1):
        return _bump_d1(p) * _bump(m) - _bump(p) * _bump_d1(m)
    if (dy, dt) == (2, 0):
        return _bump_d2(p) * _bump(m) + 2.0 * _bump_d1(p) * _bump_d1(m) + _bump(p) * _bump_d2(m)
    if (dy, dt) == (0, 2):
        return _bump_d2(p) * _bump(m) - 2.0 * _bump_d1(p) * _bump_d1(m) + _bump(p) * _bump_d2(m)
    return _bump_d2(p) * _bump(m) - _bump(p) * _bump_d2(m)  # (1, 1)


_PROFILE_QUAD_N = 801


def _profile_norm() -> float:
    s = np.linspace(-1.0, 1.0, _PROFILE_QUAD_N)
    h = s[1] - s[0]
    yy, tt = np.meshgrid(s, s, indexing="ij")
    return float(np.sum(_profile(yy, tt)) * h * h)


def _profile_l1(dy: int, dt: int) -> float:
    s = np.linspace(-1.0, 1.0, _PROFILE_QUAD_N)
    h = s[1] - s[0]
    yy, tt = np.meshgrid(s, s, indexing="ij")
    return float(np.sum(np.abs(_profile(yy, tt, dy, dt))) * h * h) / _profile_norm()


def _profile_moment(power_y: int) -> float:
    s = np.linspace(-1.0, 1.0, _PROFILE_QUAD_N)
    h = s[1] - s[0]
    yy, tt = np.meshgrid(s, s, indexing="ij")
    return float(np.sum(yy**power_y * _profile(yy, tt)) * h * h) / _profile_norm()


@dataclass(frozen=True, eq=False)
class MollifierKernel:
    """Discrete smoothing kernel on a (tangential, time) lattice.

    The profile is a smooth bump supported exactly on the diamond
    ``|y| + |t| < 1``, scaled to size ``eps`` and normalised so the tap
    weights sum to one exactly.
    """

    eps: float
    dx: float
    dt: float
    offsets_x: np.ndarray
    offsets_t: np.ndarray
    taps: np.ndarray  # (len(offsets_x), len(offsets_t)), sums to 1
    raw_mass: float  # quadrature mass before exact renormalisation

    @property
    def half_width(self) -> tuple[int, int]:
        return (int(self.offsets_x[-1]), int(self.offsets_t[-1]))

    def second_moment_x(self) -> float:
        """Exact second tangential moment of the tap weights."""
        phys = self.offsets_x * self.dx
        return float(np.einsum("i,ij->", phys**2, self.taps))

    def derivative_taps(self, dy: int, dt: int) -> np.ndarray:
        """Tap weights of the differentiated kernel, demeaned so constants
        are annihilated exactly (for dy + dt >= 1)."""
        y = self.offsets_x * self.dx / self.eps
        t = self.offsets_t * self.dt / self.eps
        yy, tt = np.meshgrid(y, t, indexing="ij")
        scale = self.eps ** (-2 - dy - dt) / _profile_norm()
        taps = _profile(yy, tt, dy, dt) * scale * self.dx * self.dt
        if dy + dt >= 1:
            taps = taps - taps.mean()
        return taps


def build_mollifier(eps: float, dx: float, dt: float) -> MollifierKernel:
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    if dx > eps / 8 or dt > eps / 8:
        raise ValueError("lattice spacing must be at most eps/8")
    nx = int(math.floor(eps / dx))
    nt = int(math.floor(eps / dt))
    ox = np.arange(-nx, nx + 1)
    ot = np.arange(-nt, nt + 1)
    yy, tt = np.meshgrid(ox * dx / eps, ot * dt / eps, indexing="ij")
    raw = _profile(yy, tt) / (_profile_norm() * eps**2) * dx * dt
    mass = float(raw.sum())
    if mass <= 0:
        raise ValueError("kernel mass vanished; lattice too coarse")
    return MollifierKernel(float(eps), float(dx), float(dt), ox, ot, raw / mass, mass)


@dataclass(frozen=True, eq=False)
class MollifiedField:
    """Result of a valid-mode lattice convolution (margins trimmed)."""

    values: np.ndarray
    margin_x: int
    margin_t: int


def _convolve_valid(h: np.ndarray, offsets_x, offsets_t, taps: np.ndarray) -> np.ndarray:
    hw_x, hw_t = int(offsets_x[-1]), int(offsets_t[-1])
    nx, nt = h.shape
    if nx < 2 * hw_x + 1 or nt < 2 * hw_t + 1:
        raise ValueError("field too small for the kernel support")
    out = np.zeros((nx - 2 * hw_x, nt - 2 * hw_t))
    for a, ox in enumerate(offsets_x):
        for b, ot in enumerate(offsets_t):
            w = taps[a, b]
            if w != 0.0:
                out += w * h[
                    hw_x - ox : nx - hw_x - ox, hw_t - ot : nt - hw_t - ot
                ]
    return out


def mollify(h: np.ndarray, kernel: MollifierKernel) -> MollifiedField:
    """Discrete convolution with the scaled kernel; linear, preserves
    constants exactly, trims the lattice margins where the support leaks."""
    hw_x, hw_t = kernel.half_width
    values = _convolve_valid(np.asarray(h, dtype=float), kernel.offsets_x, kernel.offsets_t, kernel.taps)
    return MollifiedField(values, hw_x, hw_t)


@dataclass(frozen=True)
class DegreeFit:
    degree: int
    residual: float
    scale: float


def mollifier_degree_check(
    p_samples: np.ndarray,
    x_coords: np.ndarray,
    t_coords: np.ndarray,
    kernel: MollifierKernel,
    max_degree: int = 6,
) -> DegreeFit:
    """Mollify polynomial samples and fit a total-degree-``max_degree``
    polynomial; returns the fitted degree and the fit residual."""
    smoothed = mollify(p_samples, kernel)
    xs = x_coords[smoothed.margin_x : len(x_coords) - smoothed.margin_x]
    ts = t_coords[smoothed.margin_t : len(t_coords) - smoothed.margin_t]

    def normalise(c: np.ndarray) -> np.ndarray:
        mid, half = 0.5 * (c[0] + c[-1]), 0.5 * (c[-1] - c[0])
        return (c - mid) / (half if half else 1.0)

    X = normalise(xs)
    T = normalise(ts)
    XX, TT = np.meshgrid(X, T, indexing="ij")
    cols, degs = [], []
    for total in range(max_degree + 1):
        for a in range(total + 1):
            b = total - a
            cols.append((XX**a * TT**b).ravel())
            degs.append(total)
    basis = np.stack(cols, axis=1)
    rhs = smoothed.values.ravel()
    coeffs, _, _, _ = np.linalg.lstsq(basis, rhs, rcond=None)
    scale = float(np.max(np.abs(rhs))) or 1.0
    residual = float(np.sqrt(np.mean((basis @ coeffs - rhs) ** 2)))
    significant = np.abs(coeffs) > 1e-9 * scale
    degree = int(max((d for d, s in zip(degs, significant) if s), default=0))
    return DegreeFit(degree, residual, scale)


@dataclass(frozen=True)
class DerivativeBound:
    measured: float
    bound: float
    ratio: float


def mollifier_derivative_bound(
    u: np.ndarray,
    kernel: MollifierKernel,
    orders: tuple[int, int],
    sup_u: float,
) -> DerivativeBound:
    """Max of the (dx, dt)-derivative of the mollification of ``u``.

    The derivative is the convolution with the differentiated kernel, so it
    is bounded by ``L1(profile derivative) * eps**-(dx+dt) * sup|u|``.
    """
    dy, dt = orders
    taps = kernel.derivative_taps(dy, dt)
    out = _convolve_valid(np.asarray(u, dtype=float), kernel.offsets_x, kernel.offsets_t, taps)
    measured = float(np.max(np.abs(out))) if out.size else 0.0
    bound = 1.05 * _profile_l1(dy, dt) * kernel.eps ** (-(dy + dt)) * sup_u
    return DerivativeBound(measured, bound, measured / bound if bound else math.inf)


# ---------------------------------------------------------------------------
# iteration lemma
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class IterationLemmaInput:
    """Samples of a nonnegative bounded function with the lemma constants."""

    r: np.ndarray
    f: np.ndarray
    theta: float
    A: float
    B: float
    a: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta < 1.0:
            raise ValueError("theta must lie in [0, 1)")
        if self.A < 0 or self.B < 0 or self.a < 0:
            raise ValueError("A, B, a must be nonnegative")
        if np.any(self.f < 0) or not np.all(np.isfinite(self.f)):
            raise ValueError("f must be nonnegative and bounded")
        if self.r.size != self.f.size or np.any(np.diff(self.r) <= 0):
            raise ValueError("r must be strictly increasing and match f")


@dataclass(frozen=True)
class IterationLemmaResult:
    hypothesis_ok: bool
    min_constant: float
    conclusion_vacuous: bool


def iteration_lemma_check(inp: IterationLemmaInput) -> IterationLemmaResult:
    """Check ``f(t) <= theta f(s) + A (s-t)^-a + B`` on all sampled pairs and
    measure the smallest constant C with ``f(t) <= C [A (s-t)^-a + B]``."""
    r, f = inp.r, inp.f
    upper = np.triu(np.ones((r.size, r.size), dtype=bool), k=1)
    gap = np.where(upper, r[None, :] - r[:, None], np.inf)
    envelope = inp.A * gap ** (-inp.a) + inp.B
    slack = 1e-12 * (1.0 + float(f.max()))
    hypothesis = inp.theta * f[None, :] + envelope + slack
    hyp = bool(np.all((f[:, None] <= hypothesis) | ~upper))
    f_pairs = np.broadcast_to(f[:, None], envelope.shape)[upper]
    env_pairs = envelope[upper]
    if np.any(env_pairs <= 0.0):
        if float(f.max()) > 0:
            return IterationLemmaResult(hyp, math.inf, True)
        return IterationLemmaResult(hyp, 0.0, False)
    min_constant = float(np.max(f_pairs / env_pairs)) if f_pairs.size else 0.0
    return IterationLemmaResult(hyp, min_constant, False)


# ---------------------------------------------------------------------------
# weighted boundary class
# ---------------------------------------------------------------------------

def _derivative_weights(z: np.ndarray, order: int) -> np.ndarray:
    """Weights w with sum w_k u(z_k) ~ u^(order)(0) from a degree-(len(z)-1) fit."""
    scale = float(np.max(np.abs(z)))
    zs = z / scale
    m = np.vander(zs, increasing=True).T  # m[p, k] = zs_k ** p
    rhs = np.zeros(z.size)
    rhs[order] = math.factorial(order)
    return np.linalg.solve(m, rhs) / scale**order


@dataclass(frozen=True, eq=False)
class WeightedClassReport:
    """Weighted sups of third/fourth normal derivatives near the boundary."""

    sup_x2_d4: float
    sup_x_d3: float
    per_node: list[dict]


def weighted_class_report(series: FieldSeries, grid: StripGrid, n_nodes: int = 8) -> WeightedClassReport:
    """Measure ``sup xN^2 |D^4 u|`` and ``sup xN |D^3 u|`` on the first
    ``n_nodes`` interior nodes over all snapshots."""
    if grid.gamma < 2:
        raise ValueError("weighted-class report needs a graded mesh (gamma >= 2)")
    if grid.J - 1 < n_nodes:
        raise ValueError(f"fewer than {n_nodes} interior nodes")
    xn = grid.xn
    rows: list[dict] = []
    sup4 = sup3 = 0.0
    for j in range(1, n_nodes + 1):
        lo = min(max(j - 2, 0), grid.J - 4)
        z = xn[lo : lo + 5] - xn[j]
        w3 = _derivative_weights(z, 3)
        w4 = _derivative_weights(z, 4)
        stencil = series.data[:, :, lo : lo + 5]
        d3 = np.einsum("kis,s->ki", stencil, w3)
        d4 = np.einsum("kis,s->ki", stencil, w4)
        m3 = float(np.max(np.abs(d3)))
        m4 = float(np.max(np.abs(d4)))
        rows.append(
            {
                "node": j,
                "xN": float(xn[j]),
                "x_d3": xn[j] * m3,
                "x2_d4": xn[j] ** 2 * m4,
            }
        )
        sup3 = max(sup3, xn[j] * m3)
        sup4 = max(sup4, xn[j] ** 2 * m4)
    return WeightedClassReport(sup4, sup3, rows)


# ---------------------------------------------------------------------------
# Caccioppoli ratios on nested cylinders
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CylinderRatios:
    center: tuple[float, float, float]
    R: float
    q: float
    rho_grad: float | None
    rho_time: float | None
    defined: bool


def _gradient_squared(series: FieldSeries) -> np.ndarray:
    grid = series.grid
    d_tan = (
        np.roll(series.data, -1, axis=1) - np.roll(series.data, 1, axis=1)
    ) / (2.0 * grid.hx)
    d_nor = np.gradient(series.data, grid.xn, axis=2, edge_order=2)
    return d_tan**2 + d_nor**2


def caccioppoli_report(
    series: FieldSeries,
    params: OperatorParams,
    centers: Sequence[tuple[float, float, float]],
    radii: Sequence[float],
    q: float,
) -> list[CylinderRatios]:
    """Measured constants of the local energy estimates

        R^2 int_{Q_R} |grad u|^2 / int_{Q_qR} u^2   and
        R^4 int_{Q_R} u_t^2     / int_{Q_qR} u^2

    for a decaying homogeneous run (f = 0, g = 0)."""
    grid = series.grid
    grad2 = _gradient_squared(series)
    ut2 = series.time_derivative() ** 2
    u2 = series.data**2
    rows: list[CylinderRatios] = []
    for center in centers:
        for R in radii:
            inner = ParabolicCylinder(*center, R)
            outer = ParabolicCylinder(*center, q * R)
            if cylinder_mask(grid, outer, series.times).clipped:
                raise ValueError(
                    f"cylinder Q_qR at center {center}, R = {R} is clipped"
                )
            den = integrate_cylinder(u2, outer, grid, series.times)
            if den < 1e-30:
                rows.append(CylinderRatios(center, R, q, None, None, False))
                continue
            num_g = integrate_cylinder(grad2, inner, grid, series.times)
            num_t = integrate_cylinder(ut2, inner, grid, series.times)
            rows.append(
                CylinderRatios(
                    center,
                    R,
                    q,
                    R**2 * num_g / den,
                    R**4 * num_t / den,
                    True,
                )
            )
    return rows


def higher_derivative_ratios(
    series: FieldSeries,
    params: OperatorParams,
    alpha: int,
    beta_t: int,
    R: float,
    q: float,
    center: tuple[float, float, float],
) -> RatioResult:
    """``R^(2 alpha + 4 beta) int_{Q_R} |D_x1^alpha D_t^beta u|^2 /
    int_{Q_(q^(alpha+beta) R)} u^2`` with spectral tangential derivatives."""
    grid = series.grid
    data = series.data
    if alpha:
        u_hat = np.fft.rfft(data, axis=1)
        wave = 2.0 * math.pi * np.fft.rfftfreq(grid.Mx, d=grid.hx)
        u_hat *= (1j * wave[None, :, None]) ** alpha
        data = np.fft.irfft(u_hat, n=grid.Mx, axis=1)
    for _ in range(beta_t):
        data = np.gradient(data, series.times, axis=0, edge_order=2)
    inner = ParabolicCylinder(*center, R)
    outer = ParabolicCylinder(*center, q ** (alpha + beta_t) * R)
    if cylinder_mask(grid, outer, series.times).clipped:
        raise ValueError(f"outer cylinder q^{alpha + beta_t} R = {outer.R} is clipped")
    den = integrate_cylinder(series.data**2, outer, grid, series.times)
    if den < 1e-30:
        return RatioResult(None, False)
    num = integrate_cylinder(data**2, inner, grid, series.times)
    return RatioResult(R ** (2 * alpha + 4 * beta_t) * num / den, True)


# ---------------------------------------------------------------------------
# aggregated report
# ---------------------------------------------------------------------------

@dataclass
class MetricEntry:
    value: float | None
    bound: float | None
    passed: bool
    note: str = ""


@dataclass(eq=False)
class EstimateReport:
    """Named metrics with bounds and pass flags, plus per-cylinder tables."""

    provenance: dict
    metrics: dict[str, MetricEntry] = field(default_factory=dict)
    tables: dict[str, list[dict]] = field(default_factory=dict)

    def add(
        self,
        name: str,
        value: float | None,
        bound: float | None = None,
        passed: bool | None = None,
        note: str = "",
    ) -> None:
        if passed is None:
            if bound is None:
                passed = value is not None
            else:
                passed = value is not None and value <= bound
        if passed and bound is not None and value is not None and value > bound:
            raise ValueError(f"metric {name}: pass flag contradicts bound")
        self.metrics[name] = MetricEntry(value, bound, passed, note)

    def add_table(self, name: str, rows: list[dict]) -> None:
        self.tables[name] = rows

    @property
    def all_pass(self) -> bool:
        return all(m.passed for m in self.metrics.values())

    def to_json_dict(self) -> dict:
        return {
            "provenance": self.provenance,
            "metrics": {
                k: {
                    "value": m.value,
                    "bound": m.bound,
                    "pass": m.passed,
                    "note": m.note,
                }
                for k, m in self.metrics.items()
            },
            "tables": self.tables,
        }
