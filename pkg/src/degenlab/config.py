"""Run configuration: ``key = value`` files with exact rationals.

Lines are ``key = value`` with ``#`` comments; unknown and duplicate keys are
rejected with line numbers.  Rational-valued keys (beta, b, time-polynomial
coefficients) are parsed exactly; lengths may be given as multiples of pi
(``Lx = 2pi``), which also records the exact multiple for separable
manufactured solutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import powerlog
from .evolution import SchemeConfig
from .grid import ParabolicCylinder, build_grid, cylinder_mask
from .powerlog import TermSum

SCENARIOS = ("remark11", "manufactured", "liouville-t", "uniqueness", "estimates")


class ConfigError(ValueError):
    """Configuration problem, annotated with the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


def _parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as err:
        raise ValueError(f"malformed rational {text!r}") from err


def _parse_pi_value(text: str) -> tuple[float, Fraction | None]:
    """A float, optionally an exact multiple of pi ('2pi', 'pi', '3/2pi')."""
    s = text.strip().lower().replace(" ", "")
    if s.endswith("pi"):
        head = s[:-2].rstrip("*")
        mult = Fraction(1) if head == "" else _parse_rational(head)
        return float(mult) * math.pi, mult
    try:
        return float(Fraction(s)), None
    except (ValueError, ZeroDivisionError) as err:
        raise ValueError(f"malformed number {text!r}") from err


def _parse_float(text: str) -> float:
    return _parse_pi_value(text)[0]


def parse_term_sum(text: str) -> TermSum:
    """Parse ``;``-separated power-log terms like ``-1/2*x^5/2*ln^1``."""
    total = powerlog.ZERO
    for raw in text.split(";"):
        raw = raw.strip()
        if not raw:
            continue
        coeff = Fraction(1)
        exponent = Fraction(0)
        logpow = 0
        for token in raw.split("*"):
            token = token.strip()
            if token == "x":
                exponent = Fraction(1)
            elif token.startswith("x^"):
                exponent = _parse_rational(token[2:])
            elif token == "ln":
                logpow = 1
            elif token.startswith("ln^"):
                logpow = int(token[3:])
            else:
                coeff *= _parse_rational(token)
        total = total + powerlog.monomial(exponent, coeff=coeff, logpow=logpow)
    return total


def _format_term_sum(v: TermSum) -> str:
    parts = []
    for t in v.terms:
        bits = [str(t.coeff.as_fraction()), f"x^{t.exponent.as_fraction()}"]
        if t.logpow:
            bits.append(f"ln^{t.logpow}")
        parts.append("*".join(bits))
    return "; ".join(parts) if parts else "0*x^1"


@dataclass(frozen=True)
class RunConfig:
    """Validated scenario configuration."""

    scenario: str
    beta: Fraction
    b: Fraction = Fraction(0)
    Lx: float = 2.0 * math.pi
    lx_over_pi: Fraction | None = Fraction(2)
    Mx: int = 16
    Xmax: float = 1.0
    J: int = 32
    gamma: float = 2.0
    theta: float = 1.0
    dt: float = 1e-3
    T: float = 1.0
    save_every: int = 1
    ms_time: tuple[Fraction, ...] = (Fraction(0), Fraction(1))
    ms_tangential: str = "const"
    ms_k: int = 0
    ms_normal: TermSum = field(default_factory=lambda: powerlog.monomial(2))
    levels: int = 3
    c0: Fraction = Fraction(0)
    c1: Fraction = Fraction(0)
    growth_M: float = 1.0
    radii: tuple[float, ...] = ()
    q: float = 2.0
    centers: tuple[tuple[float, float, float], ...] = ()
    mollifier_eps: float = 0.25
    liouville_tol: float = 1e-4
    seed: int = 1234
    out_dir: str = "out"
    raw_text: str = field(default="", compare=False, repr=False)

    def grid(self):
        return build_grid(self.Lx, self.Mx, self.Xmax, self.J, self.gamma, self.lx_over_pi)

    def scheme(self) -> SchemeConfig:
        return SchemeConfig(self.theta, self.dt, self.T, self.save_every)


_KEY_ORDER = (
    "scenario",
    "beta",
    "b",
    "Lx",
    "Mx",
    "Xmax",
    "J",
    "gamma",
    "theta",
    "dt",
    "T",
    "save_every",
    "ms_time",
    "ms_tangential",
    "ms_normal",
    "levels",
    "c0",
    "c1",
    "growth_M",
    "radii",
    "q",
    "centers",
    "mollifier_eps",
    "liouville_tol",
    "seed",
    "out_dir",
)


def _split_lines(text: str) -> dict[str, tuple[str, int]]:
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = body.split("=", 1)
        key, value = key.strip(), value.strip()
        if key in entries:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        if key not in _KEY_ORDER:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if not value:
            raise ConfigError(f"empty value for key {key!r}", lineno)
        entries[key] = (value, lineno)
    return entries


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration; raises ConfigError with line numbers."""
    entries = _split_lines(text)
    key_lines = {k: ln for k, (_, ln) in entries.items()}
    values: dict[str, object] = {"raw_text": text}

    def take(key: str):
        return entries.pop(key, (None, None))

    def convert(key: str, fn, default=None):
        raw, line = take(key)
        if raw is None:
            return default, None
        try:
            return fn(raw), line
        except ValueError as err:
            raise ConfigError(str(err), line) from None

    scenario, line = convert("scenario", str)
    if scenario is None:
        raise ConfigError("missing mandatory key 'scenario'")
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}", line)
    values["scenario"] = scenario

    beta, line = convert("beta", _parse_rational)
    if beta is None:
        raise ConfigError("missing mandatory key 'beta'")
    if beta < 0:
        raise ConfigError("beta must be >= 0", line)
    values["beta"] = beta

    b, _ = convert("b", _parse_rational, Fraction(0))
    values["b"] = b

    raw, line = take("Lx")
    if raw is not None:
        try:
            lx, lx_over_pi = _parse_pi_value(raw)
        except ValueError as err:
            raise ConfigError(str(err), line) from None
        values["Lx"], values["lx_over_pi"] = lx, lx_over_pi

    for key, fn in (
        ("Mx", int),
        ("Xmax", _parse_float),
        ("J", int),
        ("gamma", _parse_float),
        ("theta", _parse_float),
        ("dt", _parse_float),
        ("T", _parse_float),
        ("save_every", int),
        ("levels", int),
        ("growth_M", _parse_float),
        ("q", _parse_float),
        ("mollifier_eps", _parse_float),
        ("liouville_tol", _parse_float),
        ("seed", int),
        ("out_dir", str),
    ):
        val, _ = convert(key, fn)
        if val is not None:
            values[key] = val

    val, _ = convert(
        "ms_time", lambda s: tuple(_parse_rational(c) for c in s.split(","))
    )
    if val is not None:
        values["ms_time"] = val

    raw, line = take("ms_tangential")
    if raw is not None:
        kind, _, knum = raw.partition(":")
        kind = kind.strip()
        if kind not in ("const", "cos", "sin"):
            raise ConfigError(f"unknown tangential factor {raw!r}", line)
        values["ms_tangential"] = kind
        values["ms_k"] = int(knum) if knum else (0 if kind == "const" else 1)

    val, _ = convert("ms_normal", parse_term_sum)
    if val is not None:
        values["ms_normal"] = val

    for key in ("c0", "c1"):
        val, _ = convert(key, _parse_rational)
        if val is not None:
            values[key] = val

    val, _ = convert(
        "radii", lambda s: tuple(float(_parse_float(c)) for c in s.split(","))
    )
    if val is not None:
        values["radii"] = val

    raw, centers_line = take("centers")
    if raw is not None:
        try:
            centers = []
            for triple in raw.split(";"):
                parts = [p for p in triple.split(",") if p.strip()]
                if len(parts) != 3:
                    raise ValueError(f"center {triple.strip()!r} needs three components")
                centers.append(tuple(_parse_float(p) for p in parts))
            values["centers"] = tuple(centers)
        except ValueError as err:
            raise ConfigError(str(err), centers_line) from None

    if entries:  # pragma: no cover - defended by the known-key check
        key, (_, line) = next(iter(entries.items()))
        raise ConfigError(f"unhandled key {key!r}", line)

    cfg = RunConfig(**values)
    _validate(cfg, key_lines)
    return cfg


def _validate(cfg: RunConfig, key_lines: dict[str, int]) -> None:
    if cfg.scenario == "manufactured":
        for key in ("ms_time", "ms_normal"):
            if key not in key_lines:
                raise ConfigError(f"missing mandatory key {key!r} for manufactured runs")
    if cfg.scenario == "estimates":
        for key in ("radii", "centers"):
            if key not in key_lines:
                raise ConfigError(f"missing mandatory key {key!r} for estimate runs")
        grid = cfg.grid()
        scheme = cfg.scheme()
        n_saves = scheme.n_steps // cfg.save_every + 1
        times = np.arange(n_saves) * (cfg.save_every * cfg.dt)
        for center in cfg.centers:
            for R in cfg.radii:
                outer = ParabolicCylinder(*center, cfg.q * R)
                if cylinder_mask(grid, outer, times).clipped:
                    raise ConfigError(
                        f"cylinder at center {center} with qR = {cfg.q * R:g} is "
                        "clipped by the box or time window",
                        key_lines.get("radii"),
                    )


def serialize_config(cfg: RunConfig) -> str:
    """Canonical text form; parse_config(serialize_config(cfg)) == cfg."""
    lines = []
    for key in _KEY_ORDER:
        if key == "scenario":
            lines.append(f"scenario = {cfg.scenario}")
        elif key in ("beta", "b", "c0", "c1"):
            lines.append(f"{key} = {getattr(cfg, key)}")
        elif key == "Lx":
            if cfg.lx_over_pi is not None:
                lines.append(f"Lx = {cfg.lx_over_pi}pi")
            else:
                lines.append(f"Lx = {cfg.Lx!r}")
        elif key == "ms_time":
            lines.append("ms_time = " + ",".join(str(c) for c in cfg.ms_time))
        elif key == "ms_tangential":
            if cfg.ms_tangential == "const":
                lines.append("ms_tangential = const")
            else:
                lines.append(f"ms_tangential = {cfg.ms_tangential}:{cfg.ms_k}")
        elif key == "ms_normal":
            lines.append("ms_normal = " + _format_term_sum(cfg.ms_normal))
        elif key == "radii":
            if cfg.radii:
                lines.append("radii = " + ",".join(repr(r) for r in cfg.radii))
        elif key == "centers":
            if cfg.centers:
                lines.append(
                    "centers = "
                    + "; ".join(",".join(repr(v) for v in c) for c in cfg.centers)
                )
        elif key in ("Mx", "J", "save_every", "levels", "seed"):
            lines.append(f"{key} = {getattr(cfg, key)}")
        elif key == "out_dir":
            lines.append(f"out_dir = {cfg.out_dir}")
        else:
            lines.append(f"{key} = {getattr(cfg, key)!r}")
    return "\n".join(lines) + "\n"


def load_config(path: str | Path) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))
