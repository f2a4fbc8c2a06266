"""Exact calculus on finite sums of power-log functions of one variable.

A term is ``c * x**a * ln(x)**k`` for ``x > 0``, where the coefficient ``c``
and the exponent ``a`` are quadratic surds ``p + q*sqrt(r)`` with rational
``p, q`` and a square-free integer radicand ``r``, and ``k`` is a nonnegative
integer.  Sums of such terms are closed under differentiation and under the
degenerate third-order flux operator

    L_beta v = d/dx ( x**2 * v''' - beta * v' ),

which lets kernel membership, particular solutions and boundary-weight
admissibility be decided exactly instead of through floating-point residuals.

All values are immutable; every operation is a pure function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Iterable, Union

#: Exact rational scalar type used throughout (always lowest terms).
RationalNumber = Fraction

RationalLike = Union[int, str, Fraction]


def _as_fraction(value: RationalLike) -> Fraction:
    if isinstance(value, float):
        raise TypeError("exact context requires int/str/Fraction, got float")
    return Fraction(value)


def _square_free(n: int) -> tuple[int, int]:
    """Split ``n >= 0`` as ``s*s * m`` with ``m`` square-free; returns (s, m)."""
    if n < 0:
        raise ValueError("radicand must be nonnegative")
    if n in (0, 1):
        return (1, n)
    s, m, p = 1, n, 2
    while p * p <= m:
        while m % (p * p) == 0:
            m //= p * p
            s *= p
        p += 1 if p == 2 else 2
    return (s, m)


def _sqrt_bounds(m: int, digits: int) -> tuple[Fraction, Fraction]:
    """Rational enclosure of sqrt(m) with width 10**-digits."""
    scale = 10**digits
    lo = isqrt(m * scale * scale)
    return Fraction(lo, scale), Fraction(lo + 1, scale)


def _interval_scale(coeff: Fraction, lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    return (coeff * lo, coeff * hi) if coeff >= 0 else (coeff * hi, coeff * lo)


def _sign_two_radicals(a: Fraction, b: Fraction, r: int, c: Fraction, s: int) -> int:
    """Exact sign of ``a + b*sqrt(r) + c*sqrt(s)`` for distinct square-free r, s >= 2.

    1, sqrt(r), sqrt(s) are linearly independent over the rationals, so the
    value is zero only when all three coefficients vanish; otherwise interval
    refinement terminates.
    """
    if a == 0 and b == 0 and c == 0:
        return 0
    digits = 20
    while digits <= 1280:
        rlo, rhi = _sqrt_bounds(r, digits)
        slo, shi = _sqrt_bounds(s, digits)
        blo, bhi = _interval_scale(b, rlo, rhi)
        clo, chi = _interval_scale(c, slo, shi)
        lo, hi = a + blo + clo, a + bhi + chi
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        digits *= 2
    raise ArithmeticError("sign refinement did not converge")  # pragma: no cover


@dataclass(frozen=True)
class SurdValue:
    """Exact quadratic surd ``p + q*sqrt(r)``.

    Canonical form: ``r`` is a square-free integer >= 2 when ``q != 0`` and 0
    otherwise (perfect-square radicands are folded into ``p``).  Values over
    the same radicand form a field under +, -, *.
    """

    p: Fraction
    q: Fraction = Fraction(0)
    r: int = 0

    def __post_init__(self) -> None:
        p = _as_fraction(self.p)
        q = _as_fraction(self.q)
        r = self.r
        if not isinstance(r, int):
            rfrac = _as_fraction(r)
            if rfrac < 0:
                raise ValueError("radicand must be nonnegative")
            # sqrt(a/b) = sqrt(a*b)/b
            q = q / rfrac.denominator
            r = rfrac.numerator * rfrac.denominator
        if r < 0:
            raise ValueError("radicand must be nonnegative")
        if q == 0 or r == 0:
            q, r = Fraction(0), 0
        else:
            outside, inside = _square_free(r)
            if inside <= 1:
                p, q, r = p + q * outside * inside, Fraction(0), 0
            else:
                q, r = q * outside, inside
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "r", r)

    # -- predicates ------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return self.q == 0

    @property
    def is_zero(self) -> bool:
        return self.q == 0 and self.p == 0

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError(f"{self} is irrational")
        return self.p

    # -- arithmetic (closed over a single radicand) ----------------------

    def _common_radicand(self, other: "SurdValue") -> int:
        if self.r == 0:
            return other.r
        if other.r == 0 or other.r == self.r:
            return self.r
        raise ValueError(f"incompatible radicands {self.r} and {other.r}")

    def __add__(self, other: object) -> "SurdValue":
        other = as_surd(other)
        r = self._common_radicand(other)
        return SurdValue(self.p + other.p, self.q + other.q, r)

    __radd__ = __add__

    def __neg__(self) -> "SurdValue":
        return SurdValue(-self.p, -self.q, self.r)

    def __sub__(self, other: object) -> "SurdValue":
        return self + (-as_surd(other))

    def __rsub__(self, other: object) -> "SurdValue":
        return as_surd(other) + (-self)

    def __mul__(self, other: object) -> "SurdValue":
        other = as_surd(other)
        if self.is_rational or other.is_rational:
            r = self._common_radicand(other) if (self.q or other.q) else 0
            return SurdValue(
                self.p * other.p,
                self.p * other.q + self.q * other.p,
                r,
            )
        r = self._common_radicand(other)
        return SurdValue(
            self.p * other.p + self.q * other.q * r,
            self.p * other.q + self.q * other.p,
            r,
        )

    __rmul__ = __mul__

    # -- exact ordering ---------------------------------------------------

    def sign(self) -> int:
        p, q, r = self.p, self.q, self.r
        if q == 0:
            return (p > 0) - (p < 0)
        if p == 0:
            return 1 if q > 0 else -1
        if p > 0 and q > 0:
            return 1
        if p < 0 and q < 0:
            return -1
        t = p * p - q * q * r
        s = (t > 0) - (t < 0)
        return s if p > 0 else -s

    def _cmp(self, other: "SurdValue") -> int:
        if self.r == other.r or self.is_rational or other.is_rational:
            return (self - other).sign()
        return _sign_two_radicals(self.p - other.p, self.q, self.r, -other.q, other.r)

    def __lt__(self, other: object) -> bool:
        return self._cmp(as_surd(other)) < 0

    def __le__(self, other: object) -> bool:
        return self._cmp(as_surd(other)) <= 0

    def __gt__(self, other: object) -> bool:
        return self._cmp(as_surd(other)) > 0

    def __ge__(self, other: object) -> bool:
        return self._cmp(as_surd(other)) >= 0

    def __float__(self) -> float:
        value = float(self.p)
        if self.q:
            value += float(self.q) * math.sqrt(self.r)
        return value

    def __repr__(self) -> str:
        if self.is_rational:
            return f"Surd({self.p})"
        return f"Surd({self.p} + {self.q}*sqrt({self.r}))"

    def to_json_dict(self) -> dict:
        return {"p": str(self.p), "q": str(self.q), "r": self.r}


def as_surd(value: object) -> SurdValue:
    if isinstance(value, SurdValue):
        return value
    return SurdValue(_as_fraction(value))  # type: ignore[arg-type]


def rational_sqrt(value: RationalLike) -> SurdValue:
    """Exact square root of a nonnegative rational as a SurdValue."""
    x = _as_fraction(value)
    if x < 0:
        raise ValueError("cannot take a real square root of a negative rational")
    return SurdValue(Fraction(0), Fraction(1, x.denominator), x.numerator * x.denominator)


SURD_ZERO = SurdValue(Fraction(0))
SURD_ONE = SurdValue(Fraction(1))


@dataclass(frozen=True)
class PowerLogTerm:
    """One term ``coeff * x**exponent * ln(x)**logpow`` (coeff nonzero when stored)."""

    coeff: SurdValue
    exponent: SurdValue
    logpow: int = 0

    def __post_init__(self) -> None:
        if self.logpow < 0:
            raise ValueError("logpow must be nonnegative")

    def evaluate(self, x: float) -> float:
        value = float(self.coeff) * x ** float(self.exponent)
        if self.logpow:
            value *= math.log(x) ** self.logpow
        return value

    def to_json_dict(self) -> dict:
        return {
            "coeff": self.coeff.to_json_dict(),
            "exponent": self.exponent.to_json_dict(),
            "logpow": self.logpow,
        }

    def __repr__(self) -> str:
        parts = [f"{self.coeff!r}"]
        if not self.exponent.is_zero:
            parts.append(f"x^({self.exponent!r})")
        if self.logpow:
            parts.append(f"ln^{self.logpow}")
        return "*".join(parts)


@dataclass(frozen=True)
class TermSum:
    """Canonical finite sum of power-log terms; the empty sum is zero.

    Canonical form: no two terms share (exponent, logpow), coefficients are
    nonzero and terms are sorted by (exponent, logpow).  Use :func:`term_sum`
    (or the arithmetic operators) so canonicalisation is never skipped.
    """

    terms: tuple[PowerLogTerm, ...] = ()

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "TermSum") -> "TermSum":
        return term_sum(self.terms + other.terms)

    def __sub__(self, other: "TermSum") -> "TermSum":
        return self + other.scale(-1)

    def scale(self, factor: object) -> "TermSum":
        f = as_surd(factor)
        if f.is_zero:
            return TermSum()
        return term_sum(
            PowerLogTerm(f * t.coeff, t.exponent, t.logpow) for t in self.terms
        )

    def shift(self, delta: object) -> "TermSum":
        """Multiply by ``x**delta`` (shift every exponent)."""
        d = as_surd(delta)
        return term_sum(
            PowerLogTerm(t.coeff, t.exponent + d, t.logpow) for t in self.terms
        )

    def evaluate(self, x: float) -> float:
        return evaluate(self, x)

    def to_json_list(self) -> list:
        return [t.to_json_dict() for t in self.terms]

    def __repr__(self) -> str:
        if not self.terms:
            return "TermSum(0)"
        return "TermSum(" + " + ".join(repr(t) for t in self.terms) + ")"


def term_sum(terms: Iterable[PowerLogTerm]) -> TermSum:
    """Canonicalise: merge equal (exponent, logpow), drop zeros, sort."""
    merged: dict[tuple[SurdValue, int], SurdValue] = {}
    for t in terms:
        key = (t.exponent, t.logpow)
        merged[key] = merged[key] + t.coeff if key in merged else t.coeff
    kept = [
        PowerLogTerm(c, e, k) for (e, k), c in merged.items() if not c.is_zero
    ]
    kept.sort(key=lambda t: (t.exponent, t.logpow))
    return TermSum(tuple(kept))


def monomial(exponent: object, coeff: object = 1, logpow: int = 0) -> TermSum:
    c = as_surd(coeff)
    if c.is_zero:
        return TermSum()
    return TermSum((PowerLogTerm(c, as_surd(exponent), logpow),))


ZERO = TermSum()
ONE = monomial(0)


# ---------------------------------------------------------------------------
# calculus
# ---------------------------------------------------------------------------

def differentiate(v: TermSum) -> TermSum:
    """Exact derivative: d/dx [c x^a ln(x)^k] = c a x^(a-1) ln^k + c k x^(a-1) ln^(k-1)."""
    out: list[PowerLogTerm] = []
    for t in v.terms:
        down = t.exponent - SURD_ONE
        coeff_power = t.coeff * t.exponent
        if not coeff_power.is_zero:
            out.append(PowerLogTerm(coeff_power, down, t.logpow))
        if t.logpow:
            out.append(PowerLogTerm(t.coeff * as_surd(t.logpow), down, t.logpow - 1))
    return term_sum(out)


def _apply_lbeta(beta: Fraction, v: TermSum) -> TermSum:
    v1 = differentiate(v)
    v3 = differentiate(differentiate(v1))
    inner = v3.shift(2) + v1.scale(-beta)
    return differentiate(inner)


def apply_lbeta(beta: RationalLike, v: TermSum) -> TermSum:
    """Apply ``L_beta v = d/dx (x^2 v''' - beta v')`` exactly; linear in ``v``."""
    b = _as_fraction(beta)
    if b < 0:
        raise ValueError("beta must be >= 0")
    return _apply_lbeta(b, v)


def indicial_residual(beta: RationalLike, a: object) -> SurdValue:
    """Coefficient of ``x**(a-2)`` in ``L_beta x**a``; zero iff x**a is in the kernel."""
    exponent = as_surd(a)
    image = _apply_lbeta(_as_fraction(beta), monomial(exponent))
    if image.is_zero:
        return SURD_ZERO
    if len(image.terms) != 1 or image.terms[0].logpow != 0:
        raise AssertionError("pure power must map to a single pure power")
    return image.terms[0].coeff


def indicial_roots(beta: RationalLike) -> tuple[SurdValue, ...]:
    """The four exponents a with ``L_beta x**a = 0``, with multiplicity, sorted.

    The pure power ``x**a`` maps to ``a (a-1) [(a-1)(a-2) - beta] x**(a-2)``,
    so the roots are 0, 1 and ``3/2 +- sqrt(1/4 + beta)``.
    """
    b = _as_fraction(beta)
    if b < 0:
        raise ValueError("beta must be >= 0")
    half_disc = rational_sqrt(Fraction(1, 4) + b)
    three_halves = SurdValue(Fraction(3, 2))
    roots = [SURD_ZERO, SURD_ONE, three_halves - half_disc, three_halves + half_disc]
    return tuple(sorted(roots))


def kernel_basis(beta: RationalLike) -> tuple[TermSum, ...]:
    """Four linearly independent exact solutions of ``L_beta v = 0``.

    A double indicial root ``a`` contributes ``x**a`` and ``x**a ln x``.
    """
    roots = indicial_roots(beta)
    basis: list[TermSum] = []
    i = 0
    while i < len(roots):
        multiplicity = 1
        while i + multiplicity < len(roots) and roots[i + multiplicity] == roots[i]:
            multiplicity += 1
        for k in range(multiplicity):
            basis.append(monomial(roots[i], logpow=k))
        i += multiplicity
    return tuple(basis)


def particular_solution(beta: RationalLike, b: RationalLike) -> TermSum:
    """Exact solution of ``L_beta v = b``: ``-b/(2 beta) x^2`` for beta > 0,
    ``(b/2) x^2 ln x`` for beta = 0 (sign fixed by the residual of L_0)."""
    bcoef = _as_fraction(b)
    bval = _as_fraction(beta)
    if bval < 0:
        raise ValueError("beta must be >= 0")
    if bcoef == 0:
        return ZERO
    if bval > 0:
        return monomial(2, coeff=-bcoef / (2 * bval))
    return monomial(2, coeff=bcoef / 2, logpow=1)


# ---------------------------------------------------------------------------
# admissibility under the weighted boundary class
# ---------------------------------------------------------------------------

def _bounded_near_zero(v: TermSum) -> bool:
    """True iff every term stays bounded on (0, 1] as x -> 0+.

    ``c x^e ln(x)^k`` is bounded near zero iff e > 0, or e = 0 with k = 0.
    """
    for t in v.terms:
        e = t.exponent.sign()
        if e < 0 or (e == 0 and t.logpow > 0):
            return False
    return True


def admissible(term: PowerLogTerm) -> bool:
    """Whether ``x**2 * D^4 term`` and ``x * D^3 term`` are bounded on (0, 1].

    Terms whose relevant derivative vanishes identically are admissible
    regardless of exponent.
    """
    v = TermSum((term,))
    d3 = differentiate(differentiate(differentiate(v)))
    d4 = differentiate(d3)
    return _bounded_near_zero(d3.shift(1)) and _bounded_near_zero(d4.shift(2))


def admissible_sum(v: TermSum) -> bool:
    return all(admissible(t) for t in v.terms)


# ---------------------------------------------------------------------------
# closed-form audit report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IndicialReport:
    """Kernel-exponent audit for one beta.

    ``derived_roots`` always have exactly zero residual; the published
    closed-form pair ``-1/2 -+ sqrt(1/4+beta)`` is re-checked by direct
    substitution and its (generally nonzero) residuals are recorded.
    """

    beta: Fraction
    derived_roots: tuple[SurdValue, ...]
    published_a1: SurdValue
    published_a2: SurdValue
    published_residuals: tuple[TermSum, TermSum]


@dataclass(frozen=True)
class Remark11Report:
    """Full closed-form solution report for ``L_beta v = b``.

    Contains the derived kernel basis with per-element admissibility, the
    admissible general solution (admissible kernel span plus particular
    part), and the indicial audit of the published exponents.
    """

    indicial: IndicialReport
    b: Fraction
    kernel: tuple[TermSum, ...]
    admissible_flags: tuple[bool, ...]
    particular: TermSum
    printed_particular_residual: TermSum | None

    @property
    def beta(self) -> Fraction:
        return self.indicial.beta

    def admissible_kernel(self) -> tuple[TermSum, ...]:
        return tuple(
            v for v, ok in zip(self.kernel, self.admissible_flags) if ok
        )

    def to_json_dict(self) -> dict:
        notes = []
        for a, res in zip(
            (self.indicial.published_a1, self.indicial.published_a2),
            self.indicial.published_residuals,
        ):
            if not res.is_zero:
                notes.append(
                    f"published exponent {float(a):.6g} has nonzero residual"
                )
        if self.printed_particular_residual is not None:
            res = self.printed_particular_residual
            if res != monomial(0, coeff=self.b):
                notes.append(
                    "printed beta=0 particular part maps to "
                    f"{res!r}, not to b={self.b}"
                )
        return {
            "beta": str(self.beta),
            "b": str(self.b),
            "derived_roots": [r.to_json_dict() for r in self.indicial.derived_roots],
            "kernel": [v.to_json_list() for v in self.kernel],
            "admissible": list(self.admissible_flags),
            "particular": self.particular.to_json_list(),
            "admissible_solution": {
                "kernel_span": [v.to_json_list() for v in self.admissible_kernel()],
                "particular": self.particular.to_json_list(),
            },
            "published_exponents": [
                self.indicial.published_a1.to_json_dict(),
                self.indicial.published_a2.to_json_dict(),
            ],
            "published_residuals": [
                r.to_json_list() for r in self.indicial.published_residuals
            ],
            "notes": notes,
        }


def remark11_report(beta: RationalLike, b: RationalLike) -> Remark11Report:
    """Derive kernel, admissibility and particular solution, and audit the
    published exponent pair for ``L_beta v = b``."""
    bval = _as_fraction(beta)
    if bval < 0:
        raise ValueError("beta must be >= 0")
    bcoef = _as_fraction(b)

    roots = indicial_roots(bval)
    basis = kernel_basis(bval)
    flags = tuple(admissible_sum(v) for v in basis)
    particular = particular_solution(bval, bcoef)

    half_disc = rational_sqrt(Fraction(1, 4) + bval)
    minus_half = SurdValue(Fraction(-1, 2))
    pub_a1 = minus_half - half_disc
    pub_a2 = minus_half + half_disc
    residuals = (
        _apply_lbeta(bval, monomial(pub_a1)),
        _apply_lbeta(bval, monomial(pub_a2)),
    )

    printed_residual = None
    if bval == 0 and bcoef != 0:
        printed = monomial(2, coeff=-bcoef / 2, logpow=1) + monomial(
            2, coeff=Fraction(3, 4) * bcoef
        )
        printed_residual = _apply_lbeta(bval, printed)

    indicial = IndicialReport(bval, roots, pub_a1, pub_a2, residuals)
    return Remark11Report(
        indicial=indicial,
        b=bcoef,
        kernel=basis,
        admissible_flags=flags,
        particular=particular,
        printed_particular_residual=printed_residual,
    )


def evaluate(v: TermSum, x: float) -> float:
    """Floating evaluation of ``v`` at ``x > 0``."""
    x = float(x)
    if not x > 0:
        raise ValueError(f"evaluation point must be positive, got {x}")
    return math.fsum(t.evaluate(x) for t in v.terms)
