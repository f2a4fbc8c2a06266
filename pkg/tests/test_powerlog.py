"""Exact-calculus tests: every expected value is either hand-derived or
reproduced by an independent oracle (repeated differentiation / direct
substitution) before being asserted."""

from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from degenlab import powerlog as pl


def mono(e, c=1, k=0):
    return pl.monomial(F(e) if not isinstance(e, pl.SurdValue) else e, coeff=c, logpow=k)


# ---------------------------------------------------------------------------
# surd arithmetic
# ---------------------------------------------------------------------------

def test_surd_canonical_perfect_square():
    s = pl.SurdValue(F(1), F(2), 9)  # 1 + 2*sqrt(9) = 7
    assert s.is_rational and s.p == 7


def test_surd_rational_radicand_normalised():
    s = pl.rational_sqrt(F(9, 4))
    assert s.is_rational and s.p == F(3, 2)
    t = pl.rational_sqrt(F(5, 4))  # sqrt(5)/2
    assert (t.p, t.q, t.r) == (0, F(1, 2), 5)
    u = pl.rational_sqrt(F(1, 2))  # sqrt(2)/2
    assert (u.p, u.q, u.r) == (0, F(1, 2), 2)


def test_surd_arithmetic_same_radicand():
    a = pl.SurdValue(F(1), F(1), 5)
    b = pl.SurdValue(F(2), F(-1), 5)
    assert (a + b).is_rational and (a + b).p == 3
    prod = a * b  # (1 + s5)(2 - s5) = 2 - s5 + 2 s5 - 5 = -3 + s5
    assert (prod.p, prod.q, prod.r) == (-3, 1, 5)


def test_surd_incompatible_radicands_raise():
    a = pl.SurdValue(F(0), F(1), 2)
    b = pl.SurdValue(F(0), F(1), 3)
    with pytest.raises(ValueError):
        _ = a + b
    # ordering still works across radicands (exact interval refinement)
    assert a < b
    assert b > a


def test_surd_ordering_matches_float():
    vals = [
        pl.SurdValue(F(1, 2), F(-1), 3),
        pl.SurdValue(F(2)),
        pl.SurdValue(F(0), F(1), 2),
        pl.SurdValue(F(-1), F(1), 5),
    ]
    by_exact = sorted(vals)
    by_float = sorted(vals, key=float)
    assert by_exact == by_float


@given(
    p=st.fractions(min_value=-3, max_value=3, max_denominator=6),
    q=st.fractions(min_value=-3, max_value=3, max_denominator=6),
    r=st.sampled_from([0, 2, 3, 5, 7]),
)
def test_surd_sign_agrees_with_float(p, q, r):
    s = pl.SurdValue(p, q, r)
    fs = float(s)
    if abs(fs) > 1e-9:
        assert s.sign() == (1 if fs > 0 else -1)


# ---------------------------------------------------------------------------
# differentiation
# ---------------------------------------------------------------------------

def test_differentiate_monomial():
    assert pl.differentiate(mono(1)) == mono(0)


def test_differentiate_power_log():
    # d/dx x^2 ln x = 2 x ln x + x  (hand derivative)
    got = pl.differentiate(mono(2, k=1))
    assert got == mono(1, c=2, k=1) + mono(1)


def test_differentiate_zero():
    assert pl.differentiate(pl.ZERO) == pl.ZERO


# ---------------------------------------------------------------------------
# the degenerate operator
# ---------------------------------------------------------------------------

def test_lbeta_kills_linear():
    for beta in (F(0), F(1, 4), F(2)):
        assert pl.apply_lbeta(beta, mono(1)).is_zero


def test_lbeta_x2_logx_beta0():
    # hand oracle: v''' = 2/x, x^2 v''' = 2x, d/dx = 2
    assert pl.apply_lbeta(0, mono(2, k=1)) == mono(0, c=2)


def test_lbeta_particular_quadratic():
    b = F(3, 2)
    beta = F(5, 4)
    v = mono(2, c=-b / (2 * beta))
    assert pl.apply_lbeta(beta, v) == mono(0, c=b)


def test_lbeta_negative_power_beta2():
    # hand oracle: x^2 v''' = -24 x^-3, -2 v' = 4 x^-3, d/dx(-20 x^-3) = 60 x^-4
    assert pl.apply_lbeta(2, mono(-2)) == mono(-4, c=60)


def test_lbeta_rejects_negative_beta():
    with pytest.raises(ValueError):
        pl.apply_lbeta(F(-1), mono(2))


@settings(max_examples=60)
@given(
    beta=st.fractions(min_value=0, max_value=4, max_denominator=6),
    alpha=st.fractions(min_value=-3, max_value=3, max_denominator=6),
    gamma=st.fractions(min_value=-3, max_value=3, max_denominator=6),
    exps=st.lists(
        st.tuples(
            st.fractions(min_value=-2, max_value=4, max_denominator=4),
            st.integers(min_value=0, max_value=2),
        ),
        min_size=1,
        max_size=4,
        unique=True,
    ),
)
def test_lbeta_linearity(beta, alpha, gamma, exps):
    u = pl.term_sum(
        [pl.PowerLogTerm(pl.as_surd(F(i + 1)), pl.as_surd(e), k) for i, (e, k) in enumerate(exps)]
    )
    v = pl.term_sum(
        [pl.PowerLogTerm(pl.as_surd(F(2 * i - 3)), pl.as_surd(e), k) for i, (e, k) in enumerate(exps)]
    )
    lhs = pl.apply_lbeta(beta, u.scale(alpha) + v.scale(gamma))
    rhs = pl.apply_lbeta(beta, u).scale(alpha) + pl.apply_lbeta(beta, v).scale(gamma)
    assert lhs == rhs


# ---------------------------------------------------------------------------
# indicial structure
# ---------------------------------------------------------------------------

def test_indicial_residual_examples():
    assert pl.indicial_residual(F(7, 3), F(0)).is_zero
    assert pl.indicial_residual(F(3, 4), F(5, 2)).is_zero
    assert pl.indicial_residual(F(2), F(-2)) == pl.as_surd(60)


@pytest.mark.parametrize(
    "beta,expected",
    [
        (F(0), [F(0), F(1), F(1), F(2)]),
        (F(3, 4), [F(0), F(1, 2), F(1), F(5, 2)]),
        (F(2), [F(0), F(0), F(1), F(3)]),
    ],
)
def test_indicial_roots_known(beta, expected):
    roots = pl.indicial_roots(beta)
    assert [r.as_fraction() for r in roots] == sorted(expected)
    # oracle: every reported root has exactly zero residual
    for r in roots:
        assert pl.indicial_residual(beta, r).is_zero


@given(beta=st.fractions(min_value=0, max_value=4, max_denominator=8))
def test_roots_residual_consistency(beta):
    roots = pl.indicial_roots(beta)
    for r in roots:
        assert pl.indicial_residual(beta, r).is_zero
    # rational candidates off the root set must have nonzero residual
    for cand in (F(-1), F(1, 3), F(5, 4), F(7, 2), F(4)):
        if all(not (pl.as_surd(cand) == r) for r in roots):
            assert not pl.indicial_residual(beta, cand).is_zero


def test_kernel_basis_beta0_exact_set():
    basis = set(pl.kernel_basis(0))
    assert basis == {mono(0), mono(1), mono(2), mono(1, k=1)}


def test_kernel_basis_double_root_log_companion():
    basis = set(pl.kernel_basis(2))
    assert basis == {mono(0), mono(0, k=1), mono(1), mono(3)}


def test_kernel_basis_surd_roots():
    basis = set(pl.kernel_basis(F(3, 4)))
    assert basis == {mono(0), mono(1), mono(F(1, 2)), mono(F(5, 2))}


@given(beta=st.fractions(min_value=0, max_value=5, max_denominator=10))
def test_kernel_exactness(beta):
    for v in pl.kernel_basis(beta):
        assert pl.apply_lbeta(beta, v).is_zero


@given(
    beta=st.fractions(min_value=0, max_value=4, max_denominator=8),
    b=st.fractions(min_value=-5, max_value=5, max_denominator=8),
)
def test_particular_correctness(beta, b):
    v = pl.particular_solution(beta, b)
    assert pl.apply_lbeta(beta, v) == mono(0, c=b)


def test_particular_examples():
    assert pl.particular_solution(1, 2) == mono(2, c=-1)
    assert pl.particular_solution(0, 0) == pl.ZERO
    assert pl.particular_solution(0, 2) == mono(2, k=1)


# ---------------------------------------------------------------------------
# admissibility
# ---------------------------------------------------------------------------

def term(e, k=0):
    return pl.PowerLogTerm(pl.SURD_ONE, pl.as_surd(F(e)), k)


def test_admissible_examples():
    assert not pl.admissible(term(1, k=1))  # x ln x
    assert pl.admissible(term(F(5, 2)))
    assert pl.admissible(term(2))
    assert not pl.admissible(term(F(1, 2)))


@given(a=st.fractions(min_value=-2, max_value=4, max_denominator=12))
def test_admissible_pure_power_rule(a):
    expected = a >= 2 or a in (0, 1)
    assert pl.admissible(term(a)) == expected


# ---------------------------------------------------------------------------
# audit report
# ---------------------------------------------------------------------------

@given(beta=st.fractions(min_value=0, max_value=4, max_denominator=8))
def test_vieta_audit(beta):
    rep = pl.remark11_report(beta, 1)
    a1, a2 = rep.indicial.published_a1, rep.indicial.published_a2
    assert a1 + a2 == pl.as_surd(-1)
    assert a1 * a2 == pl.as_surd(-beta)


def test_remark11_beta0():
    rep = pl.remark11_report(0, 1)
    inadmissible = [v for v, ok in zip(rep.kernel, rep.admissible_flags) if not ok]
    assert inadmissible == [mono(1, k=1)]
    assert set(rep.admissible_kernel()) == {mono(0), mono(1), mono(2)}
    assert rep.particular == mono(2, c=F(1, 2), k=1)
    # printed particular part maps to -b, recorded, not adopted
    assert rep.printed_particular_residual == mono(0, c=-1)


def test_remark11_beta2_discrepancy():
    rep = pl.remark11_report(2, 0)
    res1, res2 = rep.indicial.published_residuals
    assert res1 == mono(-4, c=60)  # a1 = -2 is not a kernel exponent
    assert res2.is_zero  # a2 = 1 happens to be one
    payload = rep.to_json_dict()
    assert payload["notes"]
    assert [r["p"] for r in payload["derived_roots"]] == ["0", "0", "1", "3"]


def test_remark11_beta34():
    rep = pl.remark11_report(F(3, 4), 0)
    flags = dict(zip(rep.kernel, rep.admissible_flags))
    assert flags[mono(F(1, 2))] is False
    assert set(rep.admissible_kernel()) == {mono(0), mono(1), mono(F(5, 2))}


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def test_evaluate_examples():
    assert pl.evaluate(mono(2, k=1), 1.0) == 0.0
    assert pl.evaluate(mono(F(1, 2)), 4.0) == pytest.approx(2.0, rel=1e-15)
    v = [b for b in pl.kernel_basis(F(3, 4)) if b == mono(F(5, 2))][0]
    assert pl.evaluate(v, 4.0) == pytest.approx(32.0, rel=1e-14)


def test_evaluate_rejects_nonpositive():
    with pytest.raises(ValueError):
        pl.evaluate(mono(2), 0.0)
    with pytest.raises(ValueError):
        pl.evaluate(mono(2), -1.0)


@settings(max_examples=40)
@given(
    exps=st.lists(
        st.tuples(
            st.fractions(min_value=-2, max_value=3, max_denominator=4),
            st.integers(min_value=0, max_value=2),
            st.fractions(min_value=-3, max_value=3, max_denominator=5).filter(bool),
        ),
        min_size=1,
        max_size=3,
        unique_by=lambda t: (t[0], t[1]),
    ),
    x=st.floats(min_value=0.5, max_value=2.0),
)
def test_evaluate_respects_differentiation(exps, x):
    v = pl.term_sum(
        [pl.PowerLogTerm(pl.as_surd(c), pl.as_surd(e), k) for e, k, c in exps]
    )
    dv = pl.differentiate(v)
    h = 1e-5 * x
    fd = (pl.evaluate(v, x + h) - pl.evaluate(v, x - h)) / (2 * h)
    exact = pl.evaluate(dv, x)
    scale = max(1e-12, abs(exact), abs(fd))
    assert abs(fd - exact) <= 1e-6 * scale
