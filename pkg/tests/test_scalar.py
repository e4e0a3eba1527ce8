"""Exact scalars in Q[sqrt(d)].

Oracles: sympy exact arithmetic for field operations, mpmath at 60 digits for
signs and comparisons.
"""

from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from birkhoff_facets.scalar import (
    QuadExt, QuadInt, ScalarParseError, as_field, qe_compare, qe_format, qe_parse,
    qe_sign, quad_sign,
)

mpmath.mp.dps = 60

rats = st.fractions(min_value=-10**6, max_value=10**6, max_denominator=10**4)
ds = st.sampled_from([2, 3, 5, 6, 7, 13])


@st.composite
def quads(draw, d=None):
    d = d or draw(ds)
    return QuadExt(draw(rats), draw(rats), d)


@st.composite
def same_field(draw, count=2):
    d = draw(ds)
    return [QuadExt(draw(rats), draw(rats), d) for _ in range(count)]


def sym(x: QuadExt):
    return sympy.Rational(x.a.numerator, x.a.denominator) + \
        sympy.Rational(x.b.numerator, x.b.denominator) * sympy.sqrt(x.d)


def mp_value(x: QuadExt):
    return mpmath.mpf(x.a.numerator) / x.a.denominator + \
        mpmath.mpf(x.b.numerator) / x.b.denominator * mpmath.sqrt(x.d)


# examples ---------------------------------------------------------------------

def test_golden_ratio_identity():
    phi = QuadExt(Fraction(1, 2), Fraction(1, 2), 5)
    assert phi * phi == phi + 1


def test_sign_near_zero():
    # 161/72 - sqrt(5) is about 2.7e-5 > 0
    assert qe_sign(QuadExt(Fraction(161, 72), -1, 5)) == 1
    assert qe_sign(QuadExt(-Fraction(161, 72), 1, 5)) == -1


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        QuadExt(1, 1, 5) / QuadExt(0, 0, 5)


@pytest.mark.parametrize("d", [1, 4, 8, 0, -3])
def test_bad_d(d):
    with pytest.raises(ValueError):
        QuadExt(1, 1, d)


@pytest.mark.parametrize("text,a,b", [
    ("1/4", Fraction(1, 4), 0),
    ("-3/2+1/2*sqrt(5)", Fraction(-3, 2), Fraction(1, 2)),
    ("sqrt(5)", 0, 1),
    ("-sqrt(5)", 0, -1),
    ("2 - 3/7*sqrt(5)", 2, Fraction(-3, 7)),
    ("0", 0, 0),
])
def test_parse(text, a, b):
    x = qe_parse(text, 5)
    assert (x.a, x.b) == (Fraction(a), Fraction(b))


@pytest.mark.parametrize("text", ["", "1/0", "sqrt(3)", "1 2", "1+", "abc", "1sqrt(5)", "/2"])
def test_parse_errors(text):
    with pytest.raises(ScalarParseError):
        qe_parse(text, 5)


def test_rational_context_rejects_sqrt():
    assert qe_parse("-7/3", None) == Fraction(-7, 3)
    with pytest.raises(ScalarParseError):
        qe_parse("1+sqrt(5)", None)


def test_as_field_context_mismatch():
    with pytest.raises(ValueError):
        as_field(QuadExt(1, 1, 2), 5)
    with pytest.raises(ValueError):
        as_field(QuadExt(1, 1, 5), None)


def test_quadint_sign_matches_field():
    assert QuadInt(-2, 1, 5).sign() == QuadExt(-2, 1, 5).sign() == 1
    assert QuadInt(3, -1, 5).sign() == 1
    assert QuadInt(2, -1, 5).sign() == -1


# properties -------------------------------------------------------------------

@given(same_field(3))
def test_field_axioms(xs):
    x, y, z = xs
    assert x + y == y + x
    assert x * y == y * x
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x - x == 0
    if x:
        assert x * x.inverse() == 1


@given(same_field(2))
def test_arithmetic_matches_sympy(xs):
    x, y = xs
    for got, want in [(x + y, sym(x) + sym(y)), (x - y, sym(x) - sym(y)), (x * y, sym(x) * sym(y))]:
        assert sympy.simplify(sym(got) - want) == 0
    if y:
        assert sympy.simplify(sym(x / y) - sym(x) / sym(y)) == 0


@given(quads())
def test_sign_matches_high_precision(x):
    v = mp_value(x)
    if abs(v) > mpmath.mpf("1e-6"):
        assert qe_sign(x) == (1 if v > 0 else -1)
    if not x:
        assert qe_sign(x) == 0


@given(same_field(2))
def test_compare_is_total_order(xs):
    x, y = xs
    c = qe_compare(x, y)
    assert c == -qe_compare(y, x)
    assert (c == 0) == (x == y)
    assert (x < y) == (c < 0)


@given(quads())
def test_format_roundtrip(x):
    text = qe_format(x)
    assert " " not in text
    assert qe_parse(text, x.d) == x


@given(st.integers(-10**30, 10**30), st.integers(-10**30, 10**30), ds)
def test_quad_sign_big_integers(a, b, d):
    v = mpmath.mpf(a) + mpmath.mpf(b) * mpmath.sqrt(d)
    s = quad_sign(a, b, d)
    if a == 0 and b == 0:
        assert s == 0
    else:
        assert s == (1 if v > 0 else -1)


@given(quads())
def test_hash_consistent_with_rationals(x):
    if x.b == 0:
        assert hash(x) == hash(x.a)
        assert x == x.a


def test_parse_multi_digit_denominator_coefficient():
    # regression: "1/10*sqrt(2)" was split into "1/1" and "0*sqrt(2)"
    assert qe_parse("1/10*sqrt(2)", 2) == QuadExt(0, Fraction(1, 10), 2)
    assert qe_parse("12/35-7/10*sqrt(2)", 2) == QuadExt(Fraction(12, 35), Fraction(-7, 10), 2)
