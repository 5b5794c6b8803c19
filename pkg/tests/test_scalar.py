from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from folires.scalar import ONE, ZERO, Scalar, classify, is_valid_final_index

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=30)
scalars = st.builds(Scalar, rationals, rationals, rationals, rationals)
nonzero = scalars.filter(bool)
real_scalars = st.builds(Scalar, rationals, rationals)

SQ2 = Scalar.sqrt2()
I = Scalar.i()


def test_sqrt2_and_i_square():
    assert SQ2 * SQ2 == Scalar(2)
    assert I * I == Scalar(-1)
    assert (SQ2 * I) * (SQ2 * I) == Scalar(-2)


def test_corner_reciprocal_of_sqrt2_is_half_sqrt2():
    assert ONE / SQ2 == Scalar(0, Fraction(1, 2))


def test_inverse_of_zero_raises():
    with pytest.raises(ZeroDivisionError):
        ZERO.inverse()


@pytest.mark.parametrize("text, expected", [
    ("(1,0,-3/2,0)", Scalar(1, 0, Fraction(-3, 2))),
    ("( 0 , 1 , 0 , 0 )", SQ2),
    ("(-7/3,0,0,1)", Scalar(Fraction(-7, 3), 0, 0, 1)),
])
def test_parse(text, expected):
    assert Scalar.parse(text) == expected


@pytest.mark.parametrize("bad", ["(1,2,3)", "1,0,0,0", "(a,0,0,0)", "(1/0,0,0,0)", ""])
def test_parse_rejects_malformed(bad):
    with pytest.raises(ValueError):
        Scalar.parse(bad)


@pytest.mark.parametrize("x, cls", [
    (SQ2, "nodal"),
    (Scalar(Fraction(-5, 3)), "real_saddle"),
    (Scalar(1, 0, 1), "complex_saddle"),
    (Scalar(3), "invalid"),
    (ZERO, "invalid"),
    (Scalar(-1, 1), "nodal"),        # sqrt2 - 1 > 0
    (Scalar(2, -2), "real_saddle"),  # 2 - 2 sqrt2 < 0
])
def test_classify_examples(x, cls):
    assert classify(x) == cls


def test_sign_near_sqrt2_is_exact():
    # 99/70 and 140/99 are the classic convergents on either side of sqrt2
    assert (Scalar(Fraction(99, 70)) - SQ2).real_sign() == 1
    assert (Scalar(Fraction(140, 99)) - SQ2).real_sign() == -1


def test_valid_final_index():
    assert not is_valid_final_index(Scalar(1))
    assert is_valid_final_index(Scalar(-1))
    assert is_valid_final_index(SQ2)


def test_render_round_trip():
    x = Scalar(Fraction(1, 3), -2, 0, Fraction(5, 7))
    assert x.render() == "(1/3,-2,0,5/7)"
    assert Scalar.parse(x.render()) == x


@settings(max_examples=1000)
@given(nonzero)
def test_inverse_times_self_is_one(x):
    assert x.inverse() * x == ONE
    assert x / x == ONE


@given(scalars, scalars, scalars)
def test_ring_axioms(x, y, z):
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x * y == y * x
    assert x + (-x) == ZERO


@given(scalars, scalars)
def test_conjugations_are_multiplicative(x, y):
    assert (x * y).conjugate() == x.conjugate() * y.conjugate()
    assert (x * y).sqrt2_conjugate() == x.sqrt2_conjugate() * y.sqrt2_conjugate()


@given(scalars)
def test_predicates_match_zero_patterns(x):
    a, b, c, d = x.as_tuple()
    assert x.is_real() == (c == 0 and d == 0)
    assert x.is_rational() == (b == 0 and c == 0 and d == 0)


@given(real_scalars)
def test_real_sign_agrees_with_floats_away_from_zero(x):
    a, b, _, _ = x.as_tuple()
    approx = float(a) + float(b) * 2 ** 0.5
    if abs(approx) > 1e-9:
        assert x.real_sign() == (1 if approx > 0 else -1)


@given(nonzero)
def test_classification_survives_reciprocal(x):
    assert classify(x.inverse()) == classify(x)


@given(scalars)
def test_parse_render_identity(x):
    assert Scalar.parse(x.render()) == x
    assert hash(Scalar.parse(x.render())) == hash(x)


@given(real_scalars.filter(bool), real_scalars)
def test_real_fast_paths_agree_with_the_general_formulas(x, y):
    # (x + i) * y goes through the general product
    assert x * y == (x + I) * y - I * y
    assert x.inverse() * x == ONE
    assert (x * y).is_real()
