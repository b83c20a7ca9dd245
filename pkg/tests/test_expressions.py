import numpy as np
import pytest
from hypothesis import given, strategies as st

from conformable_bvp.expressions import ExpressionError, parse_expression


def test_const():
    e = parse_expression("const:2.5")
    np.testing.assert_array_equal(e(np.linspace(0, 1, 4)), np.full(4, 2.5))
    assert not e.uses_x


def test_poly():
    assert float(parse_expression("poly:0,1,-1")(0.5)) == 0.25


def test_named_functions():
    t = np.linspace(0, 2, 7)
    for name, fn in (("sin", np.sin), ("cos", np.cos), ("exp", np.exp)):
        np.testing.assert_allclose(parse_expression(name)(t), fn(t), rtol=0, atol=0)


def test_manufactured_rhs_expression():
    e = parse_expression("(2*t^(0.5)) - (x - t*(1-t))")
    assert e.uses_x
    t = np.linspace(0, 1, 11)
    x = np.cos(t)
    np.testing.assert_allclose(e(t, x), 2 * t**0.5 - (x - t * (1 - t)), rtol=1e-15, atol=0)


@pytest.mark.parametrize("spec,expected", [
    ("2^3^2", 512.0),
    ("-2^2", -4.0),
    ("2*-3", -6.0),
    ("1 - 2 - 3", -4.0),
    ("8 / 4 / 2", 1.0),
    ("+1.5e1", 15.0),
    (".5", 0.5),
    ("pi", np.pi),
    ("sin(pi/2) + cos(0) * exp(0)", 2.0),
])
def test_precedence_and_literals(spec, expected):
    assert float(parse_expression(spec)(0.0)) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("spec,column,needle", [
    ("2*y", 3, "unknown identifier 'y'"),
    ("t + $", 5, "unexpected character '$'"),
    ("sin(t, x)", 6, "exactly one argument"),
    ("sin t", 1, "exactly one argument"),
    ("(t + 1", 7, "expected ')'"),
    ("t 2", 3, "unexpected token '2'"),
    ("const:abc", 7, "bad number 'abc'"),
    ("poly:1,,2", 8, "bad number ''"),
])
def test_errors_name_token_and_column(spec, column, needle):
    with pytest.raises(ExpressionError) as info:
        parse_expression(spec)
    assert info.value.column == column
    assert needle in str(info.value)
    assert f"column {column}" in str(info.value)


def test_empty_and_x_restriction():
    with pytest.raises(ExpressionError):
        parse_expression("   ")
    with pytest.raises(ExpressionError):
        parse_expression("x + t", variables=("t",))
    with pytest.raises(ExpressionError):
        parse_expression("x*t").of_t()
    assert parse_expression("t^2").of_t()(3.0) == 9.0


@given(st.lists(st.floats(-100, 100), min_size=1, max_size=6), st.floats(-3, 3))
def test_poly_matches_horner(coeffs, t):
    spec = "poly:" + ",".join(repr(c) for c in coeffs)
    expected = 0.0
    for c in reversed(coeffs):
        expected = expected * t + c
    assert float(parse_expression(spec)(t)) == pytest.approx(expected, rel=1e-12, abs=1e-9)


@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
def test_inline_arithmetic_matches_python(p, q):
    spec = f"({p!r})*t - ({q!r})/2 + x"
    assert float(parse_expression(spec)(1.5, 0.25)) == pytest.approx(p * 1.5 - q / 2 + 0.25, rel=1e-12, abs=1e-12)
