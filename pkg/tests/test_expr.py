import numpy as np
import pytest

from nodalab import expr


def test_trig_and_arithmetic():
    t = np.linspace(0, 1, 5)
    assert np.allclose(expr.evaluate("sin(2*theta) + 0.5*theta**2 - 1", theta=t), np.sin(2 * t) + 0.5 * t**2 - 1)


def test_constants_and_binary_functions():
    assert expr.evaluate("max(x, 0) + atan2(1, 1) + pi - e", x=np.array([-1.0, 2.0])).tolist() == pytest.approx(
        [np.pi / 4 + np.pi - np.e, 2 + np.pi / 4 + np.pi - np.e]
    )


def test_unary_minus_and_plus():
    assert expr.evaluate("-x + +y", x=2.0, y=5.0) == 3.0


def test_variables_used():
    assert expr.variables_used("x*y + sin(theta) + pi") == {"x", "y", "theta"}


@pytest.mark.parametrize(
    "text",
    ["sin(", "__import__('os')", "x.real", "[1, 2]", "lambda: 1", "foo(1)", "x if y else 1", "True", "'a'", "sin(x=1)", "z"],
)
def test_rejected(text):
    with pytest.raises(expr.ExpressionError):
        expr.parse(text)


def test_missing_variable():
    with pytest.raises(expr.ExpressionError, match="'s'"):
        expr.evaluate("s + 1", theta=0.0)


def test_numeric_literal():
    assert expr.evaluate("0") == 0.0
