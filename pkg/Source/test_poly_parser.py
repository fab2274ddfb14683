"""
Тесты разбора и печати многочленов.
"""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from errors import ParseError, UnknownVariableError
from exact_algebra import poly_ring
from poly_parser import parse_poly, render_poly


def test_parse_cubic_involution_coordinate():
    f = parse_poly("5*x^3 - x*y^2 + 8*x^2*z")
    x, y, z = f.ring.gens
    assert f == 5 * x ** 3 - x * y ** 2 + 8 * x ** 2 * z


def test_parse_zero_and_big_integers():
    assert not parse_poly("0")
    big = parse_poly("123456789012345678901234567890*x")
    assert big.LC == 123456789012345678901234567890


def test_parse_parentheses_and_signs():
    f = parse_poly("-(x - y)^2 + (x + y)*(x - y)")
    assert f == parse_poly("2*x*y - 2*y^2")
    assert parse_poly("  x\n +\ty ") == parse_poly("x+y")


def test_syntax_error_position():
    with pytest.raises(ParseError) as info:
        parse_poly("x^2 + ")
    assert info.value.line == 1
    assert info.value.column == 7


def test_implicit_multiplication_rejected():
    with pytest.raises(ParseError) as info:
        parse_poly("2x")
    assert info.value.column == 2


def test_non_integer_literal():
    with pytest.raises(ParseError):
        parse_poly("1.5*x")


def test_unknown_variable():
    with pytest.raises(UnknownVariableError) as info:
        parse_poly("x + w")
    assert info.value.column == 5


def test_error_on_second_line():
    with pytest.raises(ParseError) as info:
        parse_poly("x +\n  * y")
    assert (info.value.line, info.value.column) == (2, 3)


def test_render_round_trip():
    texts = [
        "5*x^3 - x*y^2 + 8*x^2*z",
        "-2*x^3 - 5*x^2*z + y^2*z",
        "9*x^5 - 10*x^3*y^2 + x*y^4 + 10*x^3*y*z - 2*x*y^3*z",
        "0",
        "-7",
    ]
    for text in texts:
        f = parse_poly(text)
        assert parse_poly(render_poly(f)) == f
    assert render_poly(parse_poly("x*y^2 - x^3")) == "-x^3 + x*y^2"


def test_custom_variables():
    R = poly_ring(("w", "x", "y", "z"))
    f = parse_poly("w*z - x*y", R=R)
    assert f.ring == R
    assert render_poly(f) == "w*z - x*y"


if __name__ == "__main__":
    print("=" * 60)
    print("🧪 Тесты poly_parser")
    print("=" * 60)
    tests = [obj for name, obj in sorted(globals().items()) if name.startswith("test_")]
    for test in tests:
        test()
        print(f"✅ {test.__name__}")
    print(f"\n🎯 Пройдено {len(tests)} тестов")
