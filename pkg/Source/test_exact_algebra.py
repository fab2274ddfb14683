"""
Тесты точной арифметики: многочлены, НОД, кратности, ряды, матрицы, корни.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sympy.polys.domains import QQ

from errors import (
    ArityMismatchError,
    BadPrimeError,
    DimensionMismatchError,
    DomainMismatchError,
    NonSmoothBranchError,
    NonSquareError,
    NotOnCurveError,
)
from exact_algebra import (
    IntMatrix,
    PowerSeries,
    base_point_frame,
    charpoly,
    evaluate_at,
    gcd_poly,
    is_homogeneous,
    jordan_profile,
    largest_real_root,
    line_direction,
    matrix_power,
    matrix_rank,
    modp_gcd,
    modp_mul,
    mult_at,
    permutation_matrix,
    poly_arith,
    poly_ring,
    prime_field,
    ratio_mod_p,
    reduce_mod_p,
    series_branch,
    substitute,
    tangent_cone,
    tangent_line,
    total_degree,
)
from poly_parser import parse_poly

IOTA_Q = ["5*x^3 - x*y^2 + 8*x^2*z", "5*x^2*y - y^3 + 8*x*y*z", "-2*x^3 - 5*x^2*z + y^2*z"]


def P(text, variables=("x", "y", "z")):
    return parse_poly(text, variables)


def test_poly_arith_basics():
    assert poly_arith(P("x + y"), P("x - y"), "mul") == P("x^2 - y^2")
    assert poly_arith(P("y^2*z - x^3 - 5*x^2*z - 4*x*z^2"), (2, 6, 1), "eval") == 0
    assert is_homogeneous(P("x*y + z^2")) and not is_homogeneous(P("x + 1"))


def test_poly_arith_errors():
    other = parse_poly("a + b", ("a", "b"))
    with pytest.raises(DomainMismatchError):
        poly_arith(P("x"), other, "add")
    with pytest.raises(ArityMismatchError):
        poly_arith(P("x"), (1, 2), "eval")


def test_cubic_involution_substitution():
    coords = [P(t) for t in IOTA_Q]
    images = [substitute(c, coords) for c in coords]
    g = gcd_poly(gcd_poly(images[0], images[1]), images[2])
    reduced = [c.exquo(g) for c in images]
    x, y, z = coords[0].ring.gens
    ratio = reduced[0].exquo(x)
    assert reduced == [ratio * x, ratio * y, ratio * z]
    assert total_degree(ratio) == 0


def test_gcd_poly():
    assert gcd_poly(P("x^2 - y^2"), P("x - y")) == P("x - y")
    assert gcd_poly(P("x^2 + y*z"), P("1")) == P("1")
    assert gcd_poly(P("-3*x*y"), P("0")) == P("x*y")
    a, b, g = P("x^2 + 3*y*z"), P("x*y - z^2"), P("2*x - y + 7*z")
    assert gcd_poly(a * g, b * g) == gcd_poly(a, b) * P("2*x - y + 7*z")


def test_gcd_over_prime_field():
    R = poly_ring(("x", "y", "z"), prime_field(101))
    x, y, z = R.gens
    g = gcd_poly((x - y) * (x + z), (x - y) * (y + 3 * z))
    assert g == x - y


def test_mult_at_examples():
    conic = P("y^2 - 5*x^2 - 8*x*z")
    assert mult_at(conic, (0, 0, 1)) == 1
    assert mult_at(conic, (1, 1, 1)) == 0
    node = P("y^2*z - x^3 - x^2*z")
    assert mult_at(node, (0, 0, 1)) == 2
    assert mult_at(node * conic, (0, 0, 1)) == 3


def test_mult_at_chart_chain():
    # касание: y = x^2 и y = 0 разделяются только вторым раздутием
    curve = P("y*z - x^2") * P("y")
    assert mult_at(curve, (0, 0, 1)) == 2
    # в начале z: s = y/z, t = -x/z; общее касательное направление s = 0
    assert mult_at(curve, (0, 0, 1), [(0, 1)]) == 2
    assert mult_at(curve, (0, 0, 1), [(0, 1), (0, 1)]) == 1
    assert mult_at(curve, (0, 0, 1), [(1, 0)]) == 0


def test_tangent_cone_and_line():
    cone = tangent_cone(P("x^2 + y^2"), (0, 0, 1))
    s, t = cone.ring.gens
    assert cone == s ** 2 + t ** 2
    line = tangent_line(P("y^2 - 5*x^2 - 8*x*z"), (0, 0, 1))
    assert line == P("x")
    with pytest.raises(NotOnCurveError):
        tangent_cone(P("x + z"), (0, 0, 1))


def test_line_direction_frame():
    # в p1 = [1,1,0] репер (x, z, x - y): прямая z = 0 задаёт направление [0:1]
    s, t = line_direction(P("z"), (1, 1, 0))
    assert s == 0 and t != 0
    s, t = line_direction(P("2*x - 2*y + z"), (1, 1, 0))
    assert s / t == QQ(-2)


def test_base_point_frame():
    x, y, z = poly_ring(("x", "y", "z")).gens
    assert base_point_frame((1, 1, 0), x.ring) == (x, z, x - y)
    for l in base_point_frame((2, -3, 5), x.ring)[1:]:
        assert evaluate_at(l, (2, -3, 5)) == 0


def test_series_branch_cubic():
    curve = parse_poly("b^2 - a^3 - 5*a^2 - 4*a", ("a", "b"))
    branch = series_branch(curve, "a", 5)
    assert branch.order == 6
    assert branch.coeffs == (0, 0, QQ(1, 4), 0, QQ(-5, 64), 0)


def test_series_branch_residual():
    curve = parse_poly("b^2 - a^3 - 5*a^2 - 4*a", ("a", "b"))
    branch = series_branch(curve, "a", 9)
    b = PowerSeries.gen(10, QQ, "b")
    residual = substitute(curve, [branch, b], PowerSeries.constant(1, 10))
    assert residual.valuation() > 9
    assert series_branch(parse_poly("b^2 - a", ("a", "b")), "a", 4).coeffs == (0, 0, 1, 0, 0)


def test_series_branch_singular():
    with pytest.raises(NonSmoothBranchError):
        series_branch(parse_poly("b^2 - a^3", ("a", "b")), "a", 4)
    with pytest.raises(NotOnCurveError):
        series_branch(parse_poly("a - 1", ("a", "b")), "a", 4)


def test_power_series_arithmetic():
    one_minus = PowerSeries((1, -1), 6)
    inv = one_minus.inverse()
    assert inv.coeffs == (1, 1, 1, 1, 1, 1)
    b = PowerSeries.gen(6)
    assert (b * b).shift(2).coeffs[:2] == (1, 0)
    assert (b * b).order == 7


def test_charpoly_and_cayley_hamilton():
    M = IntMatrix(((2, 1, 0), (0, 2, 0), (1, 0, 3)))
    p = charpoly(M)
    assert p.LC == 1 and total_degree(p) == 3
    acc = IntMatrix(((0, 0, 0),) * 3)
    for (e,), c in p.items():
        acc = acc + matrix_power(M, e).scale(int(c))
    assert acc.rows == ((0, 0, 0),) * 3
    with pytest.raises(NonSquareError):
        charpoly(IntMatrix(((1, 2),)))


def test_charpoly_identity():
    p = charpoly(IntMatrix.identity(2))
    x = p.ring.gens[0]
    assert p == (x - 1) ** 2


def test_largest_real_root():
    x = poly_ring(("x",), QQ).gens[0]
    root = largest_real_root(x - 16)
    assert root.exact and root.value == 16
    silver = largest_real_root(x ** 2 - 34 * x + 1, QQ(1, 10 ** 10))
    assert not silver.exact
    assert abs(silver.as_float() - 33.97056274847714) < 1e-8
    assert silver.hi - silver.lo <= QQ(1, 10 ** 10)
    assert abs(largest_real_root(x ** 2 - 2).as_float() - 1.41421356237) < 1e-9
    assert not largest_real_root(x ** 2 + 1).found


def test_largest_root_with_repeated_factor():
    x = poly_ring(("x",), QQ).gens[0]
    root = largest_real_root((x - 1) ** 3 * (2 * x - 3))
    assert root.exact and root.value == QQ(3, 2)


def test_jordan_profile():
    J = IntMatrix(((1, 1, 0, 0), (0, 1, 1, 0), (0, 0, 1, 0), (0, 0, 0, 2)))
    profile = jordan_profile(J, 1)
    assert profile.ranks == (3, 2, 1, 1)
    assert profile.largest_block == 3
    assert jordan_profile(IntMatrix.identity(3), 1).largest_block == 1
    assert jordan_profile(IntMatrix.identity(3), 5).largest_block == 0


def test_matrix_rank():
    assert matrix_rank(IntMatrix(((1, 2), (2, 4)))) == 1


def test_permutation_matrix():
    M = permutation_matrix([1, 2, 0])
    assert M.rows == ((0, 0, 1), (1, 0, 0), (0, 1, 0))
    assert matrix_power(M, 3).rows == IntMatrix.identity(3).rows
    with pytest.raises(DimensionMismatchError):
        permutation_matrix([0, 0])


def test_reduce_mod_p():
    f = reduce_mod_p(P("3*x^2 - 7*y*z"), 5)
    assert evaluate_at(f, (1, 1, 1)) == prime_field(5)(1)
    assert ratio_mod_p(QQ(1, 2), 7) == 4
    with pytest.raises(BadPrimeError):
        ratio_mod_p(QQ(1, 7), 7)


def test_modp_dense_helpers():
    p = 2147483647
    a = np.array([p - 1, 1], dtype=np.int64)          # x - 1
    b = np.array([1, 1], dtype=np.int64)              # x + 1
    prod = modp_mul(a, b, p)
    assert prod.tolist() == [p - 1, 0, 1]
    assert modp_gcd(prod, modp_mul(a, a, p), p).tolist() == [p - 1, 1]


if __name__ == "__main__":
    print("=" * 60)
    print("🧪 Тесты exact_algebra")
    print("=" * 60)
    tests = [obj for name, obj in sorted(globals().items()) if name.startswith("test_")]
    for test in tests:
        test()
        print(f"✅ {test.__name__}")
    print(f"\n🎯 Пройдено {len(tests)} тестов")
