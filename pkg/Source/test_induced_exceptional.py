"""
Тесты индуцированных отображений E_q <-> E_𝔮 и сборки Phi, Psi.
"""

import sys
from pathlib import Path

import pytest
from sympy.polys.domains import QQ

sys.path.insert(0, str(Path(__file__).parent))

from errors import BidynError, NegativeValuationError
from fixtures import default_catalog
from induced_exceptional import (
    E_CONIC,
    E_POINT,
    ConicBlowupChart,
    ExceptionalMap,
    assemble_induced,
    compose_exceptional,
    conic_equation,
    derive_point_to_conic,
    inverse_of,
    pencil_center,
    proportional,
    rational_field,
)
from poly_parser import parse_poly
from ratmap import ProjPoint, evaluate, normalize


def P(text):
    return parse_poly(text, ("x", "y", "z"))


def zw():
    return rational_field(("z", "w")).gens


def test_chart_relations():
    chart = ConicBlowupChart()
    assert chart.alternate().orientation == "N/b"
    assert chart.alternate().alternate() == chart
    x, y, a, b = QQ(1), QQ(2), QQ(3), QQ(5)
    u, v, c, d, r, s = chart.from_ambient(x, y, a, b)
    assert r == b / conic_equation(x, y)
    assert chart.to_ambient(u, v, r, s) == (x, y, a, b)
    assert chart.on_exceptional(QQ(0), QQ(0), 0, 0, 0)
    assert not chart.on_exceptional(QQ(1), QQ(2), 0, 0, 0)
    assert not chart.on_exceptional(QQ(0), QQ(0), 0, 0, QQ(1))
    with pytest.raises(BidynError):
        ConicBlowupChart("r")
    with pytest.raises(BidynError):
        chart.from_ambient(QQ(0), QQ(0), QQ(1), QQ(1))


def test_phi_bar_closed_form():
    z, w = zw()
    m = derive_point_to_conic("phi")
    assert (m.source, m.target) == (E_POINT, E_CONIC)
    assert m.chart.orientation == "b/N"
    u, v, r = m.coords
    D = w ** 2 - 5 * z ** 2
    assert u == 8 * z ** 2 / D
    assert v == 8 * z * w / D
    assert r == D ** 2 / (8 * z * (D ** 2 - 16 * z ** 4))


def test_phi_bar_lands_on_conic():
    u, v, _ = derive_point_to_conic("phi").coords
    assert conic_equation(u, v) == 0
    values = derive_point_to_conic("phi").evaluate((3, 7))
    assert values is not None
    assert values[1] ** 2 == 5 * values[0] ** 2 + 8 * values[0]


def test_phi_bar_projectivization():
    conic_part, fiber_part = derive_point_to_conic("phi").projectivize()
    assert conic_part.coords == (P("8*x^2"), P("8*x*y"), P("y^2 - 5*x^2"))
    expected = normalize([P("25*x^4*z - 10*x^2*y^2*z + y^4*z"), P("72*x^5 - 80*x^3*y^2 + 8*x*y^4")])
    assert proportional(fiber_part, expected)


def test_phi_bar_inverse():
    F3 = rational_field(("u", "v", "r"))
    u, v, r = F3.gens
    inverse = inverse_of("phi")
    assert (inverse.source, inverse.target) == (E_CONIC, E_POINT)
    rho = (v ** 2 - 5 * u ** 2) ** 2 / (8 * (v ** 4 - 10 * u ** 2 * v ** 2 + 9 * u ** 4) * r)
    assert inverse.coords[0] == rho
    assert inverse.coords[1] == rho * v / u
    assert list(compose_exceptional(inverse, derive_point_to_conic("phi"))) == list(zw())


def test_pencil_centers():
    phi = derive_point_to_conic("phi")
    psi = derive_point_to_conic("psi")
    chi = derive_point_to_conic("chi")
    assert pencil_center(*phi.coords[:2]) == (0, 0)
    assert pencil_center(*psi.coords[:2]) == (0, 1)
    assert pencil_center(*chi.coords[:2]) == (0, -1)


def test_psi_bar_depends_on_slope_through_center():
    z, w = zw()
    u, v, _ = derive_point_to_conic("psi").coords
    D = (w - 1) ** 2 - 5 * z ** 2
    assert u == 8 * z ** 2 / D
    assert v == 8 * z * (w - 1) / D


def test_wrong_composition_is_rejected():
    phi = derive_point_to_conic("phi")
    with pytest.raises(BidynError):
        compose_exceptional(phi, phi)
    with pytest.raises(BidynError):
        ExceptionalMap("bad", E_POINT, E_CONIC, phi.coords[:2])
    with pytest.raises(BidynError):
        derive_point_to_conic("iota")


def test_fiber_coordinate_pole():
    from exact_algebra import PowerSeries
    d = PowerSeries.gen(6)
    N = d * d
    with pytest.raises(NegativeValuationError):
        ConicBlowupChart().fiber_coordinate(d, N)
    assert ConicBlowupChart("N/b").fiber_coordinate(d, N)[1] == 1


@pytest.mark.slow
def test_assembled_phi_matches_catalog():
    catalog = default_catalog()
    Phi = assemble_induced("Phi")
    assert Phi.degree == 5
    assert proportional(Phi, catalog.get("Phi"))
    assert proportional(assemble_induced("Psi"), catalog.get("Psi"))


@pytest.mark.slow
def test_assembled_inverses():
    catalog = default_catalog()
    assert proportional(assemble_induced("PhiInv"), catalog.get("PhiInv"))
    assert proportional(assemble_induced("PsiInv"), catalog.get("PsiInv"))


@pytest.mark.slow
def test_psi_phi_fixes_p_double_prime():
    PsiPhi = assemble_induced("PsiPhi")
    p2 = ProjPoint((0, -1, 1))
    assert evaluate(PsiPhi, p2) == p2
    assert evaluate(assemble_induced("Phi"), p2) == ProjPoint((0, -2, 1))


if __name__ == "__main__":
    print("=" * 60)
    print("🧪 Тесты induced_exceptional")
    print("=" * 60)
    tests = [obj for name, obj in sorted(globals().items()) if name.startswith("test_")]
    for test in tests:
        test()
        print(f"✅ {test.__name__}")
    print(f"\n🎯 Пройдено {len(tests)} тестов")
