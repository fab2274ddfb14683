"""
Тесты рациональных отображений: точки, нормализация, композиция,
неопределённость, степени итераций, стягивания и индуцированные отображения.
"""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from errors import BidynError, IndeterminateError, InhomogeneousError, RetryLimitError, ZeroMapError
from exact_algebra import mult_at, poly_ring, total_degree
from fixtures import default_catalog
from poly_parser import parse_poly
from ratmap import (
    DegreeSequence,
    ProjPoint,
    compose,
    contracted_curve,
    contraction_analysis,
    degree_sequence,
    evaluate,
    identity_map,
    indeterminacy_check,
    induced_on_line_blowup,
    induced_on_point_blowup,
    is_identity,
    invariant_pencil_search,
    jacobian_direction_map,
    normalize,
    parametrize_conic,
    parametrize_line,
)


def P(text):
    return parse_poly(text, ("x", "y", "z"))


def catalog():
    return default_catalog()


def st():
    return poly_ring(("s", "t")).gens


def test_points_are_canonical():
    assert ProjPoint((-2, 1, 0)).coords == (2, -1, 0)
    assert ProjPoint((3, 6, 9)).coords == (1, 2, 3)
    assert ProjPoint((5, 10, 3), prime=7).coords == (1, 2, 2)
    with pytest.raises(ZeroMapError):
        ProjPoint((0, 0, 0))


def test_normalize_removes_common_factor_and_content():
    f = normalize([P("2*x^2"), P("2*x*y"), P("2*x*z")])
    assert f.coords == (P("x"), P("y"), P("z"))
    assert is_identity(f)
    g = normalize([P("-3*x"), P("6*y"), P("9*z")])
    assert g.coords == (P("x"), P("-2*y"), P("-3*z"))
    with pytest.raises(InhomogeneousError):
        normalize([P("x^2"), P("y"), P("z")])
    with pytest.raises(ZeroMapError):
        normalize([P("0"), P("0"), P("0")])


def test_involution_and_inverse_compose_to_identity():
    iota = catalog().get("iota_q")
    assert is_identity(compose(iota, iota))
    assert is_identity(compose(catalog().get("Phi"), catalog().get("PhiInv")))
    assert compose(catalog().get("Phi"), identity_map()).coords == catalog().get("Phi").coords


def test_evaluate_and_indeterminacy():
    Phi = catalog().get("Phi")
    assert evaluate(Phi, ProjPoint((0, -1, 1))) == ProjPoint((0, -2, 1))
    with pytest.raises(IndeterminateError) as e:
        evaluate(Phi, ProjPoint((1, 1, 0)))
    assert e.value.point == ProjPoint((1, 1, 0))


def test_indeterminacy_of_phi_is_complete():
    Phi = catalog().get("Phi")
    candidates = [ProjPoint(p) for p in [(0, 0, 1), (1, 1, 0), (1, -1, 0), (1, 3, 0), (1, -3, 0), (1, 2, 3)]]
    report = indeterminacy_check(Phi, candidates, lines=20)
    assert report.confirmed == candidates[:5]
    assert report.rejected == [ProjPoint((1, 2, 3))]
    assert report.complete
    assert report.to_dict()["probe"]["lines"] == 20


def test_inverse_base_points():
    PhiInv = catalog().get("PhiInv")
    report = indeterminacy_check(PhiInv, [ProjPoint((0, 1, 1))], lines=5)
    assert report.confirmed == [ProjPoint((0, 1, 1))]
    PsiInv = catalog().get("PsiInv")
    assert indeterminacy_check(PsiInv, [ProjPoint((0, -1, 1))], lines=5).confirmed


def test_degree_sequences():
    assert degree_sequence(identity_map(), 5).values == (1, 1, 1, 1, 1)
    Phi = catalog().get("Phi")
    exact = degree_sequence(Phi, 2)
    assert exact.values == (5, 17)
    assert exact.is_submultiplicative()
    line = degree_sequence(Phi, 2, method="line")
    assert line.values == exact.values
    modp = degree_sequence(Phi, 2, method="modp", seed=3)
    assert modp.values == exact.values
    assert len(modp.primes) == 2
    with pytest.raises(BidynError):
        DegreeSequence((0,), ("exact",))
    with pytest.raises(BidynError):
        degree_sequence(Phi, 2, method="guess")


def test_iota_q_contracts_the_conic():
    conic = P("y^2 - 5*x^2 - 8*x*z")
    curve = parametrize_conic(conic, (0, 0, 1))
    result = contraction_analysis(catalog().get("iota_q"), curve)
    assert result.contracted
    assert result.image == ProjPoint((0, 0, 1))



def test_single_defined_image_is_not_a_contraction():
    line = parametrize_line(P("x + 2*y - 3*z"))
    with pytest.raises(RetryLimitError):
        contraction_analysis(catalog().get("Phi"), line, samples=1)

def test_phi_moves_a_generic_line():
    line = parametrize_line(P("x + 2*y - 3*z"))
    assert not contraction_analysis(catalog().get("Phi"), line).contracted


def test_curve_contracted_by_phi_inverse():
    curve = contracted_curve(catalog().get("PhiInv"), ProjPoint((0, 0, 1)))
    assert total_degree(curve) == 4
    assert mult_at(curve, (0, 1, 1)) == 3


def test_restrictions_to_exceptional_lines():
    s, t = st()
    Phi = induced_on_point_blowup(catalog().get("Phi"), ProjPoint((1, 1, 0)))
    assert Phi.kind == "direction"
    assert Phi.target == ProjPoint((1, 1, 0))
    assert Phi.direction == (2 * s, 2 * t - s)
    Psi = induced_on_point_blowup(catalog().get("Psi"), ProjPoint((1, 1, 0)))
    assert Psi.direction == (2 * s, 2 * t + s)
    assert Psi.apply(Phi.apply((3, 5))) == (12, 20)


def test_jacobian_matches_blowup_at_regular_point():
    Phi = catalog().get("Phi")
    x = ProjPoint((1, 2, 3))
    assert jacobian_direction_map(Phi, x).direction == induced_on_point_blowup(Phi, x).direction


def test_line_blowups():
    R4 = poly_ring(("u", "v", "s", "t"))
    u, v, s, t = R4.gens
    dilation = induced_on_line_blowup(catalog().get("ex-dilation"))
    assert dilation.kind == "surface"
    assert dilation.uv == (2 * u, v)
    assert dilation.st == (s, t)
    assert induced_on_line_blowup(catalog().get("ex-swap")).kind == "curve"


def test_invariant_pencil_search():
    x, y, z = poly_ring(("x", "y", "z")).gens
    # коники, касающиеся x = 0 в [0,0,1] и z = 0 в [1,0,0]: пучок xz, y^2
    tangencies = [(ProjPoint((0, 0, 1)), x), (ProjPoint((1, 0, 0)), z)]
    scaling = invariant_pencil_search(normalize([2 * x, y, z]), 2, [], tangencies)
    assert scaling.dimension == 2
    assert scaling.invariant is True
    swap = invariant_pencil_search(normalize([y, x, z]), 2, [], tangencies)
    assert swap.invariant is False
    lines = invariant_pencil_search(identity_map(), 1, [], [])
    assert lines.dimension == 3 and lines.invariant is None

if __name__ == "__main__":
    print("=" * 60)
    print("🧪 Тесты ratmap")
    print("=" * 60)
    tests = [obj for name, obj in sorted(globals().items()) if name.startswith("test_")]
    for test in tests:
        test()
        print(f"✅ {test.__name__}")
    print(f"\n🎯 Пройдено {len(tests)} тестов")
