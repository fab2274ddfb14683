"""
Тесты семейства инволюций: точки T, касательные данные, слои и флопы над q.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from errors import BidynError, NotOnCurveError, TwoTorsionError
from fixtures import default_catalog
from ratmap import ProjPoint, compose, evaluate, is_identity
from threefold_family import (
    MATRIX_NAMES,
    CurvePointT,
    Q_POINT,
    build_family,
    build_iota,
    fiber_models,
    is_two_torsion,
    named_matrix,
    negate,
    on_curve,
    q_fiber_curves,
    q_flop_difference,
    quartic_pair,
    random_good_point,
    reference_m_phi_fiber,
    reference_m_psi_fiber,
    tangency_multiplicity,
    tangent_points,
)

PRIME = 10007


def affine(P):
    x, y, z = P.coords
    inv = pow(z, -1, P.prime)
    return x * inv % P.prime, y * inv % P.prime


def test_points_of_t():
    assert on_curve(Q_POINT)
    assert on_curve(CurvePointT(2, 6))
    assert on_curve(CurvePointT(-2, 2))
    assert not on_curve(CurvePointT(1, 1))
    assert negate(CurvePointT(2, 6)) == CurvePointT(2, -6)
    assert CurvePointT(2, 6, PRIME).b == 6
    assert negate(CurvePointT(2, 6, PRIME)).b == PRIME - 6


def test_iota_q_matches_catalog():
    iota = build_iota(Q_POINT)
    assert iota.coords == default_catalog().get("iota_q").coords
    assert is_identity(compose(iota, iota))
    with pytest.raises(NotOnCurveError):
        build_iota(CurvePointT(1, 1))


def test_iota_t_is_involution():
    iota = build_iota(CurvePointT(2, 6))
    assert iota.degree == 3
    assert is_identity(compose(iota, iota))


def test_tangent_points_of_q():
    data = tangent_points(Q_POINT)
    assert data.complete
    assert [P.coords for P in data.points] == [(2, 2, -1), (2, -2, -1), (2, 6, 1), (2, -6, 1)]
    for line, P in zip(data.lines, data.points):
        assert tangency_multiplicity(line, P) == 2
    x = quartic_pair(Q_POINT).ring.gens[0]
    assert quartic_pair(Q_POINT) == (x ** 2 - 4) ** 2


def test_two_torsion_is_rejected():
    assert is_two_torsion(CurvePointT(-4, 0)) and is_two_torsion(CurvePointT(infinity=True))
    assert not is_two_torsion(Q_POINT)
    with pytest.raises(TwoTorsionError):
        tangent_points(CurvePointT(-1, 0))
    with pytest.raises(TwoTorsionError):
        tangent_points(CurvePointT(infinity=True))


def test_random_good_point_mod_p():
    t, data = random_good_point(np.random.default_rng(3), prime=PRIME)
    assert on_curve(t) and t.b
    assert data.complete
    for line, P in zip(data.lines, data.points):
        x0, y0 = affine(P)
        assert on_curve(CurvePointT(x0, y0, PRIME))
        assert tangency_multiplicity(line, P) >= 2
        assert tangency_multiplicity(line, t.projective()) == 1
    quartic = quartic_pair(t)
    for P in tangent_points(negate(t)).points:
        assert not quartic(affine(P)[0])


def test_family_degrees():
    t, _ = random_good_point(np.random.default_rng(5), prime=PRIME)
    family = build_family(t)
    assert family.phi.degree == family.psi.degree == family.chi.degree == 3
    assert family.G.degree == 9
    assert family.get("G_t") is family.G


def test_degenerate_fiber_is_identity():
    assert is_identity(build_family(Q_POINT).F)


def test_iota_fixes_points_of_t():
    iota = build_iota(CurvePointT(2, 6))
    P = ProjPoint((-1, 0, 1))
    assert evaluate(iota, P) == P
    assert evaluate(iota, ProjPoint((-4, 0, 1))) == ProjPoint((-4, 0, 1))


@pytest.mark.slow
def test_fiber_actions_mod_p():
    t, data = random_good_point(np.random.default_rng(11), prime=PRIME)
    model = fiber_models(t, data)
    assert model.lattice.rank == 11
    assert model.phi_matrix().rows == reference_m_phi_fiber().rows
    assert model.psi_matrix().rows == reference_m_psi_fiber().rows


def test_named_matrices():
    product = named_matrix("psiphi-fiber", printed=True)
    assert product.matrix.rows == (reference_m_psi_fiber() @ reference_m_phi_fiber()).rows
    assert product.source == "printed"
    model = named_matrix("PsiPhi-model16", printed=True).matrix
    assert len(model.rows) == 16
    assert model.rows[0][0] == 21
    assert set(MATRIX_NAMES) >= {"Phi-model11", "phi-fiber", "psi-fiber"}
    with pytest.raises(BidynError):
        named_matrix("Phi-model12")


def test_named_curves_over_q():
    named = q_fiber_curves()
    assert set(named) == {"𝔮", "𝔩1", "𝔩2", "𝔩3", "𝔩4", "𝔟", "𝔟1", "𝔟2", "𝔟3", "𝔟4"}
    assert all(D.square() == -2 for D in named.values())
    L = named["𝔮"].lattice
    assert named["𝔮"] == L.combination({"h": 2, "b": -1, "b1": -1, "b2": -1, "b3": -1, "b4": -1, "c": -1})
    assert named["𝔩1"] == L.combination({"h": 1, "b": -1, "b1": -1, "c1": -1})
    assert named["𝔟"] == L.combination({"b": 1, "c": -1})


@pytest.mark.slow
def test_flop_difference_over_q():
    result = q_flop_difference("h")
    assert result.exact
    assert result.decomposition == {
        "𝔮": 2, "𝔩1": 1, "𝔩2": 1, "𝔩3": 1, "𝔩4": 1,
        "𝔟": 4, "𝔟1": 2, "𝔟2": 2, "𝔟3": 2, "𝔟4": 2,
    }
    L = result.pulled.lattice
    assert result.pulled == L.combination({
        "h": 9, "b": -2, "b1": -1, "b2": -1, "b3": -1, "b4": -1,
        "c": -6, "c1": -3, "c2": -3, "c3": -3, "c4": -3,
    })


if __name__ == "__main__":
    print("=" * 60)
    print("🧪 Тесты threefold_family")
    print("=" * 60)
    tests = [obj for name, obj in sorted(globals().items()) if name.startswith("test_")]
    for test in tests:
        test()
        print(f"✅ {test.__name__}")
    print(f"\n🎯 Пройдено {len(tests)} тестов")
