"""
Тесты решёток N^1, прямых образов, роста, устойчивости и флопов.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from errors import BidynError, LatticeMismatchError
from exact_algebra import IntMatrix, charpoly, is_form_preserving, matrix_det, permutation_matrix
from fixtures import default_catalog
from ns_lattice import (
    BlowupConfig,
    FlopStep,
    Lattice,
    curve_class,
    decompose,
    exceptional_class,
    flop_multiplicity,
    flop_transfer,
    growth_class,
    model_contractions,
    model_permutation,
    position_identification,
    product_action,
    pushforward_matrix,
    stability_check,
    strict_to_total,
    total_to_strict,
)
from poly_parser import parse_poly
from ratmap import ProjPoint
from local_germs import ModelPoint
from threefold_family import (
    GROUPED_16_ORDER,
    eleven_center_model,
    q_fiber_config,
    q_fiber_lattice,
    reference_m11,
    reference_m_phi16,
    reference_m_phi_fiber,
    reference_m_psi16,
    reference_m_psi_fiber,
    sixteen_center_model,
)


def P(text):
    return parse_poly(text, ("x", "y", "z"))


def test_config_requires_parent_first():
    with pytest.raises(BidynError):
        BlowupConfig.build([("p1'", "p1", "2*x - 2*y + z"), ("p1", (1, 1, 0))])
    with pytest.raises(BidynError):
        BlowupConfig.build([("p", (0, 0, 1)), ("q", (0, 0, 2))])


def test_strict_and_total_forms():
    cfg = eleven_center_model()
    strict = Lattice.plane(cfg)
    total = Lattice.plane(cfg, kind="total")
    assert strict.rank == total.rank == 11
    h = strict.basis("h")
    assert h.square() == 1
    assert strict.basis("e_p1").square() == -2
    assert strict.basis("e_p1").intersect(strict.basis("e_p1'")) == 1
    assert total.basis("e_p1").square() == -1
    assert strict.signature() == (1, 10)
    S, T = total_to_strict(cfg, strict), strict_to_total(cfg, strict)
    assert (S @ T).rows == IntMatrix.identity(11).rows


def test_conic_through_five_points():
    cfg = eleven_center_model()
    total = Lattice.plane(cfg, kind="total")
    D = total.combination({"h": 2, "e_p": -1, "e_p1": -1, "e_p2": -1, "e_p3": -1, "e_p4": -1})
    assert D.square() == -1
    assert str(total.combination({"h": 5, "e_p'": -4})) == "5h - 4e_p'"


def test_curve_classes():
    cfg = eleven_center_model()
    total = Lattice.plane(cfg, kind="total")
    strict = Lattice.plane(cfg)
    line = curve_class(P("x - y"), cfg, total)
    assert line == total.combination({"h": 1, "e_p": -1, "e_p1": -1})
    assert line.square() == -1
    tangent = curve_class(P("2*x - 2*y + z"), cfg, strict)
    assert tangent == strict.combination({"h": 1, "e_p1": -1, "e_p1'": -2})
    assert tangent.square() == -1
    assert exceptional_class(cfg, total, "p1") == total.combination({"e_p1": 1, "e_p1'": -1})


def test_classes_of_different_models_do_not_mix():
    a = Lattice.plane(eleven_center_model())
    b = Lattice.plane(sixteen_center_model())
    with pytest.raises(LatticeMismatchError):
        a.basis("h").intersect(b.basis("h"))


def test_reference_m11_is_isometry():
    M = reference_m11()
    gram = Lattice.plane(eleven_center_model()).gram
    assert is_form_preserving(M, gram)
    assert abs(matrix_det(M)) == 1


@pytest.mark.slow
def test_pushforward_of_phi_on_eleven_centers():
    catalog = default_catalog()
    cfg = eleven_center_model()
    M = pushforward_matrix(catalog.get("Phi"), catalog.get("PhiInv"), cfg)
    assert M.rows == reference_m11().rows
    Minv = pushforward_matrix(catalog.get("PhiInv"), catalog.get("Phi"), cfg)
    assert (M @ Minv).rows == IntMatrix.identity(11).rows


def test_growth_classes():
    assert growth_class(IntMatrix.identity(4)).kind == "bounded"
    fiber = growth_class(reference_m_psi_fiber() @ reference_m_phi_fiber())
    assert fiber.kind == "polynomial"
    assert fiber.degree == 2
    action = product_action([reference_m_psi16(), reference_m_phi16()])
    assert not action.certified
    g = growth_class(action.matrix)
    assert g.kind == "exponential"
    assert g.rate_float == pytest.approx(16.0, rel=1e-9)


def test_growth_of_singular_matrices():
    shear = growth_class(IntMatrix(((1, 1, 0), (0, 1, 0), (0, 0, 0))))
    assert shear.kind == "polynomial" and shear.degree == 1
    assert shear.zero_roots == 1
    assert growth_class(IntMatrix(((1, 0), (0, 0)))).kind == "bounded"
    assert growth_class(IntMatrix(((0, 0, 0),) * 3)).kind == "bounded"
    # нильпотентная клетка рядом с клеткой 3 в 1
    mixed = IntMatrix(((1, 1, 0, 0, 0), (0, 1, 1, 0, 0), (0, 0, 1, 0, 0), (0, 0, 0, 0, 1), (0, 0, 0, 0, 0)))
    assert growth_class(mixed).to_dict() == {"kind": "polynomial", "degree": 2,
                                             "cyclotomic_factors": [1, 1, 1], "zero_roots": 2}
    rotation = growth_class(IntMatrix(((0, -1, 0), (1, 0, 0), (0, 0, 0))))
    assert rotation.kind == "bounded" and rotation.cyclotomic == (4,)


def test_phi_on_sixteen_centers_is_not_an_isometry():
    gram = Lattice.plane(sixteen_center_model()).gram
    assert not is_form_preserving(reference_m_phi16(), gram)
    assert matrix_det(reference_m_phi16()) == 0


def test_growth_does_not_depend_on_basis_order():
    M = reference_m_psi16() @ reference_m_phi16()
    canonical = Lattice.plane(sixteen_center_model()).labels
    perm = model_permutation(GROUPED_16_ORDER, canonical)
    permuted = IntMatrix(tuple(tuple(M.rows[i][j] for j in perm) for i in perm))
    assert charpoly(permuted) == charpoly(M)
    assert growth_class(permuted).rate_float == pytest.approx(growth_class(M).rate_float)


def test_growth_is_invariant_under_random_permutations():
    samples = [reference_m_psi16() @ reference_m_phi16(),
               reference_m_psi_fiber() @ reference_m_phi_fiber(),
               IntMatrix(((1, 1, 0, 0), (0, 1, 0, 0), (0, 0, 0, 1), (0, 0, 0, 0)))]
    for seed in range(3):
        for M in samples:
            perm = [int(k) for k in np.random.default_rng(seed).permutation(M.nrows)]
            Pm = permutation_matrix(perm)
            conjugated = Pm.transpose() @ M @ Pm
            assert charpoly(conjugated) == charpoly(M)
            before, after = growth_class(M), growth_class(conjugated)
            assert (after.kind, after.degree) == (before.kind, before.degree)
            assert after.rate_float == pytest.approx(before.rate_float)


def test_bare_plane_phi_is_not_stable():
    catalog = default_catalog()
    Phi = catalog.get("Phi")
    bare = BlowupConfig((), "P2")
    base = [ModelPoint(ProjPoint(tuple(p))) for p in catalog.definition("Phi").base_points]
    report = stability_check(Phi, bare, [("x - y", ModelPoint(ProjPoint((1, 1, 0))))],
                             indeterminate=base, N=3)
    assert not report.stable
    assert report.violations[0].k == 1


@pytest.mark.slow
def test_psi_phi_stable_on_sixteen_centers():
    catalog = default_catalog()
    cfg = sixteen_center_model()
    certificate = model_contractions([catalog.get("Phi"), catalog.get("Psi")], cfg)
    assert certificate.certified
    action = product_action([reference_m_psi16(), reference_m_phi16()], certificate)
    assert action.certified and not action.warning


def test_flop_transfer_on_one_swap():
    src, tgt = q_fiber_config(), q_fiber_config([0])
    Ls, Lt = q_fiber_lattice(src), q_fiber_lattice(tgt)
    step = FlopStep("sigma", Ls, Lt, position_identification(src, tgt, Ls, Lt),
                    exceptional_class(src, Ls, "b"), exceptional_class(tgt, Lt, "c"))
    assert step.is_flop
    assert flop_transfer(Lt.basis("h"), step) == Ls.basis("h")
    assert flop_transfer(Lt.basis("c"), step) == Ls.basis("c")
    assert flop_transfer(Lt.basis("b"), step) == Ls.basis("b")
    assert flop_multiplicity(2, Lt.basis("h"), step) == 2
    assert flop_multiplicity(0, Lt.basis("c"), step) == -1


def test_flop_step_requires_minus_two_curves():
    cfg = q_fiber_config()
    L = q_fiber_lattice(cfg)
    with pytest.raises(BidynError):
        FlopStep("bad", L, L, IntMatrix.identity(L.rank), L.basis("b"), L.basis("b"))


def test_decompose():
    L = q_fiber_lattice(q_fiber_config())
    named = {"A": L.combination({"b": 1, "c": -1}), "B": L.combination({"h": 1, "b": -1})}
    D = L.combination({"h": 2, "b": 1, "c": -3})
    assert decompose(D, named) == {"A": 3, "B": 2}
    assert decompose(L.basis("c1"), named) is None


if __name__ == "__main__":
    print("=" * 60)
    print("🧪 Тесты ns_lattice")
    print("=" * 60)
    tests = [obj for name, obj in sorted(globals().items()) if name.startswith("test_")]
    for test in tests:
        test()
        print(f"✅ {test.__name__}")
    print(f"\n🎯 Пройдено {len(tests)} тестов")
