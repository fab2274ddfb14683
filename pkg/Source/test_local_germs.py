"""
Тесты значений поднятых отображений в точках моделей раздутия.
"""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from errors import BidynError, IndeterminateError
from fixtures import default_catalog
from local_germs import (
    ModelPoint,
    evaluate_on_model,
    exceptional_image,
    model_point,
    points_on_exceptional,
)
from ns_lattice import BlowupConfig
from ratmap import ProjPoint, evaluate, identity_map
from threefold_family import eleven_center_model, sixteen_center_model


def Phi():
    return default_catalog().get("Phi")


def test_model_point_depth():
    assert model_point((0, 0, 1)).depth == 0
    assert model_point((1, 1, 0), (1, 0)).depth == 1
    x = model_point((1, 1, 0), (-2, 1), (1, 5))
    assert x.depth == 2
    assert str(x) == "[1,1,0]@[2,-1]@[1,5]"
    assert x.to_dict()["second"] == [1, 5]


def test_identity_reads_back_points():
    cfg = sixteen_center_model()
    f = identity_map()
    for x in [
        model_point((1, 2, 3)),
        model_point((0, 0, 1), (3, 1)),
        model_point((1, 1, 0), (-2, 1), (1, 5)),
        model_point((1, 1, 0), (2, 1), (2, -3)),
    ]:
        assert evaluate_on_model(f, cfg, x) == x


def test_ordinary_point_matches_evaluate():
    cfg = eleven_center_model()
    P = ProjPoint((1, 2, 3))
    assert evaluate_on_model(Phi(), cfg, ModelPoint(P)) == ModelPoint(evaluate(Phi(), P))


def test_depth_must_match_model():
    cfg = eleven_center_model()
    with pytest.raises(BidynError):
        evaluate_on_model(Phi(), cfg, model_point((0, 0, 1)))
    with pytest.raises(BidynError):
        evaluate_on_model(Phi(), cfg, model_point((1, 2, 3), (1, 0)))
    with pytest.raises(BidynError):
        evaluate_on_model(Phi(), cfg, model_point((1, 1, 0), (-2, 1)))


def test_base_point_of_bare_plane_is_indeterminate():
    bare = BlowupConfig((), "P2")
    with pytest.raises(IndeterminateError):
        evaluate_on_model(Phi(), bare, model_point((0, 0, 1)), germs=4)


def test_phi_contracts_psi_centers():
    cfg = sixteen_center_model()
    img = exceptional_image(Phi(), cfg, "p''")
    assert img.kind == "point"
    assert img.image == model_point((0, -2, 1))
    img = exceptional_image(Phi(), cfg, "p1''")
    assert img.kind == "point"
    assert img.image == model_point((1, 1, 0), (1, 0))


def test_phi_moves_first_round_curve():
    cfg = eleven_center_model()
    img = exceptional_image(Phi(), cfg, "p1")
    assert img.kind == "curve"


def test_points_on_exceptional_avoid_children():
    import numpy as np
    cfg = eleven_center_model()
    center = cfg.center("p1")
    points = points_on_exceptional(cfg, center, 5, np.random.default_rng(1))
    assert len(points) == 5
    assert all(cfg.child_at(center, x.direction) is None for x in points)


if __name__ == "__main__":
    print("=" * 60)
    print("🧪 Тесты local_germs")
    print("=" * 60)
    tests = [obj for name, obj in sorted(globals().items()) if name.startswith("test_")]
    for test in tests:
        test()
        print(f"✅ {test.__name__}")
    print(f"\n🎯 Пройдено {len(tests)} тестов")
