"""
Тесты каталога отображений и проверок заявленных данных.
"""

import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from errors import MapDefinitionError, ParseError
from fixtures import MapCatalog, MapDefinition, default_catalog
from poly_parser import render_poly


def write_map(directory, name, **body):
    data = {"name": name, "variables": ["x", "y", "z"], **body}
    (directory / f"{name}.json").write_text(json.dumps(data), encoding="utf-8")


def test_catalog_lists_fixtures():
    names = default_catalog().names()
    for name in ("Phi", "PhiInv", "Psi", "PsiInv", "PsiPhi", "phi", "psi", "chi", "iota_q", "identity"):
        assert name in names


def test_fixture_coordinates_round_trip():
    catalog = default_catalog()
    for name in ("Phi", "Psi", "phi", "chi"):
        definition = catalog.definition(name)
        f = catalog.get(name)
        rendered = [render_poly(c) for c in f.coords]
        assert MapDefinition(name=name, variables=definition.variables, coords=rendered).build_coords() == f


def test_composed_fixture_keeps_chain():
    PsiPhi = default_catalog().get("PsiPhi")
    assert [g.name for g in PsiPhi.chain] == ["Phi", "Psi"]


def test_unknown_map(tmp_path):
    with pytest.raises(MapDefinitionError) as e:
        MapCatalog(tmp_path).get("nothing")
    assert e.value.problems


def test_invalid_definitions(tmp_path):
    write_map(tmp_path, "both", coords=["x", "y", "z"], compose=["identity"])
    with pytest.raises(MapDefinitionError):
        MapCatalog(tmp_path).get("both")
    write_map(tmp_path, "short", coords=["x", "y"])
    with pytest.raises(MapDefinitionError):
        MapCatalog(tmp_path).get("short")
    (tmp_path / "broken.json").write_text("{\"name\": ", encoding="utf-8")
    with pytest.raises(ParseError):
        MapCatalog(tmp_path).get("broken")
    write_map(tmp_path, "typo", coords=["x", "y^", "z"])
    with pytest.raises(ParseError):
        MapCatalog(tmp_path).get("typo")


def test_declared_data_is_cross_checked(tmp_path):
    iota = default_catalog().definition("iota_q")
    write_map(tmp_path, "good", coords=iota.coords, inverse="good", base_points=[[0, 0, 1]])
    assert MapCatalog(tmp_path).get("good").degree == 3
    write_map(tmp_path, "bad", coords=iota.coords, base_points=[[1, 2, 3]],
              near=[{"parent": [0, 0, 1], "direction": "x - z"}])
    with pytest.raises(MapDefinitionError) as e:
        MapCatalog(tmp_path).get("bad")
    assert len(e.value.problems) == 3
    write_map(tmp_path, "square", coords=["x^2", "y^2", "z^2"], inverse="square")
    with pytest.raises(MapDefinitionError):
        MapCatalog(tmp_path).get("square")
    assert MapCatalog(tmp_path, check=False).get("square").degree == 2


if __name__ == "__main__":
    import tempfile
    print("=" * 60)
    print("🧪 Тесты fixtures")
    print("=" * 60)
    tests = [obj for name, obj in sorted(globals().items()) if name.startswith("test_")]
    for test in tests:
        if "tmp_path" in test.__code__.co_varnames[:test.__code__.co_argcount]:
            with tempfile.TemporaryDirectory() as d:
                test(Path(d))
        else:
            test()
        print(f"✅ {test.__name__}")
    print(f"\n🎯 Пройдено {len(tests)} тестов")
