"""
Тесты командной строки: аргументы, коды выхода, JSON, CSV и SVG.
"""

import contextlib
import io
import json
import sys
from pathlib import Path

import pytest
from pydantic import ValidationError

sys.path.insert(0, str(Path(__file__).parent))

from cli import EXIT_OK, EXIT_USAGE, CommandArgs, run


def call(*argv):
    """Код выхода и stdout подкоманды."""
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        code = run(list(argv))
    return code, out.getvalue()


def call_json(*argv):
    code, text = call(*argv)
    assert code == EXIT_OK, text
    return json.loads(text)


def test_args_are_validated():
    args = CommandArgs(command="orbit-heights", map_name="Phi", point="1, 2, 5")
    assert args.point == (1, 2, 5)
    with pytest.raises(ValidationError):
        CommandArgs(command="orbit-heights", map_name="Phi", point="0,0,0")
    with pytest.raises(ValidationError):
        CommandArgs(command="degree-seq")
    with pytest.raises(ValidationError):
        CommandArgs(command="degree-seq", map_name="Phi", format="csv")
    with pytest.raises(ValidationError):
        CommandArgs(command="degree-seq", map_name="Phi", prime=12)
    with pytest.raises(ValidationError):
        CommandArgs(command="verify-paper", checks=(13,))
    assert CommandArgs(command="verify-paper", checks=(4, 2, 4)).checks == (2, 4)


def test_degree_sequence_of_identity():
    data = call_json("degree-seq", "--map", "identity", "-n", "5", "--quiet")
    assert data["degrees"] == [1, 1, 1, 1, 1]
    assert data["method"] == "exact"


def test_output_is_deterministic():
    argv = ("degree-seq", "--map", "Phi", "-n", "2", "--method", "modp", "--seed", "3", "--quiet")
    first, second = call(*argv), call(*argv)
    assert first == second
    assert json.loads(first[1])["degrees"] == [5, 17]


def test_usage_errors():
    assert call("nonsense")[0] == EXIT_USAGE
    assert call("degree-seq", "--quiet")[0] == EXIT_USAGE
    assert call("degree-seq", "--map", "Phi", "--method", "guess", "--quiet")[0] == EXIT_USAGE
    assert call("degree-seq", "--map", "Phi", "--prime", "12", "--quiet")[0] == EXIT_USAGE
    assert call("degree-seq", "--map", "nothing", "--quiet")[0] == EXIT_USAGE
    assert call("spectral", "--map", "Phi", "--quiet")[0] == EXIT_USAGE
    assert call("induced", "--map", "Phi", "--kind", "point", "--quiet")[0] == EXIT_USAGE


def test_map_from_file(tmp_path):
    path = tmp_path / "square.json"
    path.write_text(json.dumps({"name": "square", "variables": ["x", "y", "z"],
                                "coords": ["x^2", "y^2", "z^2"]}), encoding="utf-8")
    data = call_json("degree-seq", "--file", str(path), "-n", "3", "--quiet")
    assert data["map"] == "square"
    assert data["degrees"] == [2, 4, 8]
    path.write_text(json.dumps({"name": "typo", "variables": ["x", "y", "z"],
                                "coords": ["x", "y^", "z"]}), encoding="utf-8")
    assert call("degree-seq", "--file", str(path), "--quiet")[0] == EXIT_USAGE


def test_spectral_radius_of_printed_product():
    data = call_json("spectral", "--map", "PsiPhi-model16", "--printed", "--quiet")
    assert data["spectral_radius"] == "16"
    assert data["exact"] is True
    fiber = call_json("spectral", "--map", "psiphi-fiber", "--printed", "--quiet")
    assert fiber["growth"]["kind"] == "polynomial"
    assert fiber["growth"]["degree"] == 2


def test_jordan_block():
    data = call_json("jordan", "--map", "psiphi-fiber", "--printed", "--quiet")
    assert data["largest_block"] == 3
    assert data["eigenvalue"] == 1


def test_matrix_csv(tmp_path):
    out = tmp_path / "m.csv"
    data = call_json("matrix", "--map", "Phi-model11", "--printed", "--format", "csv", "--out", str(out), "--quiet")
    assert data["rows"][0] == [5, 4, 0, 0, 0, 0, 0, 1, 1, 1, 1]
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0].split(",")[:3] == ["row", "h", "e_p"]
    assert len(lines) == 12


def test_indeterminacy_of_phi():
    data = call_json("indet", "--map", "Phi", "--lines", "5", "--quiet")
    assert [0, 0, 1] in data["indeterminate"]
    assert len(data["indeterminate"]) == 5
    assert data["complete"]


def test_contractions():
    data = call_json("contract", "--map", "iota_q", "--curve", "y^2 - 5*x^2 - 8*x*z",
                     "--base", "0,0,1", "--quiet")
    assert data["contracted"]
    assert data["image"] == [0, 0, 1]
    curve = call_json("contract", "--map", "PhiInv", "--point", "0,0,1", "--quiet")
    assert curve["degree"] == 4
    assert call("contract", "--map", "Phi", "--quiet")[0] == EXIT_USAGE


def test_induced_maps():
    point = call_json("induced", "--map", "Phi", "--kind", "point", "--point", "1,1,0", "--quiet")
    assert point["kind"] == "direction"
    assert point["target"] == [1, 1, 0]
    line = call_json("induced", "--map", "ex-dilation", "--kind", "line", "--quiet")
    assert line["kind"] == "surface"
    assert len(line["chart"]) == 2
    swap = call_json("induced", "--map", "ex-swap", "--kind", "line", "--quiet")
    assert swap["kind"] == "curve"
    assert "chart" not in swap


def test_orbit_heights_csv_and_plot(tmp_path):
    out, plot = tmp_path / "h.csv", tmp_path / "h.svg"
    data = call_json("orbit-heights", "--map", "identity", "--point", "2,3,7", "-n", "3",
                     "--format", "csv", "--out", str(out), "--plot", str(plot), "--quiet")
    assert data["start"] == [2, 3, 7]
    assert out.read_text(encoding="utf-8").splitlines()[0] == "n,log_height,ratio"
    assert "<svg" in plot.read_text(encoding="utf-8")


def test_json_copy_to_file(tmp_path):
    out = tmp_path / "d.json"
    code, text = call("degree-seq", "--map", "identity", "-n", "2", "--out", str(out), "--quiet")
    assert code == EXIT_OK
    assert out.read_text(encoding="utf-8") == text


def test_verify_single_check():
    data = call_json("verify-paper", "--check", "6", "--quiet")
    assert data["passed"]
    assert [c["status"] for c in data["checks"]] == ["PASS"]


if __name__ == "__main__":
    import tempfile
    print("=" * 60)
    print("🧪 Тесты cli")
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
