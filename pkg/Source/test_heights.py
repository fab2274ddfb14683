"""
Тесты высот и орбит.
"""

import sys
from pathlib import Path

import mpmath
import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from errors import RetryLimitError
from fixtures import default_catalog
from heights import (
    CSV_COLUMNS,
    DEFAULT_SEEDS,
    choose_seed,
    coefficient_bound,
    digit_count,
    height_bound_holds,
    log_height,
    orbit_heights,
)
from ratmap import ProjPoint, evaluate, identity_map


def test_log_height():
    assert log_height(ProjPoint((1, 1, 1))) == 0
    with mpmath.workdps(64):
        assert log_height(ProjPoint((3, 6, 9))) == mpmath.log(3)
    assert log_height(ProjPoint((2, 4, 10))) == log_height(ProjPoint((-1, -2, -5)))
    assert log_height(ProjPoint((1, 2, 5))) >= 0


def test_digit_count():
    assert digit_count(0) == 1
    assert digit_count(-999) == 3
    assert digit_count(10 ** 5000) == 5001


def test_coefficient_bound_of_phi():
    Phi = default_catalog().get("Phi")
    assert coefficient_bound(Phi) == 32
    P = ProjPoint((1, 2, 5))
    assert height_bound_holds(Phi, P)
    image = evaluate(Phi, P)
    with mpmath.workdps(64):
        assert log_height(image) <= 5 * log_height(P) + mpmath.log(32)


def test_identity_orbit_has_unit_ratios():
    record = orbit_heights(identity_map(), ProjPoint((2, 3, 7)), 4)
    assert len(record.steps) == 5
    assert all(r == 1 for r in record.ratios())
    assert record.indeterminate_at is None


def test_orbit_stops_at_indeterminate_point():
    Phi = default_catalog().get("Phi")
    record = orbit_heights(Phi, ProjPoint((0, 0, 1)), 3)
    assert record.indeterminate_at == 1
    assert record.indeterminate_point == ProjPoint((0, 0, 1))
    assert len(record.steps) == 1
    assert record.to_dict()["indeterminate_point"] == [0, 0, 1]


def test_csv_layout():
    record = orbit_heights(identity_map(), ProjPoint((1, 1, 1)), 2)
    lines = record.to_csv().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[1].startswith("0,")
    assert lines[1].endswith(",")
    assert len(lines) == 3


def test_choose_seed_avoids_base_points():
    catalog = default_catalog()
    Phi = catalog.get("Phi")
    base = [ProjPoint(tuple(p)) for p in catalog.definition("Phi").base_points]
    seed = choose_seed(Phi, base, np.random.default_rng(1))
    assert seed not in base
    assert seed == ProjPoint((1, 2, 5))
    every_seed = [ProjPoint(s) for s in DEFAULT_SEEDS]
    with pytest.raises(RetryLimitError):
        choose_seed(identity_map(), every_seed, attempts=0)


@pytest.mark.slow
def test_phi_heights_grow_slowly():
    Phi = default_catalog().get("Phi")
    record = orbit_heights(Phi, ProjPoint((1, 2, 5)), 8)
    assert record.indeterminate_at is None
    assert record.ratios()[-1] < 2


@pytest.mark.slow
def test_psi_phi_heights_grow_like_sixteen():
    PsiPhi = default_catalog().get("PsiPhi")
    record = orbit_heights(PsiPhi, ProjPoint((1, 2, 5)), 5)
    assert record.indeterminate_at is None
    ratios = record.ratios()
    assert 13 <= ratios[-1] <= 19


if __name__ == "__main__":
    print("=" * 60)
    print("🧪 Тесты heights")
    print("=" * 60)
    tests = [obj for name, obj in sorted(globals().items()) if name.startswith("test_")]
    for test in tests:
        test()
        print(f"✅ {test.__name__}")
    print(f"\n🎯 Пройдено {len(tests)} тестов")
