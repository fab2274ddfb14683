"""
Тесты набора проверок воспроизведения.
"""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import verify
from errors import BidynError
from settings import load_settings
from verify import CHECKS, CheckResult, SuiteContext, SuiteReport, run_check, run_suite


def context(seed=7):
    return SuiteContext(seed, 0.05, False, load_settings())


def test_check_result_collects_failures():
    r = CheckResult(1, "пример")
    r.expect(True, "не попадёт")
    assert r.passed and r.status == "PASS"
    r.expect(False, "нарушение")
    assert r.status == "FAIL"
    assert r.to_dict()["failures"] == ["нарушение"]


def test_report_lists_failures():
    good, bad = CheckResult(1, "a"), CheckResult(2, "b", ["x"])
    report = SuiteReport(7, [good, bad])
    assert not report.passed
    assert report.to_dict()["failures"] == [{"check": 2, "failures": ["x"]}]
    assert SuiteReport(7, [good]).passed


def test_errors_inside_a_check_are_failures():
    def broken(ctx, r):
        raise BidynError("сломано")

    CHECKS[99] = ("сломанная", broken)
    try:
        result = run_check(99, context())
    finally:
        del CHECKS[99]
    assert not result.passed
    assert "сломано" in result.failures[0]


def test_spectral_check():
    report = run_suite([6])
    assert report.passed
    assert report.checks[0].details["PsiPhi-model16"]["rate"] == "16"


def test_restriction_check():
    assert run_suite([4]).passed


def test_warmup_examples():
    report = run_suite([11])
    assert report.passed
    assert set(report.checks[0].details) == {"ex-dilation", "ex-bending", "ex-reflection", "ex-henon"}


def test_constants():
    assert verify.ALL_CHECKS == tuple(sorted(CHECKS))
    assert verify.FAMILY_RATE == pytest.approx(33.9706, abs=1e-4)
    assert sum(verify.FLOP_DIFFERENCE.values()) == 2 + 4 + 4 + 8


def test_height_ratio_trend():
    assert verify.ratio_trend([18.0, 16.4, 16.02], verify.HEIGHT_RATE)
    assert verify.ratio_trend([14.0, 15.5, 15.9], verify.HEIGHT_RATE)
    assert not verify.ratio_trend([16.1, 16.9, 17.5], verify.HEIGHT_RATE)
    assert not verify.ratio_trend([15.9, 14.0], verify.HEIGHT_RATE)
    assert verify.ratio_trend([], verify.HEIGHT_RATE)


@pytest.mark.slow
def test_involution_and_indeterminacy_checks():
    report = run_suite([1, 3])
    assert report.passed, report.to_dict()["failures"]


@pytest.mark.slow
def test_height_check():
    report = run_suite([10])
    assert report.passed, report.checks[0].failures


@pytest.mark.slow
def test_flop_difference_check():
    assert run_suite([8]).passed


@pytest.mark.slow
def test_family_check():
    report = run_suite([12])
    assert report.passed
    rows = report.checks[0].details["F_t"]
    assert len(rows) == 3
    assert all(len(row["degrees"]) == 2 for row in rows)


if __name__ == "__main__":
    print("=" * 60)
    print("🧪 Тесты verify")
    print("=" * 60)
    tests = [obj for name, obj in sorted(globals().items()) if name.startswith("test_")]
    for test in tests:
        test()
        print(f"✅ {test.__name__}")
    print(f"\n🎯 Пройдено {len(tests)} тестов")
