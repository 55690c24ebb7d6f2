"""The twelve acceptance criteria, each at its stated tolerance.

conftest.py prints one PASS/FAIL line per criterion at the end of the run.
"""

import time

import pytest

from schottkykit import suites
from schottkykit.cli import SuiteConfig, cmd_verify

P40 = {"precision": 40, "guard": 10}
TOL = 1e-30


def check(record_property, res, **extra):
    record_property("value", res["value"])
    for k, v in extra.items():
        record_property(k, v)
    assert res["pass"], res


@pytest.fixture(scope="module")
def deep_poincare():
    t0 = time.perf_counter()
    rep = cmd_verify(SuiteConfig(suite="poincare", deep=True))
    return {c["name"]: c for c in rep.checks}, time.perf_counter() - t0


def test_criterion_01_eigenstructure(record_property):
    t0 = time.perf_counter()
    for g in (1, 2, 3):
        check(record_property, suites.check_eigenstructure(g))
    t4 = time.perf_counter()
    check(record_property, suites.check_eigenstructure(4))
    dt = time.perf_counter() - t4
    record_property("seconds_g4", round(dt, 2))
    record_property("seconds", round(time.perf_counter() - t0, 2))
    assert dt < 60


def test_criterion_02_doubling(record_property):
    check(record_property, suites.check_doubling_x2())
    for g in (2, 3, 4):
        check(record_property, suites.check_lift_variants(g))


def test_criterion_03_identity_vanishing(record_property):
    t0 = time.perf_counter()
    worst = []
    for g in (3, 4, 5):
        res = suites.check_r_identities(g, seed=g, tolerance=TOL, count=10, **P40)
        worst.append(res["value"])
        assert res["pass"], res
    for g in (2, 3):
        res = suites.check_riemann(g, seed=10 + g, tolerance=TOL, count=50, **P40)
        worst.append(res["value"])
        assert res["pass"], res
    dt = time.perf_counter() - t0
    record_property("value", ", ".join(worst))
    record_property("seconds", round(dt, 2))
    assert dt < 300


def test_criterion_04_negative_control(record_property):
    check(record_property, suites.check_negative_control(3, seed=4, count=10, **P40))


def test_criterion_05_genus1(record_property):
    check(record_property, suites.check_genus1(seed=5, count=10, **P40))


VANISHING_CASES = {
    "no_11_columns": "theta is even in tau_jk there, so the central difference is exactly 0 and the ratio is 0/0",
    "four_11_columns": "theta vanishes identically along the line, residuals are rounding noise",
}


@pytest.mark.parametrize(
    "case",
    [
        pytest.param(c, marks=pytest.mark.xfail(strict=True, reason=VANISHING_CASES[c]))
        if c in VANISHING_CASES else c
        for c in suites.HEAT_CASES
    ],
)
def test_criterion_06_expansion(record_property, case):
    check(record_property, suites.check_heat_equation(case, seed=6, **P40), case=case)


def test_criterion_07_lemma(record_property):
    for g in (4, 5, 6):
        check(record_property, suites.check_lemma(g))


def test_criterion_08_branch_invariance(record_property):
    for g in (4, 5):
        check(record_property, suites.check_branch_invariance(g, seed=8, tolerance=TOL, count=3, **P40))


def test_criterion_09_dual_path(record_property):
    check(record_property, suites.check_dual_path(seed=9, tolerance=TOL, count=5, **P40))


@pytest.mark.slow
def test_criterion_10_poincare_scaling(record_property, deep_poincare):
    checks, seconds = deep_poincare
    parts = []
    for name in ("poincare/slope/g4", "poincare/ratio/g4", "poincare/slope/g5"):
        c = checks[name]
        parts.append(f"{name.split('/', 1)[1]}={c['value']}")
        assert c["pass"], c
    assert checks["poincare/slope/g5"]["tolerance"] == "64 +- 0.5"
    record_property("value", ", ".join(parts))
    record_property("seconds", round(seconds, 1))
    assert seconds < 600


@pytest.mark.slow
def test_criterion_11_independence(record_property, deep_poincare):
    checks, _ = deep_poincare
    parts = []
    for g in range(4, 9):
        c = checks[f"poincare/rank/g{g}"]
        parts.append(f"g{g}:{c['value']}")
        assert c["pass"], c
    c = checks["poincare/s_jacobian/g5"]
    parts.append(f"smin_g5={c['value']}")
    record_property("value", ", ".join(parts))
    assert c["pass"], c


def test_criterion_12_diagonal_vanishing(record_property):
    for g in (4, 5):
        check(record_property, suites.check_diagonal_vanishing(g, seed=12, count=5, **P40))
