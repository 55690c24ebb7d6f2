import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from schottkykit.poincare import (
    DegenerateDirectionError,
    PoincareQuadruple,
    PrecisionTooLowError,
    default_diagonal,
    independence_rank_poincare,
    independence_rank_S,
    leading_degree,
    leading_order_fit,
    leading_power,
    pair_list,
    poincare_branch_product,
    poincare_jacobian,
    poincare_ratio_test,
    poincare_symmetrized,
    poincare_terms,
    random_direction,
    random_rational_point,
)
from schottkykit.schottky import build_S
from schottkykit.suites import LADDER, LOCUS_DIRECTION

Q = PoincareQuadruple(1, 2, 3, 4)


def test_leading_power_and_degree():
    assert [leading_power(g) for g in (4, 5, 6)] == [1, 8, 512]
    assert [leading_degree(g) for g in (4, 5)] == [8, 64]
    with pytest.raises(ValueError):
        leading_power(3)


def test_quadruple_validation():
    with pytest.raises(ValueError):
        PoincareQuadruple(1, 3, 2, 4)
    with pytest.raises(ValueError):
        PoincareQuadruple(0, 1, 2, 3)


def test_all_ones_direction():
    ones = [[0 if a == b else 1 for b in range(4)] for a in range(4)]
    assert poincare_terms(Q, ones) == (1, 1, 1)
    assert poincare_symmetrized(Q, ones) == -3


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-9, 9), min_size=6, max_size=6))
def test_symmetrized_discriminant_form(vals):
    T = dict(zip(itertools.combinations(range(1, 5), 2), vals))
    p1, p2, p3 = poincare_terms(Q, T)
    assert poincare_symmetrized(Q, T) == (p1 - p2 - p3) ** 2 - 4 * p2 * p3
    if p1 == p2 and p3 == 0:
        assert poincare_symmetrized(Q, T) == 0


def test_locus_direction_vanishes():
    assert poincare_symmetrized(Q, [[Fraction(x) for x in row] for row in LOCUS_DIRECTION]) == 0


def test_branch_product_matches_symmetrized():
    rng = np.random.default_rng(0)
    for _ in range(100):
        T = random_direction(4, int(rng.integers(2**31)), complex_entries=bool(rng.integers(2)))
        a = poincare_branch_product(Q, T)
        b = complex(poincare_symmetrized(Q, T))
        assert abs(a - b) <= 1e-9 * max(1.0, abs(b))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.fractions(-5, 5), min_size=6, max_size=6), st.fractions(-3, 3))
def test_homogeneous_of_degree_eight(vals, lam):
    keys = list(itertools.combinations(range(1, 5), 2))
    T = dict(zip(keys, vals))
    scaled = {k: lam * v for k, v in T.items()}
    assert poincare_symmetrized(Q, scaled) == lam**8 * poincare_symmetrized(Q, T)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(-6, 6), min_size=6, max_size=6), st.permutations([1, 2, 3, 4]))
def test_symmetric_under_relabelling(vals, perm):
    keys = list(itertools.combinations(range(1, 5), 2))
    T = dict(zip(keys, vals))
    moved = {}
    for (a, b), v in T.items():
        x, y = perm[a - 1], perm[b - 1]
        moved[(min(x, y), max(x, y))] = v
    assert poincare_symmetrized(Q, moved) == poincare_symmetrized(Q, T)


def test_genus4_slope():
    t = default_diagonal(4, 0)
    fit = leading_order_fit(build_S(4), t, random_direction(4, 0), LADDER)
    assert abs(fit.slope - 8) < 0.05


def test_doubling_direction_shifts_coefficient():
    t = default_diagonal(4, 1)
    T = random_direction(4, 1)
    T2 = [[2 * x for x in row] for row in T]
    ladder = (1e-3, 10**-3.5, 1e-4)
    a = leading_order_fit(build_S(4), t, T, ladder)
    b = leading_order_fit(build_S(4), t, T2, ladder)
    assert abs((b.log_coefficient - a.log_coefficient) - 8 * math.log(2)) < 0.05


def test_locus_direction_raises_order():
    s = build_S(4)
    t = default_diagonal(4, 0)
    fit = leading_order_fit(s, t, LOCUS_DIRECTION, LADDER)
    assert fit.slope > 8.5
    with pytest.raises(DegenerateDirectionError):
        poincare_ratio_test(4, 3, 4, t, [random_direction(4, 0), LOCUS_DIRECTION], 1e-3)


def test_ratio_test_genus4():
    t = default_diagonal(4, 0)
    dirs = [random_direction(4, 100 + i) for i in range(5)]
    rep = poincare_ratio_test(4, 3, 4, t, dirs, 1e-3)
    assert rep.passed, rep.max_pairwise
    assert rep.tolerance == pytest.approx(0.02)
    assert rep.to_json()["pass"] is True


def test_ratio_depends_on_t_only_through_a_common_factor():
    dirs = [random_direction(4, 200 + i) for i in range(3)]
    r1 = poincare_ratio_test(4, 3, 4, default_diagonal(4, 0), dirs, 1e-3)
    r2 = poincare_ratio_test(4, 3, 4, default_diagonal(4, 5), dirs, 1e-3)
    assert r1.passed and r2.passed
    # the common factor itself moves with t
    assert float(r1.ratios[0].relative_difference(r2.ratios[0])) > 0.1


def test_exact_zero_direction_is_degenerate():
    zero = [[0.0] * 4 for _ in range(4)]
    with pytest.raises(DegenerateDirectionError):
        leading_order_fit(build_S(4), default_diagonal(4), zero, LADDER)


def test_non_decreasing_magnitudes_are_reported(monkeypatch):
    import schottkykit.poincare as mod
    from schottkykit.hpnum import LogComplex

    import gmpy2

    monkeypatch.setattr(mod, "evaluate_SJ", lambda *a, **k: LogComplex(gmpy2.mpfr(-5), gmpy2.mpfr(0)))
    with pytest.raises(PrecisionTooLowError):
        leading_order_fit(build_S(4), default_diagonal(4), random_direction(4, 0), LADDER)


@pytest.mark.parametrize("ladder", [(), (0.2, 0.01), (1e-3, 1e-2), (1e-3, 1e-3)])
def test_ladder_validation(ladder):
    with pytest.raises(ValueError):
        leading_order_fit(build_S(4), default_diagonal(4), random_direction(4, 0), ladder)


@pytest.mark.parametrize("g,rank", [(4, 1), (5, 3), (6, 6), (7, 10), (8, 15)])
def test_poincare_rank(g, rank):
    pt = random_rational_point(g, 11)
    assert independence_rank_poincare(g, pt) == rank == len(pair_list(g))


def test_poincare_jacobian_against_difference_quotient():
    pt = random_rational_point(5, 2)
    jac = poincare_jacobian(5, pt)
    h = Fraction(1, 10**12)
    for r, (j, k) in enumerate(pair_list(5)):
        q = PoincareQuadruple(1, 2, j, k)
        for c, ab in enumerate(pair_list(5)):
            up = dict(pt)
            up[ab] += h
            lo = dict(pt)
            lo[ab] -= h
            fd = (poincare_symmetrized(q, up) - poincare_symmetrized(q, lo)) / (2 * h)
            assert abs(fd - jac[r][c]) <= Fraction(1, 10**15) * (1 + abs(jac[r][c]))


def test_rank_rejects_zero_entries():
    pt = random_rational_point(4, 0)
    pt[(1, 3)] = Fraction(0)
    with pytest.raises(ValueError):
        independence_rank_poincare(4, pt)


def test_s_jacobian_genus4():
    rep = independence_rank_S(4, default_diagonal(4, 0), random_direction(4, 0))
    assert rep.passed
    assert rep.min_singular_value > 0.5
    assert rep.raw_min_singular_value > 0
    with pytest.raises(ValueError):
        independence_rank_S(6, default_diagonal(6), random_direction(6, 0))
