import itertools
import warnings

import gmpy2
import numpy as np
import pytest
import sympy

from schottkykit.charalg import Characteristic, special_two_torsion, weil_pairing
from schottkykit.hpnum import LogComplex, ctx, prec_bits
from schottkykit.identities import build_R
from schottkykit.schottky import (
    SJStats,
    SJStructureError,
    all_S,
    build_S,
    build_SJ,
    evaluate_SJ,
    evaluate_SJ_direct,
    genus4_monomials,
    genus4_symmetrized_value,
    s_swaps,
    sj_char_pair,
    symmetrized_quartic,
)
from schottkykit.theta import PeriodMatrix, random_period_matrix
from schottkykit.weilmat import QuarticRelation

P = Characteristic.parse
X2 = [1, -1, -1, 0, 0, 0, 1, -1, -1, 0]


def test_sj_char_pair_examples():
    assert sj_char_pair(P("1;0")) == (P("11;00"), P("11;11"))
    assert sj_char_pair(P("0;1")) == (P("00;01"), P("00;10"))
    a, b = sj_char_pair(P("110;101"))
    assert a == P("0110;0101")
    assert b == a + special_two_torsion("etag", 4)


@pytest.mark.parametrize("g", [1, 2, 3])
def test_sj_pair_preserves_parity(g):
    for e in range(2**g):
        for d in range(2**g):
            m = Characteristic(g, e, d)
            a, b = sj_char_pair(m)
            # both images have the parity of the source
            assert a.is_even() == b.is_even() == m.is_even()
            assert weil_pairing(a, special_two_torsion("etag", g + 1)) == 1


@pytest.mark.parametrize("g,terms,factors", [(4, 3, 4), (5, 6, 32), (6, 12, 2048)])
def test_factor_counts(g, terms, factors):
    s = build_S(g)
    assert len(s.terms) == terms
    assert s.factor_count == factors
    assert s.degree == 4 * factors
    assert all(mono.is_paired() for _, mono in s.terms)


def test_genus5_all_pairs():
    forms = all_S(5)
    assert [s.name for s in forms] == ["S_34", "S_35", "S_45"]
    assert sum(s.factor_count for s in forms) == 96


@pytest.mark.parametrize("g", [4, 5, 6])
def test_table_matches_general_construction(g):
    for j in range(3, g + 1):
        for k in range(j + 1, g + 1):
            s = build_S(g, j, k)
            assert s.slot_classes() == build_SJ(build_R(g - 1, j, k)).slot_classes()


def test_build_S_argument_checks():
    with pytest.raises(ValueError):
        build_S(3)
    with pytest.raises(ValueError):
        build_S(5, 4, 3)
    with pytest.raises(ValueError):
        build_S(5, 2, 4)
    assert s_swaps(5, 6) == ((4, 6), (3, 5))


def test_build_SJ_from_bare_relation():
    s = build_SJ(QuarticRelation.from_vector(2, X2, name="X2"))
    assert s.target_genus == 3
    assert s.fixed_slot == "t0"
    with pytest.raises(SJStructureError):
        build_SJ(QuarticRelation.from_vector(1, [1, 1, 1]))
    with pytest.raises(TypeError):
        build_SJ([1, 2, 3])


@pytest.mark.parametrize("g", [4, 5])
def test_exact_zero_on_diagonal(g):
    rng = np.random.default_rng(g)
    t = [complex(rng.uniform(-0.5, 0.5), rng.uniform(0.8, 1.5)) for _ in range(g)]
    tau = PeriodMatrix.diagonal(t, prec_bits(40, 10))
    for s in all_S(g):
        st = SJStats()
        v = evaluate_SJ(s, tau, 40, stats=st)
        assert v.zero
        assert st.diagonal and st.route == "diagonal"


@pytest.mark.parametrize("g", [4, 5])
def test_nonzero_and_branch_free_at_random_tau(g):
    tau = random_period_matrix(g, 31 + g)
    s = build_S(g)
    vals = [evaluate_SJ(s, tau, 40, branch_seed=b) for b in range(4)]
    assert not vals[0].zero
    for v in vals[1:]:
        assert vals[0].relative_difference(v) < 1e-30


def test_gray_code_matches_direct_product():
    tau = random_period_matrix(5, 3)
    s = build_S(5, 3, 5)
    a = evaluate_SJ(s, tau, 40, branch_seed=2)
    b = evaluate_SJ_direct(s, tau, 40, branch_seed=2)
    assert a.relative_difference(b) < 1e-30


@pytest.mark.parametrize("g", [4, 5, 6])
def test_theta_evaluation_count(g):
    st = SJStats()
    tau = PeriodMatrix.diagonal([1j] * g)
    evaluate_SJ(build_S(g), tau, 20, stats=st)
    assert st.theta_evaluations == 8 * 3 * 2 ** (g - 4)
    assert st.factors == build_S(g).factor_count


def test_genus_mismatch():
    with pytest.raises(ValueError):
        evaluate_SJ(build_S(4), random_period_matrix(5, 0))


def test_symmetrized_value_on_diagonal_and_random():
    diag = PeriodMatrix.diagonal([0.1 + 1j, 1.2j, -0.3 + 1j, 1.1j], prec_bits(40, 10))
    assert genus4_symmetrized_value(diag, 40) == 0
    tau = random_period_matrix(4, 12)
    val = genus4_symmetrized_value(tau, 40)
    assert val != 0


def test_symmetrized_matches_product_up_to_sign():
    tau = random_period_matrix(4, 13)
    (r1, r2, r3), bits = genus4_monomials(tau, 40)
    with ctx(bits):
        sym = LogComplex.from_complex(symmetrized_quartic(r1, r2, r3), bits)
    prod = evaluate_SJ(build_S(4), tau, 40)
    assert min(prod.relative_difference(sym), prod.relative_difference(-sym)) < 1e-30


def test_symmetrized_quartic_synthetic():
    with ctx(200):
        a = gmpy2.mpc("1.25+0.5j")
        assert symmetrized_quartic(a, a, gmpy2.mpc(0)) == 0
    assert symmetrized_quartic(1, 1, 1) == -3


def test_sign_slot_closure_symbolic():
    # product over sign patterns with the first slot fixed is a polynomial in the squares
    for n in (2, 3, 4):
        x = sympy.symbols(f"x0:{n}")
        prod = 1
        for pattern in itertools.product((1, -1), repeat=n - 1):
            prod *= x[0] + sum(p * v for p, v in zip(pattern, x[1:]))
        poly = sympy.Poly(sympy.expand(prod), *x)
        assert all(all(e % 2 == 0 for e in mono) for mono in poly.monoms())
    r = sympy.symbols("r1:4")
    rt = [sympy.sqrt(v) for v in r]
    prod = sympy.expand(
        sympy.prod(rt[0] + s1 * rt[1] + s2 * rt[2] for s1, s2 in itertools.product((1, -1), repeat=2))
    )
    assert sympy.simplify(prod - symmetrized_quartic(*r)) == 0


def test_no_spurious_zero_warning_at_random_tau():
    tau = random_period_matrix(4, 5)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        evaluate_SJ(build_S(4), tau, 30)
