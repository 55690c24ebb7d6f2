import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from schottkykit.charalg import char_order
from schottkykit.exactla import bareiss_rank, certified_rank_pair, exact_matmul, rank_mod_p
from schottkykit.weilmat import (
    EVEN_EVEN,
    EVEN_ODD,
    FULL,
    ODD_ODD,
    U1,
    U2,
    U3,
    U4,
    X1,
    EigenCheckError,
    MatrixSizeError,
    QuarticRelation,
    assemble_m_plus,
    build_pairing_matrix,
    dim_mixed,
    doubling_lift,
    is_eigenvector,
    is_valid_relation,
    lift_space_ranks,
    m_full,
    m_plus,
    n_block,
    neg_eigenspace_basis,
    verify_eigenstructure,
)

X2 = [1, -1, -1, 0, 0, 0, 1, -1, -1, 0]


def pairing_by_columns(m, n):
    """Weil pairing summed column by column, independent of the bitmask code."""
    s = 0
    for i in range(1, m.genus + 1):
        e1, d1 = m.column(i)
        e2, d2 = n.column(i)
        s += e1 * d2 + e2 * d1
    return -1 if s % 2 else 1


@pytest.mark.parametrize("g", [1, 2, 3])
def test_full_matrix_matches_column_formula(g):
    order = char_order(g).full_list
    m = build_pairing_matrix(g, FULL).entries
    assert m.shape == (4**g, 4**g)
    for i, a in enumerate(order):
        for j, b in enumerate(order):
            assert m[i, j] == pairing_by_columns(a, b)


def test_genus1_blocks():
    assert build_pairing_matrix(1, EVEN_EVEN).entries.tolist() == [[1, 1, 1], [1, 1, -1], [1, -1, 1]]
    assert build_pairing_matrix(1, EVEN_ODD).entries.tolist() == [[1], [-1], [-1]]
    assert build_pairing_matrix(1, ODD_ODD).entries.tolist() == [[1]]


def test_size_cap():
    with pytest.raises(MatrixSizeError):
        build_pairing_matrix(9, FULL)


@pytest.mark.parametrize("g", [2, 3, 4, 5])
def test_block_assembly(g):
    assert np.array_equal(assemble_m_plus(g), m_plus(g))


@pytest.mark.parametrize("g", [1, 2, 3, 4])
def test_full_squares_to_scalar(g):
    m = m_full(g)
    assert np.array_equal(exact_matmul(m, m), 4**g * np.eye(4**g, dtype=np.int64))


@pytest.mark.parametrize("g", [1, 2, 3, 4])
def test_eigenstructure_report(g):
    rep = verify_eigenstructure(g)
    assert rep.passed, [c.name for c in rep.failures()]


@pytest.mark.slow
@pytest.mark.parametrize("g", [5, 6])
def test_eigenstructure_blocks_large(g):
    rep = verify_eigenstructure(g)
    assert rep.passed, [c.name for c in rep.failures()]


def test_genus1_eigenvalues_float_oracle():
    w = np.linalg.eigvalsh(m_plus(1).astype(float))
    assert np.allclose(sorted(w), [-1, 2, 2])


@pytest.mark.parametrize("g,dim", [(2, 5), (3, 21)])
def test_negative_eigenspace_dimension_sympy(g, dim):
    mp = sympy.Matrix(m_plus(g).tolist())
    shifted = mp + 2 ** (g - 1) * sympy.eye(mp.shape[0])
    assert mp.shape[0] - shifted.rank() == dim


@pytest.mark.parametrize("g", [1, 2, 3])
def test_neg_basis(g):
    cols = neg_eigenspace_basis(g)
    assert len(cols) == len(char_order(g).odd_list)
    if g == 1:
        assert cols == [list(X1)]
    assert sympy.Matrix(cols).rank() == dim_mixed(g)


def test_bareiss_against_sympy():
    rng = np.random.default_rng(3)
    for _ in range(20):
        r, c = rng.integers(1, 9, size=2)
        a = rng.integers(-2, 3, size=(r, c))
        # force some rank deficiency
        if r > 2:
            a[-1] = a[0] + a[1]
        assert bareiss_rank(a.tolist()) == sympy.Matrix(a.tolist()).rank()


def test_modular_rank_is_lower_bound():
    n = n_block(3)
    assert rank_mod_p(n) == bareiss_rank(n.tolist())


def test_certified_rank_pair():
    mp = m_plus(3)
    a = mp - 8 * np.eye(36, dtype=np.int64)
    b = mp + 4 * np.eye(36, dtype=np.int64)
    assert certified_rank_pair(a, b, True) == (21, 15)


def test_exact_matmul_large_entries_fall_back():
    a = np.array([[2**40, 1], [1, 2**40]], dtype=object)
    out = exact_matmul(a, a)
    assert out[0, 0] == 2**80 + 1


def test_x2_from_u2():
    assert doubling_lift(list(X1), U2) == X2


def test_x1_u1_lift():
    assert doubling_lift(list(X1), U1) == [1, -1, -1, 1, -1, -1, 0, 0, 0, 0]


@pytest.mark.parametrize("g", [2, 3, 4])
def test_all_variants_give_eigenvectors(g):
    h = g - 1
    kp = len(char_order(h).even_list)
    x = neg_eigenspace_basis(h)[0]
    pos = m_plus(h) + 2 ** (h - 1) * np.eye(kp, dtype=np.int64)
    x_pos = next(c for c in pos.T if c.any())
    full = m_full(h) - 2**h * np.eye(4**h, dtype=np.int64)
    v = next(c for c in full.T if c.any())
    target = m_plus(g)
    for out in (
        doubling_lift(x, U1),
        doubling_lift(x, U2),
        doubling_lift(v[:kp], U3, v[kp:]),
        doubling_lift(x_pos, U4),
    ):
        assert any(out)
        assert is_eigenvector(target, out, -(2 ** (g - 1)))


def test_lift_preconditions():
    with pytest.raises(EigenCheckError):
        doubling_lift([1, 1, 1], U2)
    with pytest.raises(ValueError):
        doubling_lift(list(X1), U3)
    with pytest.raises(ValueError):
        doubling_lift(list(X1), "U9")


@pytest.mark.parametrize("g", [2, 3, 4])
def test_lift_spaces_span_the_eigenspace(g):
    ranks = lift_space_ranks(g)
    assert ranks["union"] == ranks["expected"] == dim_mixed(g)
    assert sum(ranks[v] for v in (U1, U2, U3, U4)) == dim_mixed(g)


def test_iterated_u2_stays_valid():
    x = list(X1)
    for g in range(2, 6):
        x = doubling_lift(x, U2)
        assert is_valid_relation(QuarticRelation.from_vector(g, x))


def test_validity_examples():
    assert is_valid_relation(QuarticRelation.from_vector(1, X1))
    assert not is_valid_relation(QuarticRelation.from_vector(1, [1, 1, 1]))
    zero = QuarticRelation.from_vector(2, [0] * 10)
    assert zero.is_trivial() and is_valid_relation(zero)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=5, max_size=5))
def test_combinations_of_eigenvectors_stay_valid(coeffs):
    basis = neg_eigenspace_basis(2)[:5]
    x = [sum(c * b[i] for c, b in zip(coeffs, basis)) for i in range(10)]
    assert is_valid_relation(QuarticRelation.from_vector(2, x))


def test_relation_json_roundtrip():
    r = QuarticRelation.from_vector(2, X2, name="X2")
    back = QuarticRelation.from_json(r.to_json())
    assert back == r
    assert r.vector() == X2
