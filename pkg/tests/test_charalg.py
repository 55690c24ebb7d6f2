import itertools

import pytest
from hypothesis import given, strategies as st

from schottkykit.charalg import (
    EVEN,
    ODD,
    Characteristic,
    GenusMismatch,
    all_characteristics,
    append_column,
    char_order,
    k_even,
    k_odd,
    orthogonal_complement,
    parity,
    special_two_torsion,
    split_last,
    swap_columns,
    tricharacter,
    weil_pairing,
)

P = Characteristic.parse


@st.composite
def chars(draw, genus=None, min_genus=1, max_genus=6):
    g = genus or draw(st.integers(min_genus, max_genus))
    return Characteristic(g, draw(st.integers(0, 2**g - 1)), draw(st.integers(0, 2**g - 1)))


@st.composite
def char_pairs(draw, n=2):
    g = draw(st.integers(1, 6))
    return tuple(draw(chars(genus=g)) for _ in range(n))


def test_parity_examples():
    assert parity(P("000;000")) == EVEN
    assert parity(P("1;1")) == ODD
    assert sum(m.is_even() for m in all_characteristics(2)) == 10


def test_parse_and_str_roundtrip():
    m = P("0110;1000")
    assert str(m) == "[0110;1000]"
    assert P(str(m)) == m
    assert m.column(2) == (1, 0)


def test_addition_is_involution():
    m = P("101;011")
    assert m + m == Characteristic.zero(3)


def test_weil_pairing_examples():
    assert weil_pairing(P("1;0"), P("0;1")) == -1
    for n in all_characteristics(1):
        assert weil_pairing(P("0;0"), n) == 1


def test_weil_pairing_genus_mismatch():
    with pytest.raises(GenusMismatch):
        weil_pairing(P("1;0"), P("10;01"))


def test_tricharacter_examples():
    assert tricharacter(P("1;1"), P("1;1"), P("1;1")) == -1
    assert tricharacter(P("000;000"), P("011;100"), P("100;001")) == 1
    z = Characteristic.zero(3)
    for m in all_characteristics(3):
        assert tricharacter(m, z, z) == 1


@given(chars())
def test_self_pairing_is_trivial(m):
    assert weil_pairing(m, m) == 1


@given(char_pairs(3))
def test_pairing_symmetric_and_bilinear(triple):
    m, n, p = triple
    assert weil_pairing(m, n) == weil_pairing(n, m)
    assert weil_pairing(m + n, p) == weil_pairing(m, p) * weil_pairing(n, p)


@pytest.mark.parametrize("g", [1, 2, 3])
def test_pairing_exhaustive(g):
    cs = list(all_characteristics(g))
    for m, n in itertools.product(cs, repeat=2):
        assert weil_pairing(m, n) == weil_pairing(n, m)


def test_swap_columns_example():
    assert swap_columns(P("0110;1000"), 1, 3) == P("1100;0010")


@given(chars(min_genus=2), st.data())
def test_swap_preserves_parity_and_is_involution(m, data):
    i = data.draw(st.integers(1, m.genus))
    j = data.draw(st.integers(1, m.genus))
    s = swap_columns(m, i, j)
    assert s.is_even() == m.is_even()
    assert swap_columns(s, i, j) == m
    assert swap_columns(m, i, i) == m


def test_swap_out_of_range():
    with pytest.raises(IndexError):
        swap_columns(P("01;10"), 0, 1)
    with pytest.raises(IndexError):
        swap_columns(P("01;10"), 1, 3)


def test_append_split():
    assert append_column(P("0;1"), (1, 0)) == P("01;10")
    assert split_last(P("01;10")) == (P("0;1"), (1, 0))
    with pytest.raises(ValueError):
        split_last(P("0;1"))


@given(chars(max_genus=5), st.sampled_from([(0, 0), (0, 1), (1, 0), (1, 1)]))
def test_append_roundtrip_and_parity(m, col):
    a = append_column(m, col)
    assert a.genus == m.genus + 1
    assert split_last(a) == (m, col)
    if col == (1, 1):
        assert a.is_even() != m.is_even()
    else:
        assert a.is_even() == m.is_even()


def test_two_torsion():
    assert special_two_torsion("etag", 4) == P("0000;1111")
    assert special_two_torsion("eta0", 4) == P("0000;1000")
    eta = special_two_torsion("etag", 4)
    for i, j in itertools.combinations(range(1, 5), 2):
        assert swap_columns(eta, i, j) == eta


@pytest.mark.parametrize("g", range(1, 6))
def test_orthogonal_complement_count(g):
    eta = special_two_torsion("etag", g)
    vs = list(orthogonal_complement(eta))
    assert len(vs) == 2 ** (2 * g - 1)
    assert all(weil_pairing(eta, v) == 1 for v in vs)


@pytest.mark.parametrize("g", range(1, 7))
def test_char_order_sizes_and_blocks(g):
    o = char_order(g)
    assert len(o.even_list) == k_even(g) == 2 ** (g - 1) * (2**g + 1)
    assert len(o.odd_list) == k_odd(g) == 2 ** (g - 1) * (2**g - 1)
    assert len(set(o.full_list)) == 4**g
    assert all(m.is_even() for m in o.even_list)
    assert not any(m.is_even() for m in o.odd_list)
    if g > 1:
        prev = char_order(g - 1)
        expect = (
            [append_column(m, (0, 0)) for m in prev.even_list]
            + [append_column(m, (0, 1)) for m in prev.even_list]
            + [append_column(m, (1, 0)) for m in prev.even_list]
            + [append_column(m, (1, 1)) for m in prev.odd_list]
        )
        assert list(o.even_list) == expect


def test_char_order_genus1():
    o = char_order(1)
    assert [str(m) for m in o.even_list] == ["[0;0]", "[0;1]", "[1;0]"]
    assert [str(m) for m in o.odd_list] == ["[1;1]"]


def test_char_order_genus2_listing():
    names = [str(m) for m in char_order(2).even_list]
    assert names == [
        "[00;00]", "[00;10]", "[10;00]",
        "[00;01]", "[00;11]", "[10;01]",
        "[01;00]", "[01;10]", "[11;00]",
        "[11;11]",
    ]


def test_json_form():
    assert P("01;10").to_json() == {"eps": [0, 1], "delta": [1, 0]}
