"""Schottky-Jung forms: the characteristic map for eta_g and the products S_jk.

A source monomial of four genus g-1 characteristics becomes eight genus g
characteristics (each theta squared on the Prym side becomes a product of two
Jacobian thetas).  The identity is the product over all sign patterns of
sum_t (+-) sqrt(monomial_t), with the first slot's sign pinned to +1.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass

import gmpy2
import numpy as np

from .charalg import Characteristic, permute_columns, special_two_torsion
from .hpnum import DEFAULT_GUARD, DEFAULT_PRECISION, LogComplex, ctx, prec_bits
from .identities import RIdentity, build_R, expand_relation
from .theta import PeriodMatrix, theta_table
from .weilmat import QuarticRelation, is_valid_relation

FAMILIES = "abc"


class SJStructureError(AssertionError):
    pass


class ZeroMonomialWarning(RuntimeWarning):
    pass


def sj_char_pair(m: Characteristic) -> tuple[Characteristic, Characteristic]:
    """([sum eps, eps; 0, delta], the same plus eta_g) at genus g = m.genus + 1."""
    g = m.genus + 1
    total = bin(m.eps).count("1") & 1
    first = Characteristic(g, total | (m.eps << 1), m.delta << 1)
    return first, first + special_two_torsion("etag", g)


@dataclass(frozen=True)
class SJMonomial:
    chars: tuple  # 8 characteristics, in SJ pairs (c, c + eta_g)

    def key(self) -> tuple:
        return tuple(sorted(self.chars))

    def is_paired(self) -> bool:
        eta = special_two_torsion("etag", self.chars[0].genus)
        return all(self.chars[i] + eta == self.chars[i + 1] for i in range(0, len(self.chars), 2))


@dataclass(frozen=True)
class SJIdentity:
    name: str
    source_genus: int
    target_genus: int
    terms: tuple  # (slot label, SJMonomial)
    fixed_slot: str

    @property
    def factor_count(self) -> int:
        return 2 ** (len(self.terms) - 1)

    @property
    def degree(self) -> int:
        # each factor is a sum of square roots of degree-8 monomials
        return 4 * self.factor_count

    def slot_classes(self) -> Counter:
        return Counter((label, mono.key()) for label, mono in self.terms)

    def distinct_characteristics(self) -> set:
        return {m for _, mono in self.terms for m in mono.chars}

    def to_json(self) -> dict:
        return {
            "identity": self.name,
            "genus": self.target_genus,
            "fixed_slot": self.fixed_slot,
            "factors": self.factor_count,
            "degree": self.degree,
            "terms": [{"slot": lab, "chars": [str(m) for m in mono.chars]} for lab, mono in self.terms],
        }


def _map_monomial(chars) -> SJMonomial:
    out = []
    for m in chars:
        out.extend(sj_char_pair(m))
    return SJMonomial(tuple(out))


def _r_labels(h: int) -> list[str]:
    labels = []
    for fam in FAMILIES:
        for eps in itertools.product((0, 1), repeat=h - 3):
            labels.append(f"{fam}_{''.join(map(str, eps)) or '-'}")
    return labels


def build_SJ(r) -> SJIdentity:
    """Schottky-Jung identity of a valid quartic relation (or an R_jk bundle).

    For an RIdentity the slots are labelled by family and eps (a_eps, b_eps,
    c_eps); for a bare QuarticRelation by canonical term order (t0, t1, ...).
    The first slot is the fixed one.
    """
    if isinstance(r, RIdentity):
        rel, mono = r.relation, r.monomials
        labels = _r_labels(r.genus)
        name = f"SJ({r.name})"
        sources = [chars for _, chars in mono.terms]
    elif isinstance(r, QuarticRelation):
        rel = r
        canon = expand_relation(r).canonical()
        labels = [f"t{i}" for i in range(len(canon))]
        name = f"SJ({r.name or 'relation'})"
        sources = [chars for chars, _ in canon]
    else:
        raise TypeError("build_SJ expects a QuarticRelation or an RIdentity")
    if not is_valid_relation(rel):
        raise SJStructureError("Schottky-Jung identity needs a valid relation")
    if not sources:
        raise SJStructureError("relation has no monomials")
    terms = tuple((lab, _map_monomial(ch)) for lab, ch in zip(labels, sources))
    return SJIdentity(name, rel.genus, rel.genus + 1, terms, labels[0])


# The tabulated form of s_34: per family, four SJ pairs.  Each entry is
# (top column 1 is "E" or "1+E", top columns 2-4, bottom columns 1-4) for the
# first member of the pair; the second member flips every bottom bit and has
# bottom tail 1 instead of 0.
S34_TABLE = {
    "a": (
        ("E", "000", "0000", "1111"),
        ("E", "011", "0100", "1011"),
        ("1+E", "100", "0001", "1110"),
        ("1+E", "111", "0101", "1010"),
    ),
    "b": (
        ("1+E", "010", "0000", "1111"),
        ("1+E", "001", "0100", "1011"),
        ("E", "110", "0001", "1110"),
        ("E", "101", "0101", "1010"),
    ),
    "c": (
        ("E", "000", "0011", "1100"),
        ("E", "011", "0111", "1000"),
        ("1+E", "100", "0010", "1101"),
        ("1+E", "111", "0110", "1001"),
    ),
}


def s_swaps(j: int, k: int) -> tuple:
    """Column swaps taking columns 3, 4 to j, k (applied left to right)."""
    return ((4, k), (3, j))


def _table_char(col1: str, top: str, bottom: str, eps: tuple, tail: int) -> Characteristic:
    e = sum(eps) & 1
    first = e if col1 == "E" else 1 - e
    top_bits = [first] + [int(c) for c in top] + list(eps)
    bottom_bits = [int(c) for c in bottom] + [tail] * len(eps)
    return Characteristic.from_rows(top_bits, bottom_bits)


def build_S(g: int, j: int = 3, k: int = 4) -> SJIdentity:
    """S_jk built from the tabulated s_34, with columns 3, 4 moved to j, k.

    Must coincide with build_SJ(build_R(g-1, j, k)) as a multiset of
    (slot, monomial) pairs; a mismatch raises SJStructureError.
    """
    if g < 4:
        raise ValueError("S_jk needs genus >= 4")
    if not 3 <= j < k <= g:
        raise ValueError(f"need 3 <= j < k <= {g}, got j={j}, k={k}")
    swaps = s_swaps(j, k)
    terms = []
    for fam in FAMILIES:
        for eps in itertools.product((0, 1), repeat=g - 4):
            chars = []
            for col1, top, b0, b1 in S34_TABLE[fam]:
                chars.append(_table_char(col1, top, b0, eps, 0))
                chars.append(_table_char(col1, top, b1, eps, 1))
            chars = tuple(permute_columns(c, swaps) for c in chars)
            label = f"{fam}_{''.join(map(str, eps)) or '-'}"
            terms.append((label, SJMonomial(chars)))
    s = SJIdentity(f"S_{j}{k}", g - 1, g, tuple(terms), terms[0][0])
    ref = build_SJ(build_R(g - 1, j, k))
    if s.slot_classes() != ref.slot_classes():
        raise SJStructureError(f"S_{j}{k} at genus {g} differs from SJ(R_{j}{k})")
    return s


def all_S(g: int) -> list[SJIdentity]:
    return [build_S(g, j, k) for j in range(3, g + 1) for k in range(j + 1, g + 1)]


# ---------------------------------------------------------------------------
# evaluation


@dataclass
class SJStats:
    theta_evaluations: int = 0
    factors: int = 0
    zero_monomials: int = 0
    diagonal: bool = False
    route: str = ""


def _gray_flip_index(i: int) -> int:
    """Bit that changes between gray(i-1) and gray(i)."""
    return (i & -i).bit_length() - 1


def evaluate_SJ(s: SJIdentity, tau: PeriodMatrix, digits: int = DEFAULT_PRECISION, branch_seed: int = 0,
                guard: int = DEFAULT_GUARD, stats: SJStats | None = None) -> LogComplex:
    """Product over sign patterns of sum_t (+-) sqrt(monomial_t), as a LogComplex.

    Each 8-theta monomial is computed once; the square root branch of each is
    chosen by ``branch_seed`` (the result does not depend on it).  Exactly
    diagonal tau uses the product formula for theta, so vanishing is exact.
    """
    if tau.genus != s.target_genus:
        raise ValueError(f"identity has genus {s.target_genus}, tau has genus {tau.genus}")
    diagonal = tau.is_diagonal()
    tab = theta_table(tau, digits, guard, exact_diagonal=True)
    bits = tab.bits
    st = stats if stats is not None else SJStats()
    st.diagonal = diagonal
    st.route = tab.route
    st.theta_evaluations = len(s.distinct_characteristics())
    n = len(s.terms)
    st.factors = 2 ** (n - 1)
    rng = np.random.default_rng(branch_seed)
    flips = rng.integers(0, 2, size=n)
    with ctx(bits):
        roots = []
        for (label, mono), flip in zip(s.terms, flips):
            v = gmpy2.mpc(1)
            for m in mono.chars:
                v = v * tab[m]
            if v == 0:
                st.zero_monomials += 1
            r = gmpy2.sqrt(v)
            roots.append(-r if flip else r)
        if st.zero_monomials and not diagonal:
            import warnings

            warnings.warn(f"{st.zero_monomials} monomial(s) of {s.name} vanish exactly off the diagonal",
                          ZeroMonomialWarning, stacklevel=2)
        if all(r == 0 for r in roots):
            return LogComplex.exact_zero(bits)
        # sign pattern over slots 1..n-1 in Gray-code order, slot 0 fixed at +1
        current = sum(roots, gmpy2.mpc(0))
        signs = [1] * n
        acc = LogComplex.one(bits)
        for i in range(st.factors):
            if i:
                b = _gray_flip_index(i) + 1
                current = current - 2 * signs[b] * roots[b]
                signs[b] = -signs[b]
            acc = acc * LogComplex.from_complex(current, bits)
            if acc.zero:
                return acc
    return acc


def evaluate_SJ_direct(s: SJIdentity, tau: PeriodMatrix, digits: int = DEFAULT_PRECISION,
                       branch_seed: int = 0, guard: int = DEFAULT_GUARD) -> LogComplex:
    """Same product with every factor summed from scratch (reference for the Gray-code path)."""
    tab = theta_table(tau, digits, guard, exact_diagonal=True)
    rng = np.random.default_rng(branch_seed)
    flips = rng.integers(0, 2, size=len(s.terms))
    with ctx(tab.bits):
        roots = []
        for (_, mono), flip in zip(s.terms, flips):
            v = gmpy2.mpc(1)
            for m in mono.chars:
                v = v * tab[m]
            roots.append(-gmpy2.sqrt(v) if flip else gmpy2.sqrt(v))
        acc = LogComplex.one(tab.bits)
        for pattern in itertools.product((1, -1), repeat=len(roots) - 1):
            f = roots[0] + sum((p * r for p, r in zip(pattern, roots[1:])), gmpy2.mpc(0))
            acc = acc * LogComplex.from_complex(f, tab.bits)
    return acc


def symmetrized_quartic(r1, r2, r3):
    """R1^2 + R2^2 + R3^2 - 2 R1 R2 - 2 R1 R3 - 2 R2 R3."""
    return r1 * r1 + r2 * r2 + r3 * r3 - 2 * (r1 * r2 + r1 * r3 + r2 * r3)


def genus4_monomials(tau: PeriodMatrix, digits: int = DEFAULT_PRECISION, guard: int = DEFAULT_GUARD):
    """The three 8-theta products R1, R2, R3 of S_34 at a genus 4 tau."""
    if tau.genus != 4:
        raise ValueError("needs a genus 4 period matrix")
    s = build_S(4)
    tab = theta_table(tau, digits, guard, exact_diagonal=True)
    out = []
    with ctx(tab.bits):
        for _, mono in s.terms:
            v = gmpy2.mpc(1)
            for m in mono.chars:
                v = v * tab[m]
            out.append(v)
    return out, tab.bits


def genus4_symmetrized_value(tau: PeriodMatrix, digits: int = DEFAULT_PRECISION, guard: int = DEFAULT_GUARD,
                             cross_check: bool = True):
    """The degree 16 polynomial R1^2 + R2^2 + R3^2 - 2(R1R2 + R1R3 + R2R3).

    With ``cross_check`` it must agree with the sign-pattern product of S_34
    to relative 10^-(digits - 10); otherwise SJStructureError is raised.
    """
    (r1, r2, r3), bits = genus4_monomials(tau, digits, guard)
    with ctx(bits):
        val = symmetrized_quartic(r1, r2, r3)
    if cross_check:
        prod = evaluate_SJ(build_S(4), tau, digits, guard=guard)
        ref = LogComplex.from_complex(val, bits) if val != 0 else LogComplex.exact_zero(bits)
        with ctx(bits):
            tol = gmpy2.mpfr(10) ** (-(digits - 10))
            diff = prod.relative_difference(ref)
            if diff > tol:
                diff = prod.relative_difference(-ref)
            if diff > tol:
                raise SJStructureError(f"symmetrized form and product disagree: {float(diff):.3e}")
    return val
