"""Quartic theta identities: Riemann's relation, eigenvector quartics, R_jk.

A quartic relation (X, A, S) expands to monomials
``x_m (-1)^(delta_m . (alpha + sigma)) (m, A, S) theta[m] theta[m+A] theta[m+S] theta[m+A+S]``
where ``(m, A, S)`` is the tricharacter.  Summing Riemann's relation against
a -2^(g-1) eigenvector of M+ leaves that tricharacter on every monomial; it
is +1 whenever the bottom rows of both shifts vanish.
Evaluation pulls every theta constant from one :class:`~schottkykit.theta.ThetaTable`
and reports the residual relative to the largest single monomial.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import gmpy2

from .charalg import Characteristic, all_characteristics, append_column, permute_columns, tricharacter, weil_pairing
from .hpnum import DEFAULT_GUARD, DEFAULT_PRECISION, ctx
from .theta import PeriodMatrix, theta_table
from .weilmat import QuarticRelation, catalog_json, is_valid_relation


class RelationError(ValueError):
    pass


def _bitdot(a: int, b: int) -> int:
    return bin(a & b).count("1") & 1


@dataclass(frozen=True)
class QuarticMonomialList:
    genus: int
    terms: tuple  # (coefficient, (c1, c2, c3, c4))

    def __len__(self):
        return len(self.terms)

    def canonical(self) -> tuple:
        """Terms with sorted characteristics, equal monomials merged, zeros dropped."""
        acc = Counter()
        for coeff, chars in self.terms:
            acc[tuple(sorted(chars))] += coeff
        return tuple(sorted((k, v) for k, v in acc.items() if v))

    def scaled(self, factor: int) -> "QuarticMonomialList":
        return QuarticMonomialList(self.genus, tuple((c * factor, ch) for c, ch in self.terms))

    def permuted(self, swaps) -> "QuarticMonomialList":
        return QuarticMonomialList(
            self.genus, tuple((c, tuple(permute_columns(m, swaps) for m in ch)) for c, ch in self.terms)
        )

    def characteristics(self) -> set:
        return {m for _, ch in self.terms for m in ch}

    def to_json(self) -> list:
        return [{"coeff": c, "chars": [str(m) for m in ch]} for c, ch in self.terms]


def expand_relation(r: QuarticRelation) -> QuarticMonomialList:
    """Monomials of the quartic attached to (X, A, S); odd-factor monomials dropped."""
    a, s = r.shift_a, r.shift_s
    top_sum = a.eps ^ s.eps
    terms = []
    for m, x in r.coefficients:
        chars = (m, m + a, m + s, m + a + s)
        if not all(c.is_even() for c in chars):
            continue
        sign = -1 if _bitdot(m.delta, top_sum) else 1
        sign *= tricharacter(m, a, s)
        terms.append((x * sign, chars))
    return QuarticMonomialList(r.genus, tuple(terms))


# ---------------------------------------------------------------------------
# numerical evaluation


@dataclass(frozen=True)
class Residual:
    value: object  # gmpy2.mpc
    scale: object  # largest monomial magnitude
    bits: int

    @property
    def relative(self):
        with ctx(self.bits):
            if self.scale == 0:
                return abs(self.value)
            return abs(self.value) / self.scale

    def log10_relative(self) -> float:
        rel = self.relative
        return float("-inf") if rel == 0 else float(gmpy2.log10(rel))


def evaluate_monomials(mono: QuarticMonomialList, tau: PeriodMatrix, digits: int = DEFAULT_PRECISION,
                       guard: int = DEFAULT_GUARD) -> Residual:
    if tau.genus != mono.genus:
        raise ValueError(f"genus mismatch: identity {mono.genus}, tau {tau.genus}")
    tab = theta_table(tau, digits, guard, exact_diagonal=False)
    with ctx(tab.bits):
        total = gmpy2.mpc(0)
        scale = gmpy2.mpfr(0)
        for coeff, chars in mono.terms:
            term = gmpy2.mpc(coeff)
            for m in chars:
                term = term * tab[m]
            total += term
            scale = max(scale, abs(term))
    return Residual(total, scale, tab.bits)


def eigenvector_quartic_value(r: QuarticRelation, tau: PeriodMatrix, digits: int = DEFAULT_PRECISION,
                              guard: int = DEFAULT_GUARD) -> Residual:
    """Signed quartic sum of (X, A, S) at tau; no validity requirement."""
    return evaluate_monomials(expand_relation(r), tau, digits, guard)


def riemann_relation_residual(m1: Characteristic, m2: Characteristic, m3: Characteristic, tau: PeriodMatrix,
                              digits: int = DEFAULT_PRECISION, guard: int = DEFAULT_GUARD) -> Residual:
    """LHS - RHS of Riemann's quartic relation for ([eps;delta], [alpha;beta], [sigma;mu])."""
    g = tau.genus
    for m in (m1, m2, m3):
        if m.genus != g:
            raise ValueError(f"characteristic {m} does not match genus {g}")
    tab = theta_table(tau, digits, guard, exact_diagonal=False)
    top_sum = m2.eps ^ m3.eps

    def quad(n):
        return tab[n] * tab[n + m2] * tab[n + m3] * tab[n + m2 + m3]

    with ctx(tab.bits):
        lhs = (2**g) * tricharacter(m1, m2, m3) * quad(m1)
        rhs = gmpy2.mpc(0)
        scale = abs(lhs)
        for n in all_characteristics(g):
            sign = -1 if _bitdot(m1.delta ^ n.delta, top_sum) else 1
            sign *= weil_pairing(m1, n) * tricharacter(n, m2, m3)
            term = sign * quad(n)
            rhs += term
            scale = max(scale, abs(term))
    return Residual(lhs - rhs, scale, tab.bits)


# ---------------------------------------------------------------------------
# R_jk

ALPHA3 = Characteristic.parse("011;100")
SIGMA3 = Characteristic.parse("100;001")

# (sign, the four characteristics of the genus-3 core)
R_FAMILIES = (
    (+1, ("000;000", "011;100", "100;001", "111;101")),
    (-1, ("010;000", "001;100", "110;001", "101;101")),
    (+1, ("000;011", "011;111", "100;010", "111;110")),
)


def genus3_core_relation() -> QuarticRelation:
    """(X_3, [011;100], [100;001]): X_3 has one nonzero entry per orbit characteristic.

    Each orbit element m gets x_m = s (-1)^(delta_m . (alpha+sigma)) (m, A, S)
    so that the four equal monomials all carry the family sign s.
    """
    top_sum = ALPHA3.eps ^ SIGMA3.eps
    coeffs = {}
    for sign, chars in R_FAMILIES:
        for text in chars:
            m = Characteristic.parse(text)
            par = -1 if _bitdot(m.delta, top_sum) else 1
            coeffs[m] = sign * par * tricharacter(m, ALPHA3, SIGMA3)
    return QuarticRelation.from_map(3, coeffs, ALPHA3, SIGMA3, name="R3")


def doubling_transport(r: QuarticRelation) -> QuarticRelation:
    """Append last columns [0;0] and [1;0]; shifts get [0;0]."""
    if not is_valid_relation(r):
        raise RelationError("doubling needs a valid relation")
    coeffs = {}
    for m, x in r.coefficients:
        coeffs[append_column(m, (0, 0))] = x
        coeffs[append_column(m, (1, 0))] = x
    return QuarticRelation.from_map(
        r.genus + 1, coeffs, append_column(r.shift_a, (0, 0)), append_column(r.shift_s, (0, 0)), r.name
    )


def r_swaps(j: int, k: int) -> tuple:
    """Column swaps taking core columns 2, 3 to j-1, k-1 (applied left to right)."""
    return ((3, k - 1), (2, j - 1))


def r34_monomials(h: int) -> QuarticMonomialList:
    """Monomials of R_34 at genus h, in table order: family, then eps."""
    terms = []
    for sign, chars in R_FAMILIES:
        core = [Characteristic.parse(t) for t in chars]
        for eps in itertools.product((0, 1), repeat=h - 3):
            ext = []
            for c in core:
                for e in eps:
                    c = append_column(c, (e, 0))
                ext.append(c)
            terms.append((sign, tuple(ext)))
    return QuarticMonomialList(h, tuple(terms))


@dataclass(frozen=True)
class RIdentity:
    genus: int
    j: int
    k: int
    relation: QuarticRelation
    monomials: QuarticMonomialList

    @property
    def name(self) -> str:
        return f"R_{self.j}{self.k}"

    @property
    def swaps(self) -> tuple:
        return r_swaps(self.j, self.k)

    def column_permutation(self) -> list[int]:
        """0-based perm with theta[m'](tau) = theta[m](tau[perm][:, perm]) for swapped m'."""
        g = self.genus
        where = list(range(g))  # where[c] = current position of original column c
        for a, b in self.swaps:
            a, b = a - 1, b - 1
            where = [b if w == a else a if w == b else w for w in where]
        perm = [0] * g
        for orig, pos in enumerate(where):
            perm[orig] = pos
        return perm

    def to_json(self) -> dict:
        out = self.relation.to_json()
        out["name"] = self.name
        out["expanded"] = self.monomials.to_json()
        return out


def _check_rjk(h: int, j: int, k: int) -> None:
    if h < 3:
        raise ValueError("R_jk needs genus >= 3")
    if not 3 <= j < k <= h + 1:
        raise ValueError(f"need 3 <= j < k <= {h + 1}, got j={j}, k={k}")


def build_R(h: int, j: int = 3, k: int = 4) -> RIdentity:
    """R_jk at genus h: the explicit monomial sum, cross-checked against its relation vector.

    The relation vector is the genus-3 core doubled h-3 times; its expansion
    must equal 4 times the explicit monomial list, and it must be exactly a
    -2^(h-1) eigenvector of M+(h).
    """
    _check_rjk(h, j, k)
    rel = genus3_core_relation()
    for _ in range(h - 3):
        rel = doubling_transport(rel)
    mono = r34_monomials(h)
    swaps = r_swaps(j, k)
    if swaps != ((3, 3), (2, 2)):
        rel = QuarticRelation.from_map(
            h,
            {permute_columns(m, swaps): x for m, x in rel.coefficients},
            permute_columns(rel.shift_a, swaps),
            permute_columns(rel.shift_s, swaps),
        )
        mono = mono.permuted(swaps)
    rel = QuarticRelation(rel.genus, rel.coefficients, rel.shift_a, rel.shift_s, f"R_{j}{k}")
    if len(mono) != 3 * 2 ** (h - 3):
        raise RelationError(f"R_{j}{k} has {len(mono)} monomials, expected {3 * 2 ** (h - 3)}")
    if expand_relation(rel).canonical() != mono.scaled(4).canonical():
        raise RelationError(f"R_{j}{k} monomials disagree with the doubled relation vector")
    if not is_valid_relation(rel):
        raise RelationError(f"R_{j}{k} coefficient vector is not a -2^(h-1) eigenvector")
    return RIdentity(h, j, k, rel, mono)


def all_R(h: int) -> list[RIdentity]:
    return [build_R(h, j, k) for j in range(3, h + 2) for k in range(j + 1, h + 2)]


def r_catalog(h: int, header: dict | None = None) -> dict:
    items = all_R(h)
    cat = catalog_json([r.relation for r in items], header)
    for entry, r in zip(cat["relations"], items):
        entry["name"] = r.name
        entry["expanded"] = r.monomials.to_json()
    return cat


def relation_from_vector(genus: int, vec: Sequence[int], shift_a=None, shift_s=None) -> QuarticRelation:
    return QuarticRelation.from_vector(genus, vec, shift_a, shift_s)


def random_triples(genus: int, count: int, rng) -> Iterable[tuple]:
    """Seeded random characteristic triples (uniform over K_g^3)."""
    n = 1 << genus
    for _ in range(count):
        vals = rng.integers(0, n, size=6)
        yield tuple(Characteristic(genus, int(vals[2 * i]), int(vals[2 * i + 1])) for i in range(3))
