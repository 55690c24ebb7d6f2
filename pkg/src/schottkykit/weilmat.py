"""Weil-pairing matrices, their eigenstructure, and quartic relation vectors.

Rows and columns follow :func:`schottkykit.charalg.char_order`.  Every check
here is exact: integer products are either computed in float64 below the
2**53 exactness bound or with Python integers, and ranks are certified either
by fraction-free elimination or by a modular lower bound matched against an
upper bound.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .charalg import Characteristic, char_order, k_even, k_odd
from .exactla import bareiss_rank, certified_rank_pair, exact_matmul, is_zero, rank_mod_p

FULL = "Full"
EVEN_EVEN = "EvenEven"
ODD_ODD = "OddOdd"
EVEN_ODD = "EvenOdd"
KINDS = (FULL, EVEN_EVEN, ODD_ODD, EVEN_ODD)

FULL_GENUS_CAP = 8
BLOCK_GENUS_CAP = 8
EIGEN_FULL_CAP = 4
EIGEN_EVEN_CAP = 6
BAREISS_SIZE = 140

U1, U2, U3, U4 = "U1", "U2", "U3", "U4"
VARIANTS = (U1, U2, U3, U4)


class MatrixSizeError(ValueError):
    pass


class EigenCheckError(AssertionError):
    """An exact eigenstructure identity failed; the message names the check."""


@dataclass(frozen=True)
class PairingMatrix:
    genus: int
    kind: str
    entries: np.ndarray = field(repr=False)

    @property
    def shape(self):
        return self.entries.shape


def _pairing_block(rows: Sequence[Characteristic], cols: Sequence[Characteristic]) -> np.ndarray:
    re = np.array([c.eps for c in rows], dtype=np.int64)
    rd = np.array([c.delta for c in rows], dtype=np.int64)
    ce = np.array([c.eps for c in cols], dtype=np.int64)
    cd = np.array([c.delta for c in cols], dtype=np.int64)
    x = (re[:, None] & cd[None, :]) ^ (ce[None, :] & rd[:, None])
    # parity of popcount
    par = np.zeros_like(x)
    while np.any(x):
        par ^= x & 1
        x >>= 1
    out = (1 - 2 * par).astype(np.int8)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=32)
def _cached(genus: int, kind: str) -> np.ndarray:
    order = char_order(genus)
    if kind == FULL:
        return _pairing_block(order.full_list, order.full_list)
    if kind == EVEN_EVEN:
        return _pairing_block(order.even_list, order.even_list)
    if kind == ODD_ODD:
        return _pairing_block(order.odd_list, order.odd_list)
    return _pairing_block(order.even_list, order.odd_list)


def build_pairing_matrix(genus: int, kind: str = FULL) -> PairingMatrix:
    """Matrix of Weil pairings e(m, n) over characteristics in canonical order."""
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}; expected one of {KINDS}")
    if genus < 1:
        raise ValueError("genus must be >= 1")
    cap = FULL_GENUS_CAP if kind == FULL else BLOCK_GENUS_CAP
    if genus > cap:
        raise MatrixSizeError(f"{kind} pairing matrix at genus {genus} exceeds the cap {cap}")
    return PairingMatrix(genus, kind, _cached(genus, kind))


def m_plus(genus: int) -> np.ndarray:
    return build_pairing_matrix(genus, EVEN_EVEN).entries.astype(np.int64)


def m_minus(genus: int) -> np.ndarray:
    return build_pairing_matrix(genus, ODD_ODD).entries.astype(np.int64)


def n_block(genus: int) -> np.ndarray:
    return build_pairing_matrix(genus, EVEN_ODD).entries.astype(np.int64)


def m_full(genus: int) -> np.ndarray:
    return build_pairing_matrix(genus, FULL).entries.astype(np.int64)


def assemble_m_plus(genus: int) -> np.ndarray:
    """M+(g) from the 4x4 block layout over M+(g-1), N(g-1), M-(g-1)."""
    if genus < 2:
        raise ValueError("block layout needs genus >= 2")
    a, n, b = m_plus(genus - 1), n_block(genus - 1), m_minus(genus - 1)
    return np.block(
        [
            [a, a, a, n],
            [a, a, -a, -n],
            [a, -a, a, -n],
            [n.T, -n.T, -n.T, b],
        ]
    )


# ---------------------------------------------------------------------------
# eigenstructure


def dim_plus_top(g: int) -> int:
    """dim of the 2^g eigenspace of M+(g)."""
    return (2**g + 1) * (2 ** (g - 1) + 1) // 3


def dim_minus_top(g: int) -> int:
    """dim of the -2^g eigenspace of M-(g)."""
    return (2**g - 1) * (2 ** (g - 1) - 1) // 3


def dim_mixed(g: int) -> int:
    """dim of the -2^(g-1) eigenspace of M+(g) (and of 2^(g-1) for M-(g))."""
    return (4**g - 1) // 3


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0


@dataclass
class EigenReport:
    genus: int
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, passed, detail="", seconds=0.0):
        self.checks.append(Check(name, bool(passed), detail, seconds))

    def failures(self):
        return [c for c in self.checks if not c.passed]


def _shift(a: np.ndarray, lam: int) -> np.ndarray:
    return a + lam * np.eye(a.shape[0], dtype=np.int64)


def _rank(a: np.ndarray) -> int:
    if min(a.shape) <= BAREISS_SIZE:
        rows = a.tolist() if a.shape[0] <= a.shape[1] else a.T.tolist()
        return bareiss_rank(rows)
    raise ValueError("matrix too large for Bareiss")


def _pair_ranks(a: np.ndarray, b: np.ndarray, prod_zero: bool):
    """Exact ranks of two matrices with a b = 0."""
    if max(a.shape) <= BAREISS_SIZE:
        return _rank(a), _rank(b)
    return certified_rank_pair(a, b, prod_zero)


def _annihilator_checks(rep: EigenReport, label: str, a: np.ndarray, lam1: int, lam2: int,
                        dim1: int, dim2: int) -> None:
    """(A - lam1)(A - lam2) = 0 plus ranks that pin the eigenspace dimensions."""
    t0 = time.perf_counter()
    p = _shift(a, -lam1)
    q = _shift(a, -lam2)
    zero = is_zero(exact_matmul(p, q))
    rep.add(f"{label}: (A - {lam1})(A - {lam2}) = 0", zero, seconds=time.perf_counter() - t0)
    t0 = time.perf_counter()
    ranks = _pair_ranks(p, q, zero)
    if ranks is None:
        rep.add(f"{label}: eigenspace ranks certified", False, "modular ranks do not sum to the size")
        return
    rp, rq = ranks
    # columns of (A - lam2) span the lam1-eigenspace, so rank(A - lam2) = dim1
    rep.add(f"{label}: rank(A - {lam2}) = {dim1}", rq == dim1, f"got {rq}", time.perf_counter() - t0)
    rep.add(f"{label}: rank(A - {lam1}) = {dim2}", rp == dim2, f"got {rp}")


def verify_eigenstructure(genus: int, full: bool | None = None) -> EigenReport:
    """Exact certificates for the two-eigenvalue structure of M, M+ and M-.

    The Full matrix is checked for genus <= 4; M+/M- blocks up to genus 6.
    """
    if genus < 1:
        raise ValueError("genus must be >= 1")
    if genus > EIGEN_EVEN_CAP:
        raise MatrixSizeError(f"eigenstructure checks are capped at genus {EIGEN_EVEN_CAP}")
    if full is None:
        full = genus <= EIGEN_FULL_CAP
    if full and genus > EIGEN_FULL_CAP:
        raise MatrixSizeError(f"Full-matrix checks are capped at genus {EIGEN_FULL_CAP}")
    g = genus
    top, half = 2**g, 2 ** (g - 1)
    kp, km = k_even(g), k_odd(g)
    rep = EigenReport(g)
    mp, mm, n = m_plus(g), m_minus(g), n_block(g)

    if full:
        m = m_full(g)
        rep.add("M is symmetric", np.array_equal(m, m.T))
        rep.add("M squared = 4^g I", np.array_equal(exact_matmul(m, m), _shift(np.zeros_like(m), 4**g)))
        _annihilator_checks(rep, "M", m, top, -top, kp, km)
        blocks_ok = (
            np.array_equal(m[:kp, :kp], mp) and np.array_equal(m[kp:, kp:], mm) and np.array_equal(m[:kp, kp:], n)
        )
        rep.add("M has blocks [[M+, N], [N^t, M-]]", blocks_ok)

    if g >= 2:
        rep.add("M+ equals its block assembly from genus g-1", np.array_equal(assemble_m_plus(g), mp))
    _annihilator_checks(rep, "M+", mp, top, -half, dim_plus_top(g), dim_mixed(g))
    if g >= 2:
        _annihilator_checks(rep, "M-", mm, -top, half, dim_minus_top(g), dim_mixed(g))
    else:
        rep.add("M-: equals [2^(g-1)] at genus 1", mm.tolist() == [[1]])

    # eigenspace characterizations on bases given by annihilator columns
    top_basis = _shift(mp, half)  # columns: 2^g eigenvectors of M+
    rep.add("M+ X = 2^g X  =>  N^t X = 0", is_zero(exact_matmul(n.T, top_basis)))
    try:
        nt_rank = neg_eigenspace_rank(g)
    except EigenCheckError as exc:
        nt_rank = str(exc)
    # ker N^t has dimension kp - rank N; certified equal when rank N = dim_mixed
    rep.add("N^t X = 0  =>  M+ X = 2^g X (dimension count)", nt_rank == dim_mixed(g), f"rank N = {nt_rank}")
    if g >= 2:
        low_basis = _shift(mm, -half)  # columns: -2^g eigenvectors of M-
        rep.add("M- Y = -2^g Y  =>  N Y = 0", is_zero(exact_matmul(n, low_basis)))
    if full:
        m = m_full(g)
        pos = _shift(m, top)  # columns span the +2^g eigenspace of M
        x, y = pos[:kp], pos[kp:]
        rep.add(
            "M v = 2^g v  =>  M- Y = 2^(g-1) Y = N^t X",
            np.array_equal(exact_matmul(mm, y), half * y) and np.array_equal(exact_matmul(n.T, x), half * y),
        )
        neg = _shift(m, -top)  # columns span the -2^g eigenspace of M
        x, y = neg[:kp], neg[kp:]
        rep.add(
            "M v = -2^g v  =>  M+ X = -2^(g-1) X = N Y",
            np.array_equal(exact_matmul(mp, x), -half * x) and np.array_equal(exact_matmul(n, y), -half * x),
        )
    return rep


def neg_eigenspace_basis(genus: int) -> list[list[int]]:
    """Columns of N(g), each a -2^(g-1) eigenvector of M+(g), spanning that eigenspace.

    Raises EigenCheckError if a column fails the eigenvector identity or the
    span has the wrong rank.
    """
    if genus < 1 or genus > EIGEN_EVEN_CAP:
        raise MatrixSizeError(f"genus must be in 1..{EIGEN_EVEN_CAP}")
    g = genus
    mp, n = m_plus(g), n_block(g)
    half = 2 ** (g - 1)
    if not np.array_equal(exact_matmul(mp, n), -half * n):
        raise EigenCheckError(f"a column of N({g}) is not a -2^(g-1) eigenvector of M+({g})")
    r = neg_eigenspace_rank(g)
    if r != dim_mixed(g):
        raise EigenCheckError(f"columns of N({g}) span rank {r}, expected {dim_mixed(g)}")
    return [list(map(int, col)) for col in n.T]


def neg_eigenspace_rank(genus: int) -> int:
    """Exact rank of the column span of N(g)."""
    n = n_block(genus)
    if min(n.shape) <= BAREISS_SIZE:
        return _rank(n)
    # lower bound from mod p; upper bound: columns lie in the -2^(g-1)
    # eigenspace whose dimension is kp - rank(M+ + 2^(g-1)) <= kp - lower bound
    low = rank_mod_p(n)
    mp = m_plus(genus)
    shifted = _shift(mp, 2 ** (genus - 1))
    upper = k_even(genus) - rank_mod_p(shifted)
    if low == upper:
        return low
    raise EigenCheckError(f"rank of N({genus}) not certified: lower {low}, upper {upper}")


# ---------------------------------------------------------------------------
# relation vectors


def _as_vec(x) -> np.ndarray:
    arr = np.asarray(x)
    if arr.dtype == object:
        return arr
    return arr.astype(np.int64)


def is_eigenvector(matrix: np.ndarray, x, lam: int) -> bool:
    x = _as_vec(x)
    return bool(np.array_equal(exact_matmul(matrix, x[:, None])[:, 0], lam * x))


def doubling_lift(x, variant: str, companion=None, genus: int | None = None) -> list[int]:
    """Lift a genus g-1 coefficient vector to a -2^(g-1) eigenvector of M+(g).

    Block layouts over the canonical even order of genus g:
    U1 (X, X, 0, 0), U2 (X, 0, X, 0), U3 (X, 0, 0, Y), U4 (X, -X, -X, 0).
    U3 needs the companion Y with (X, Y) a -2^(g-1) eigenvector of M(g-1).
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    x = _as_vec(x)
    h = _genus_from_even_length(len(x)) if genus is None else genus - 1
    g = h + 1
    kp, km = k_even(h), k_odd(h)
    if len(x) != kp:
        raise ValueError(f"X has length {len(x)}, expected {kp} at genus {h}")
    zp = np.zeros(kp, dtype=x.dtype)
    zm = np.zeros(km, dtype=x.dtype)
    if variant in (U1, U2):
        if not is_eigenvector(m_plus(h), x, -(2 ** (h - 1))):
            raise EigenCheckError(f"{variant} needs X to be a -2^(g-2) eigenvector of M+({h})")
        blocks = [x, x, zp, zm] if variant == U1 else [x, zp, x, zm]
    elif variant == U3:
        if companion is None:
            raise ValueError("U3 needs the companion vector Y")
        y = _as_vec(companion)
        if len(y) != km:
            raise ValueError(f"Y has length {len(y)}, expected {km}")
        if h > EIGEN_FULL_CAP + 1:
            raise MatrixSizeError("U3 precondition needs the Full matrix; genus too large")
        if not is_eigenvector(m_full(h), np.concatenate([x, y]), -(2**h)):
            raise EigenCheckError(f"U3 needs (X, Y) to be a -2^(g-1) eigenvector of M({h})")
        blocks = [x, zp, zp, y]
    else:
        if not is_eigenvector(m_plus(h), x, 2**h):
            raise EigenCheckError(f"U4 needs X to be a 2^(g-1) eigenvector of M+({h})")
        blocks = [x, -x, -x, zm]
    out = np.concatenate(blocks)
    if not is_eigenvector(m_plus(g), out, -(2 ** (g - 1))):
        raise EigenCheckError(f"{variant} lift is not a -2^(g-1) eigenvector of M+({g})")
    return [int(v) for v in out]


def _genus_from_even_length(n: int) -> int:
    for g in range(1, 17):
        if k_even(g) == n:
            return g
    raise ValueError(f"{n} is not the number of even characteristics of any genus")


def lift_space_ranks(genus: int) -> dict:
    """Exact ranks of the spanning sets of U1..U4 at genus g and of their union."""
    h = genus - 1
    if h < 1:
        raise ValueError("need genus >= 2")
    if h > EIGEN_FULL_CAP:
        raise MatrixSizeError("lift dimension check needs the Full matrix at genus g-1")
    kp, km = k_even(h), k_odd(h)
    mp = m_plus(h)
    neg = _shift(mp, -(2**h))  # columns: -2^(h-1) eigenvectors
    pos = _shift(mp, 2 ** (h - 1))  # columns: 2^h eigenvectors
    mneg = _shift(m_full(h), -(2**h))  # columns: -2^h eigenvectors of M(h)
    parts = {}
    cols = {U1: [], U2: [], U3: [], U4: []}
    for c in neg.T:
        cols[U1].append(np.concatenate([c, c, 0 * c, np.zeros(km, dtype=np.int64)]))
        cols[U2].append(np.concatenate([c, 0 * c, c, np.zeros(km, dtype=np.int64)]))
    for c in mneg.T:
        x, y = c[:kp], c[kp:]
        cols[U3].append(np.concatenate([x, 0 * x, 0 * x, y]))
    for c in pos.T:
        cols[U4].append(np.concatenate([c, -c, -c, np.zeros(km, dtype=np.int64)]))
    for v in VARIANTS:
        parts[v] = _span_rank(np.array(cols[v]))
    parts["union"] = _span_rank(np.array(cols[U1] + cols[U2] + cols[U3] + cols[U4]))
    parts["expected"] = dim_mixed(genus)
    return parts


def _span_rank(rows: np.ndarray) -> int:
    if min(rows.shape) <= 200:
        r = rows if rows.shape[0] <= rows.shape[1] else rows.T
        return bareiss_rank(r.tolist())
    return rank_mod_p(rows)


# ---------------------------------------------------------------------------
# quartic relations


@dataclass(frozen=True)
class QuarticRelation:
    """Coefficient vector X over even characteristics plus two shift characteristics."""

    genus: int
    coefficients: tuple  # sorted (Characteristic, int) pairs, zeros dropped
    shift_a: Characteristic
    shift_s: Characteristic
    name: str = ""

    def __post_init__(self):
        for m, _ in self.coefficients:
            if m.genus != self.genus:
                raise ValueError(f"coefficient characteristic {m} has wrong genus")
            if not m.is_even():
                raise ValueError(f"coefficient on odd characteristic {m}")
        for s in (self.shift_a, self.shift_s):
            if s.genus != self.genus:
                raise ValueError(f"shift {s} has wrong genus")

    @classmethod
    def from_map(cls, genus: int, coeffs: dict, shift_a=None, shift_s=None, name: str = "") -> "QuarticRelation":
        items = tuple(sorted((m, int(v)) for m, v in coeffs.items() if v))
        za = shift_a if shift_a is not None else Characteristic.zero(genus)
        zs = shift_s if shift_s is not None else Characteristic.zero(genus)
        return cls(genus, items, za, zs, name)

    @classmethod
    def from_vector(cls, genus: int, vec: Iterable[int], shift_a=None, shift_s=None,
                    name: str = "") -> "QuarticRelation":
        order = char_order(genus).even_list
        vec = list(vec)
        if len(vec) != len(order):
            raise ValueError(f"vector length {len(vec)} != {len(order)}")
        return cls.from_map(genus, dict(zip(order, vec)), shift_a, shift_s, name)

    def coefficient_map(self) -> dict:
        return dict(self.coefficients)

    def vector(self) -> list[int]:
        cm = self.coefficient_map()
        return [cm.get(m, 0) for m in char_order(self.genus).even_list]

    def is_trivial(self) -> bool:
        return not self.coefficients

    def to_json(self) -> dict:
        out = {
            "genus": self.genus,
            "coefficients": [{"char": str(m), "value": v} for m, v in self.coefficients],
            "shift_a": str(self.shift_a),
            "shift_s": str(self.shift_s),
        }
        if self.name:
            out["name"] = self.name
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "QuarticRelation":
        coeffs = {Characteristic.parse(c["char"]): int(c["value"]) for c in obj["coefficients"]}
        return cls.from_map(
            int(obj["genus"]),
            coeffs,
            Characteristic.parse(obj["shift_a"]),
            Characteristic.parse(obj["shift_s"]),
            obj.get("name", ""),
        )


def is_valid_relation(r: QuarticRelation) -> bool:
    """True iff the coefficient vector is exactly a -2^(g-1) eigenvector of M+(g).

    The zero vector counts as valid (see QuarticRelation.is_trivial).
    """
    g = r.genus
    x = np.array(r.vector(), dtype=object if any(abs(v) > 2**40 for _, v in r.coefficients) else np.int64)
    if g <= BLOCK_GENUS_CAP:
        return is_eigenvector(m_plus(g), x, -(2 ** (g - 1)))
    raise MatrixSizeError(f"genus {g} exceeds the pairing matrix cap")


X1 = (1, -1, -1)


def catalog_json(relations: Sequence[QuarticRelation], header: dict | None = None) -> dict:
    return {"header": header or {}, "relations": [r.to_json() for r in relations]}
