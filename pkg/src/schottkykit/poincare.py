"""Poincare relations and the near-diagonal behaviour of S_jk.

Near tau = diag(t) + eps*T the lowest order term of S_jk is a power of the
symmetrized Poincare polynomial of the quadruple (1, 2, j, k) times a
theta-constant prefactor that does not depend on T.  The functions here fit
the scaling exponent, compare the ratio across directions, and check the
functional independence of the relations.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import gmpy2
import numpy as np

from .exactla import rational_rank
from .hpnum import DEFAULT_GUARD, LogComplex, ctx, prec_bits, to_mpc
from .schottky import SJIdentity, build_S, evaluate_SJ
from .theta import PeriodMatrix


class DegenerateDirectionError(ValueError):
    pass


class PrecisionTooLowError(RuntimeError):
    pass


def leading_power(g: int) -> int:
    """Power of the symmetrized Poincare polynomial in the leading term of S_jk."""
    if g < 4:
        raise ValueError("needs genus >= 4")
    return 2 ** (3 * 2 ** (g - 4) - 3)


def leading_degree(g: int) -> int:
    """d(g) = 8 * 2^(3*2^(g-4) - 3): degree in the off-diagonal entries."""
    return 8 * leading_power(g)


@dataclass(frozen=True)
class PoincareQuadruple:
    i: int
    j: int
    k: int
    l: int

    def __post_init__(self):
        if not 1 <= self.i < self.j < self.k < self.l:
            raise ValueError(f"need 1 <= i < j < k < l, got {self.as_tuple()}")

    def as_tuple(self):
        return (self.i, self.j, self.k, self.l)


def _entry(T, a: int, b: int):
    """1-based symmetric entry of a PeriodMatrix, nested list or dict {(a, b): value}."""
    if isinstance(T, PeriodMatrix):
        return T[a - 1, b - 1]
    if isinstance(T, dict):
        return T[(a, b)] if (a, b) in T else T[(b, a)]
    return T[a - 1][b - 1]


def _genus_of(T) -> int:
    if isinstance(T, PeriodMatrix):
        return T.genus
    if isinstance(T, dict):
        return max(max(k) for k in T)
    return len(T)


def poincare_terms(q: PoincareQuadruple, T):
    i, j, k, l = q.as_tuple()
    if _genus_of(T) < l:
        raise ValueError(f"matrix genus {_genus_of(T)} is smaller than index {l}")
    e = lambda a, b: _entry(T, a, b)  # noqa: E731
    p1 = e(i, j) * e(j, k) * e(k, l) * e(l, i)
    p2 = e(i, k) * e(k, l) * e(l, j) * e(j, i)
    p3 = e(i, l) * e(l, j) * e(j, k) * e(k, i)
    return p1, p2, p3


def poincare_symmetrized(q: PoincareQuadruple, T):
    """P1^2 + P2^2 + P3^2 - 2(P1 P2 + P1 P3 + P2 P3) in the entries of T."""
    p1, p2, p3 = poincare_terms(q, T)
    return p1 * p1 + p2 * p2 + p3 * p3 - 2 * (p1 * p2 + p1 * p3 + p2 * p3)


def poincare_branch_product(q: PoincareQuadruple, T) -> complex:
    """Product of sqrt(P1) +- sqrt(P2) +- sqrt(P3) over the four sign choices (double precision)."""
    import cmath

    p1, p2, p3 = (complex(x) for x in poincare_terms(q, T))
    r1, r2, r3 = cmath.sqrt(p1), cmath.sqrt(p2), cmath.sqrt(p3)
    out = 1
    for s2, s3 in itertools.product((1, -1), repeat=2):
        out *= r1 + s2 * r2 + s3 * r3
    return out


# ---------------------------------------------------------------------------
# directions


def random_direction(genus: int, seed: int, complex_entries: bool = False) -> list[list[float]]:
    """Symmetric zero-diagonal direction with |T_ab| in [0.5, 1.5] and random signs."""
    rng = np.random.default_rng(seed)
    T = [[0.0] * genus for _ in range(genus)]
    for a in range(genus):
        for b in range(a + 1, genus):
            mag = rng.uniform(0.5, 1.5)
            if complex_entries:
                v = complex(mag * math.cos(rng.uniform(0, 2 * math.pi)), mag * math.sin(rng.uniform(0, 2 * math.pi)))
            else:
                v = mag * (1 if rng.integers(0, 2) else -1)
            T[a][b] = T[b][a] = v
    return T


def default_diagonal(genus: int, seed: int = 0) -> list[complex]:
    rng = np.random.default_rng(seed + 1000)
    return [complex(rng.uniform(-0.5, 0.5), rng.uniform(1.0, 1.5)) for _ in range(genus)]


def _coerce(x, bits: int):
    """mpc from a float, complex, Fraction, string or mpc."""
    with ctx(bits):
        if isinstance(x, Fraction):
            return gmpy2.mpc(gmpy2.mpq(x.numerator, x.denominator), precision=bits)
        return to_mpc(x, bits)


def near_diagonal(t: Sequence, T, eps, bits: int) -> PeriodMatrix:
    g = len(t)
    with ctx(bits):
        e = _coerce(eps, bits)
        rows = tuple(
            tuple(_coerce(t[a], bits) if a == b else e * _coerce(T[a][b], bits) for b in range(g))
            for a in range(g)
        )
    return PeriodMatrix(g, rows)


# ---------------------------------------------------------------------------
# scaling


@dataclass
class FitResult:
    slope: float
    log_coefficient: float
    log_values: list
    ladder: list

    def to_json(self):
        return {"slope": self.slope, "log_coefficient": self.log_coefficient,
                "log_values": self.log_values, "ladder": self.ladder}


def leading_order_fit(s: SJIdentity, t: Sequence, T, eps_ladder: Sequence[float], digits: int = 40,
                      guard: int = DEFAULT_GUARD, branch_seed: int = 0) -> FitResult:
    """Least-squares slope of log|S(diag(t) + eps T)| against log eps."""
    if not eps_ladder or any(e <= 0 or e >= 0.1 for e in eps_ladder):
        raise ValueError("ladder values must lie in (0, 0.1)")
    if any(b >= a for a, b in zip(eps_ladder, eps_ladder[1:])):
        raise ValueError("ladder must be strictly decreasing")
    bits = prec_bits(digits, guard)
    logs = []
    for eps in eps_ladder:
        val = evaluate_SJ(s, near_diagonal(t, T, eps, bits), digits, branch_seed, guard)
        if val.zero:
            raise DegenerateDirectionError(f"S vanishes exactly at eps={eps}; direction too degenerate")
        logs.append(float(val.log_magnitude))
    if any(b >= a for a, b in zip(logs, logs[1:])):
        raise PrecisionTooLowError("|S| is not decreasing along the ladder; raise the precision")
    x = np.log(np.asarray(eps_ladder, dtype=float))
    slope, icpt = np.polyfit(x, np.asarray(logs), 1)
    return FitResult(float(slope), float(icpt), logs, list(eps_ladder))


@dataclass
class RatioReport:
    genus: int
    quadruple: tuple
    eps: float
    ratios: list  # LogComplex
    max_pairwise: float
    tolerance: float
    passed: bool

    def to_json(self):
        return {
            "genus": self.genus,
            "quadruple": list(self.quadruple),
            "eps": self.eps,
            "ratios": [r.to_json() for r in self.ratios],
            "max_pairwise": self.max_pairwise,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


def poincare_ratio_test(genus: int, j: int, k: int, t: Sequence, directions: Sequence, eps: float,
                        digits: int = 40, guard: int = DEFAULT_GUARD, tolerance: float | None = None
                        ) -> RatioReport:
    """Ratios S_jk(diag(t)+eps T) / (Q_{12jk}(T)^p eps^d) must agree across directions.

    p = leading_power(g), d = leading_degree(g); relative tolerance 20*eps
    unless given.
    """
    s = build_S(genus, j, k)
    q = PoincareQuadruple(1, 2, j, k)
    bits = prec_bits(digits, guard)
    power, degree = leading_power(genus), leading_degree(genus)
    ratios = []
    with ctx(bits):
        for T in directions:
            psym = poincare_symmetrized(q, [[_coerce(x, bits) for x in row] for row in T])
            if psym == 0:
                raise DegenerateDirectionError("direction lies on the Poincare locus (symmetrized value 0)")
            val = evaluate_SJ(s, near_diagonal(t, T, eps, bits), digits, 0, guard)
            denom = LogComplex.from_complex(psym, bits) ** power
            with ctx(bits):
                log_eps = gmpy2.log(gmpy2.mpfr(eps)) * degree
                denom = denom * LogComplex(log_eps, gmpy2.mpfr(0), False)
                ratio = val * LogComplex(-denom.log_magnitude, -denom.phase, False)
            ratios.append(ratio)
    worst = 0.0
    for a, b in itertools.combinations(ratios, 2):
        worst = max(worst, float(a.relative_difference(b)))
    tol = 20 * eps if tolerance is None else tolerance
    return RatioReport(genus, q.as_tuple(), eps, ratios, worst, tol, worst <= tol)


# ---------------------------------------------------------------------------
# independence


def pair_list(genus: int) -> list[tuple[int, int]]:
    return [(a, b) for a in range(3, genus + 1) for b in range(a + 1, genus + 1)]


def random_rational_point(genus: int, seed: int, den: int = 97) -> dict:
    """Nonzero rational values for every tau_ab, a < b."""
    rng = np.random.default_rng(seed)
    pt = {}
    for a in range(1, genus + 1):
        for b in range(a + 1, genus + 1):
            num = 0
            while num == 0:
                num = int(rng.integers(-5 * den, 5 * den))
            pt[(a, b)] = Fraction(num, den)
    return pt


class _Dual:
    """a + b*d with d^2 = 0, for exact first derivatives."""

    __slots__ = ("a", "b")

    def __init__(self, a, b=0):
        self.a, self.b = a, b

    def _lift(self, o):
        return o if isinstance(o, _Dual) else _Dual(o, 0)

    def __add__(self, o):
        o = self._lift(o)
        return _Dual(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, o):
        o = self._lift(o)
        return _Dual(self.a - o.a, self.b - o.b)

    def __rsub__(self, o):
        return self._lift(o) - self

    def __mul__(self, o):
        o = self._lift(o)
        return _Dual(self.a * o.a, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__


def poincare_jacobian(genus: int, point: dict) -> list[list]:
    """d Q_{12jk} / d tau_ab for 3 <= j < k <= g (rows) and 3 <= a < b <= g (columns)."""
    if genus < 4:
        raise ValueError("needs genus >= 4")
    pairs = pair_list(genus)
    rows = []
    for j, k in pairs:
        q = PoincareQuadruple(1, 2, j, k)
        row = []
        for ab in pairs:
            T = {key: _Dual(v, 1 if key == ab else 0) for key, v in point.items()}
            row.append(poincare_symmetrized(q, T).b)
        rows.append(row)
    return rows


def independence_rank_poincare(genus: int, point: dict, exact: bool = True) -> int:
    """Rank of the Jacobian of the (g-2)(g-3)/2 symmetrized relations Q_{12jk}."""
    if any(v == 0 for v in point.values()):
        raise ValueError("all tau_ab must be nonzero")
    jac = poincare_jacobian(genus, point)
    if exact:
        return rational_rank([[Fraction(x) for x in row] for row in jac])
    return int(np.linalg.matrix_rank(np.array([[complex(x) for x in row] for row in jac])))


@dataclass
class SJacobianReport:
    genus: int
    eps: float
    h: float
    digits: int
    pairs: list
    normalized: list = field(default_factory=list)
    raw_log10: list = field(default_factory=list)
    min_singular_value: float = 0.0
    raw_min_singular_value: float = 0.0
    retried: bool = False
    passed: bool = False

    def to_json(self):
        return {
            "genus": self.genus, "eps": self.eps, "h": self.h, "precision": self.digits,
            "pairs": [list(p) for p in self.pairs],
            "normalized_abs": [[abs(x) for x in row] for row in self.normalized],
            "min_singular_value": self.min_singular_value,
            "raw_min_singular_value": self.raw_min_singular_value,
            "retried": self.retried, "pass": self.passed,
        }


def _s_jacobian(genus, t, T, eps, digits, guard):
    bits = prec_bits(digits, guard)
    pairs = pair_list(genus)
    forms = [build_S(genus, j, k) for j, k in pairs]
    base = near_diagonal(t, T, eps, bits)
    h = eps / 100
    jac = []
    noisy = False
    floor = 10.0 ** (-(digits - 10))
    for s in forms:
        row = []
        ref = evaluate_SJ(s, base, digits, 0, guard)
        for a, b in pairs:
            plus = evaluate_SJ(s, base.perturbed(a - 1, b - 1, h), digits, 0, guard)
            minus = evaluate_SJ(s, base.perturbed(a - 1, b - 1, -h), digits, 0, guard)
            with ctx(bits):
                # scale by |S(base)| so the difference is taken on O(1) numbers
                inv = LogComplex(-ref.log_magnitude, gmpy2.mpfr(0), False)
                d = ((plus * inv).to_complex(bits) - (minus * inv).to_complex(bits)) / (2 * h)
            row.append(complex(d))
        mx = max(abs(x) for x in row)
        if mx * 2 * h < floor * 100:
            noisy = True
        jac.append((row, float(ref.log_magnitude) / math.log(10)))
    return pairs, jac, noisy, h


def independence_rank_S(genus: int, t: Sequence, T, eps: float = 1e-3, digits: int | None = None,
                        guard: int = DEFAULT_GUARD) -> SJacobianReport:
    """Row-normalized central-difference Jacobian of the S_jk in the tau_ab, 3 <= a < b <= g.

    PASS iff its smallest singular value exceeds 0.5.
    """
    if genus not in (4, 5):
        raise ValueError("independence_rank_S supports genus 4 and 5")
    if digits is None:
        digits = 120 if genus == 5 else 40
    retried = False
    pairs, jac, noisy, h = _s_jacobian(genus, t, T, eps, digits, guard)
    if noisy:
        retried = True
        digits += 40
        pairs, jac, noisy, h = _s_jacobian(genus, t, T, eps, digits, guard)
    rows = [np.array(r) for r, _ in jac]
    norm = np.array([r / np.abs(r).max() for r in rows])
    raw = np.array([np.array(r) * 10.0 ** lg for r, lg in jac]) if genus == 4 else None
    smin = float(np.linalg.svd(norm, compute_uv=False).min())
    rep = SJacobianReport(genus, eps, h, digits, pairs, norm.tolist(), [lg for _, lg in jac], smin,
                          retried=retried)
    if raw is not None:
        rep.raw_min_singular_value = float(np.linalg.svd(raw, compute_uv=False).min())
    rep.passed = (smin > 0.5) and not noisy
    return rep
