"""Theta constants with characteristics at high precision.

All theta constants of a period matrix come out of a single lattice
enumeration: writing ``w = 2n + eps``, every term of every theta constant is
``exp(pi i w^T tau w / 4)`` times a fourth root of unity fixed by ``w mod 4``
and ``delta``.  The enumeration (see :mod:`schottkykit.kernels`) therefore
returns 4**g bucket sums, and a Walsh-Hadamard transform over the bucket
index yields theta[eps; delta] for every characteristic at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import gmpy2
import numpy as np

from . import kernels
from .charalg import Characteristic
from .hpnum import DEFAULT_GUARD, DEFAULT_PRECISION, ctx, prec_bits, to_mpc

MIN_IM_EIGENVALUE = 1e-3
MAX_AXIS_RADIUS = 400
MAX_POINTS_ESTIMATE = 5e8


class PeriodMatrixError(ValueError):
    """The matrix is not a point of the Siegel upper half space."""


class TruncationError(RuntimeError):
    """The certified truncation radius exceeds the configured cap."""


@dataclass(frozen=True)
class PeriodMatrix:
    """Symmetric complex matrix with positive definite imaginary part.

    ``entries`` is a tuple of rows of ``gmpy2.mpc``.  Construction validates
    symmetry exactly and positive definiteness of Im tau numerically; the
    smallest eigenvalue is kept as ``im_min_eigenvalue``.
    """

    genus: int
    entries: tuple

    def __post_init__(self):
        g = self.genus
        if len(self.entries) != g or any(len(row) != g for row in self.entries):
            raise PeriodMatrixError(f"expected a {g}x{g} matrix")
        for a in range(g):
            for b in range(a + 1, g):
                if self.entries[a][b] != self.entries[b][a]:
                    raise PeriodMatrixError(f"not symmetric: tau[{a+1},{b+1}] != tau[{b+1},{a+1}]")
        lam = float(np.linalg.eigvalsh(self.imag_float()).min())
        if not lam > 0:
            raise PeriodMatrixError(f"Im tau is not positive definite (smallest eigenvalue {lam:.3e})")
        object.__setattr__(self, "im_min_eigenvalue", lam)

    @classmethod
    def from_values(cls, values, bits: int = 256) -> "PeriodMatrix":
        """Build from nested lists of complex numbers, strings or (re, im) pairs."""
        rows = tuple(tuple(to_mpc(x, bits) for x in row) for row in values)
        return cls(len(rows), rows)

    @classmethod
    def from_parts(cls, real, imag, bits: int = 256) -> "PeriodMatrix":
        g = len(real)
        rows = tuple(tuple(to_mpc((real[a][b], imag[a][b]), bits) for b in range(g)) for a in range(g))
        return cls(g, rows)

    @classmethod
    def diagonal(cls, t: Sequence, bits: int = 256) -> "PeriodMatrix":
        g = len(t)
        zero = gmpy2.mpc(0, precision=bits)
        rows = tuple(tuple(to_mpc(t[a], bits) if a == b else zero for b in range(g)) for a in range(g))
        return cls(g, rows)

    def __getitem__(self, ab):
        a, b = ab
        return self.entries[a][b]

    def real_float(self) -> np.ndarray:
        return np.array([[float(z.real) for z in row] for row in self.entries])

    def imag_float(self) -> np.ndarray:
        return np.array([[float(z.imag) for z in row] for row in self.entries])

    def is_diagonal(self) -> bool:
        g = self.genus
        return all(self.entries[a][b] == 0 for a in range(g) for b in range(g) if a != b)

    def diagonal_entries(self) -> list:
        return [self.entries[a][a] for a in range(self.genus)]

    def bits(self) -> int:
        return max(z.precision[0] for row in self.entries for z in row)

    def perturbed(self, a: int, b: int, delta) -> "PeriodMatrix":
        """Return tau with delta added to entries (a, b) and (b, a) (0-based)."""
        bits = self.bits()
        rows = [list(r) for r in self.entries]
        with ctx(bits):
            d = to_mpc(delta, bits)
            rows[a][b] = rows[a][b] + d
            if a != b:
                rows[b][a] = rows[b][a] + d
        return PeriodMatrix(self.genus, tuple(tuple(r) for r in rows))

    def plus(self, direction, scale) -> "PeriodMatrix":
        """tau + scale * direction for a symmetric matrix ``direction``."""
        bits = self.bits()
        g = self.genus
        with ctx(bits):
            s = to_mpc(scale, bits)
            rows = tuple(
                tuple(self.entries[a][b] + s * to_mpc(direction[a][b], bits) for b in range(g)) for a in range(g)
            )
        return PeriodMatrix(g, rows)

    def permuted(self, perm: Sequence[int]) -> "PeriodMatrix":
        """Matrix with rows and columns reindexed: new[a][b] = old[perm[a]][perm[b]]."""
        g = self.genus
        rows = tuple(tuple(self.entries[perm[a]][perm[b]] for b in range(g)) for a in range(g))
        return PeriodMatrix(g, rows)

    def to_json(self) -> dict:
        """{"genus": g, "entries": [[re, im], ...]} row-major, decimal strings."""
        return {
            "genus": self.genus,
            "entries": [[_decimal(z.real), _decimal(z.imag)] for row in self.entries for z in row],
        }

    @classmethod
    def from_json(cls, obj: dict, bits: int = 256) -> "PeriodMatrix":
        g = int(obj["genus"])
        flat = obj["entries"]
        if flat and isinstance(flat[0][0], (list, tuple)):
            flat = [z for row in flat for z in row]  # nested rows
        if len(flat) != g * g:
            raise PeriodMatrixError(f"expected {g * g} entries for genus {g}, got {len(flat)}")
        rows = tuple(tuple(to_mpc(tuple(flat[a * g + b]), bits) for b in range(g)) for a in range(g))
        return cls(g, rows)


def _decimal(x) -> str:
    digits = int(x.precision * math.log10(2)) + 2
    return gmpy2.mpfr(x).__format__(f".{digits}g") if x else "0"


def random_period_matrix(genus: int, seed: int, off_scale: float = 0.5, bits: int = 256) -> PeriodMatrix:
    """tau = B + i (A A^T + g I), A uniform in [-1, 1], B symmetric uniform in [-s, s]."""
    if off_scale < 0:
        raise ValueError("off_scale must be >= 0")
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1.0, 1.0, size=(genus, genus))
    b = rng.uniform(-off_scale, off_scale, size=(genus, genus)) if off_scale > 0 else np.zeros((genus, genus))
    b = np.triu(b) + np.triu(b, 1).T
    y = a @ a.T
    y = (y + y.T) / 2 + genus * np.eye(genus)
    return PeriodMatrix.from_parts(b.tolist(), y.tolist(), bits)


# ---------------------------------------------------------------------------
# truncation


@dataclass(frozen=True)
class Truncation:
    radius2: float  # ellipsoid w^T Y w <= radius2, w = 2n + eps
    bounds: tuple[int, ...]
    chol: tuple[tuple[float, ...], ...]
    tail_bound_log10: float
    lam_min: float


def plan_truncation(imag: np.ndarray, digits: int, guard: int) -> Truncation:
    """Pick an ellipsoid whose discarded terms sum to less than 10^-(digits+guard).

    For 0 < s < 1 and Q(w) = w^T Y w > rho^2,
    exp(-pi Q/4) <= exp(-pi (1-s) rho^2 / 4) exp(-pi s Q / 4), and
    sum_w exp(-pi s Q(w)/4) <= B^g with B = 1 + 2/(exp(pi s lam/4) - 1).
    """
    g = imag.shape[0]
    lam = float(np.linalg.eigvalsh(imag).min())
    if lam < MIN_IM_EIGENVALUE:
        raise PeriodMatrixError(f"Im tau too close to singular (smallest eigenvalue {lam:.3e})")
    target = (digits + guard) * math.log(10)
    best = None
    for s in np.linspace(0.02, 0.9, 45):
        log_b = math.log1p(2.0 / math.expm1(math.pi * s * lam / 4))
        rho2 = (target + g * log_b + 1.0) / (math.pi * (1 - s) / 4)
        if best is None or rho2 < best[0]:
            best = (rho2, s, log_b)
    rho2, s, log_b = best
    tail = -math.pi * (1 - s) * rho2 / 4 + g * log_b
    inv = np.linalg.inv(imag)
    bounds = tuple(int(math.floor(math.sqrt(rho2 * inv[a, a]) + 1e-9)) for a in range(g))
    if max(bounds) > MAX_AXIS_RADIUS:
        raise TruncationError(f"axis radius {max(bounds)} exceeds cap {MAX_AXIS_RADIUS}")
    vol = math.pi ** (g / 2) / math.gamma(g / 2 + 1) * rho2 ** (g / 2) / math.sqrt(np.linalg.det(imag))
    if vol > MAX_POINTS_ESTIMATE:
        raise TruncationError(f"about {vol:.2e} lattice points needed; cap is {MAX_POINTS_ESTIMATE:.0e}")
    # upper-triangular R with Y = R^T R
    chol = np.linalg.cholesky(imag).T
    return Truncation(rho2 * (1 + 1e-12) + 1e-9, bounds, tuple(map(tuple, chol)), tail / math.log(10), lam)


# ---------------------------------------------------------------------------
# evaluation


@dataclass
class ThetaTable:
    """All theta constants of one period matrix at one working precision."""

    tau: PeriodMatrix
    digits: int
    guard: int
    bits: int
    values: dict
    points: int
    tail_bound_log10: float
    route: str

    def __getitem__(self, m: Characteristic):
        if m.genus != self.tau.genus:
            raise ValueError(f"characteristic genus {m.genus} != matrix genus {self.tau.genus}")
        if not m.is_even():
            return gmpy2.mpc(0, precision=self.bits)
        return self.values[(m.eps, m.delta)]


def _walsh_hadamard(vec: list) -> list:
    v = list(vec)
    h = 1
    n = len(v)
    while h < n:
        for i in range(0, n, 2 * h):
            for j in range(i, i + h):
                x, y = v[j], v[j + h]
                v[j], v[j + h] = x + y, x - y
        h *= 2
    return v


_I_POWERS = None


def _lattice_table(tau: PeriodMatrix, digits: int, guard: int, backend=None) -> ThetaTable:
    g = tau.genus
    bits = prec_bits(digits, guard)
    trunc = plan_truncation(tau.imag_float(), digits, guard)
    with ctx(bits):
        pi = gmpy2.const_pi()
        ipi = gmpy2.mpc(0, pi)
        diag_tables = []
        for a in range(g):
            t_aa = gmpy2.mpc(tau[a, a], precision=bits)
            w = trunc.bounds[a]
            diag_tables.append([gmpy2.exp(ipi * t_aa * (k * k) / 4) for k in range(-w, w + 1)])
        off_tables = {}
        for a in range(g):
            for c in range(a):
                t_ca = gmpy2.mpc(tau[c, a], precision=bits)
                w = trunc.bounds[a]
                off_tables[(c, a)] = [gmpy2.exp(ipi * t_ca * k / 2) for k in range(-w, w + 1)]
    buckets, count = kernels.theta_buckets(
        g, bits, diag_tables, off_tables, trunc.chol, trunc.bounds, trunc.radius2, backend=backend
    )
    values = {}
    n = 1 << g
    with ctx(bits):
        unit = [gmpy2.mpc(1), gmpy2.mpc(0, 1), gmpy2.mpc(-1), gmpy2.mpc(0, -1)]
        for eps in range(n):
            vec = []
            for p in range(n):
                key = 0
                for a in range(g):
                    r_a = ((eps >> a) & 1) | (((p >> a) & 1) << 1)
                    key += r_a * (4**a)
                vec.append(buckets[key])
            transformed = _walsh_hadamard(vec)
            for delta in range(n):
                k = bin(eps & delta).count("1")
                if k % 2:
                    continue  # odd characteristic
                values[(eps, delta)] = unit[k % 4] * transformed[delta]
    return ThetaTable(tau, digits, guard, bits, values, count, trunc.tail_bound_log10, "lattice")


def _diagonal_table(tau: PeriodMatrix, digits: int, guard: int) -> ThetaTable:
    g = tau.genus
    bits = prec_bits(digits, guard)
    ones = [genus1_thetas(t, digits, guard) for t in tau.diagonal_entries()]
    values = {}
    n = 1 << g
    with ctx(bits):
        for eps in range(n):
            for delta in range(n):
                if bin(eps & delta).count("1") % 2:
                    continue
                v = gmpy2.mpc(1)
                for a in range(g):
                    col = ((eps >> a) & 1, (delta >> a) & 1)
                    if col == (1, 1):
                        v = gmpy2.mpc(0)
                        break
                    v = v * ones[a][col]
                values[(eps, delta)] = v
    return ThetaTable(tau, digits, guard, bits, values, 0, float("-inf"), "diagonal")


@lru_cache(maxsize=64)
def theta_table(tau: PeriodMatrix, digits: int = DEFAULT_PRECISION, guard: int = DEFAULT_GUARD,
                exact_diagonal: bool = True, backend: str | None = None) -> ThetaTable:
    """All even theta constants of ``tau``.

    With ``exact_diagonal`` (the default) an exactly diagonal tau is evaluated
    through the product formula, so characteristics with a [1;1] column give
    exact zeros instead of rounding noise.
    """
    if exact_diagonal and tau.is_diagonal():
        return _diagonal_table(tau, digits, guard)
    return _lattice_table(tau, digits, guard, backend)


def theta_constant(m: Characteristic, tau: PeriodMatrix, digits: int = DEFAULT_PRECISION,
                   guard: int = DEFAULT_GUARD):
    """theta[m](tau) by certified lattice summation; odd m gives exact zero."""
    if m.genus != tau.genus:
        raise ValueError(f"characteristic genus {m.genus} != matrix genus {tau.genus}")
    bits = prec_bits(digits, guard)
    if not m.is_even():
        return gmpy2.mpc(0, precision=bits)
    return theta_table(tau, digits, guard, exact_diagonal=False)[m]


@lru_cache(maxsize=4096)
def genus1_thetas(t, digits: int = DEFAULT_PRECISION, guard: int = DEFAULT_GUARD) -> dict:
    """{(0,0): theta00(t), (0,1): theta01(t), (1,0): theta10(t), (1,1): 0}."""
    bits = prec_bits(digits, guard)
    tab = _lattice_table(PeriodMatrix.diagonal([t], bits), digits, guard)
    out = {(e, d): tab.values[(e, d)] for e, d in ((0, 0), (0, 1), (1, 0))}
    out[(1, 1)] = gmpy2.mpc(0, precision=bits)
    return out


def theta_on_diagonal(m: Characteristic, t: Sequence, digits: int = DEFAULT_PRECISION,
                      guard: int = DEFAULT_GUARD):
    """theta[m](diag(t)) as the product of genus-1 theta constants."""
    if len(t) != m.genus:
        raise ValueError("need one diagonal entry per column")
    bits = prec_bits(digits, guard)
    with ctx(bits):
        v = gmpy2.mpc(1)
        for a, ta in enumerate(t):
            ta = to_mpc(ta, bits)
            if not ta.imag > 0:
                raise PeriodMatrixError(f"diagonal entry {a+1} is not in the upper half plane")
            col = m.column(a + 1)
            if col == (1, 1):
                return gmpy2.mpc(0, precision=bits)
            v = v * genus1_thetas(ta, digits, guard)[col]
    return v


class SeriesCrossCheckError(RuntimeError):
    pass


def theta11_z_derivative(t, digits: int = DEFAULT_PRECISION, guard: int = DEFAULT_GUARD,
                         return_both: bool = False):
    """d/dz theta[1;1](t, z) at z = 0.

    Computed twice: by Jacobi's triple product -pi theta00 theta01 theta10,
    and by the term-wise differentiated series
    sum over odd w of (pi i w) exp(pi i w^2 t / 4) i^w.  The two must agree
    to 10^-(digits - guard) relative or SeriesCrossCheckError is raised.
    """
    bits = prec_bits(digits, guard)
    t = to_mpc(t, bits)
    if not t.imag > 0:
        raise PeriodMatrixError("t must lie in the upper half plane")
    th = genus1_thetas(t, digits, guard)
    with ctx(bits):
        pi = gmpy2.const_pi()
        triple = -pi * th[(0, 0)] * th[(0, 1)] * th[(1, 0)]
        direct = _theta11_series_derivative(t, digits, guard, bits)
        err = abs(triple - direct) / abs(triple)
        if err > gmpy2.mpfr(10) ** (-(digits - guard)):
            raise SeriesCrossCheckError(f"triple product and series disagree: rel err {float(err):.3e}")
    if return_both:
        return triple, direct
    return triple


def _theta11_series_derivative(t, digits, guard, bits):
    y = float(t.imag)
    target = (digits + guard) * math.log(10) + 5
    with ctx(bits):
        pi = gmpy2.const_pi()
        ipi = gmpy2.mpc(0, pi)
        unit = [gmpy2.mpc(1), gmpy2.mpc(0, 1), gmpy2.mpc(-1), gmpy2.mpc(0, -1)]
        total = gmpy2.mpc(0)
        w = 1
        while True:
            # terms w and -w: pi i w e^{pi i w^2 t/4} (i^w - i^-w)
            if math.pi * w * w * y / 4 - math.log(2 * math.pi * w) > target:
                break
            e = gmpy2.exp(ipi * t * (w * w) / 4)
            total += ipi * w * e * (unit[w % 4] - unit[(-w) % 4])
            w += 2
        return total


def heat_equation_prediction(m: Characteristic, t: Sequence, j: int, k: int,
                             digits: int = DEFAULT_PRECISION, guard: int = DEFAULT_GUARD):
    """Linear coefficient of tau_jk in the expansion of theta[m] about diag(t).

    Nonzero only when columns j and k (1-based) are both [1;1]; then it is
    (1/2 pi i) theta11'(t_j) theta11'(t_k) prod_{other m} theta[col_m](t_m).
    """
    bits = prec_bits(digits, guard)
    if m.column(j) != (1, 1) or m.column(k) != (1, 1):
        return gmpy2.mpc(0, precision=bits)
    with ctx(bits):
        v = theta11_z_derivative(t[j - 1], digits, guard) * theta11_z_derivative(t[k - 1], digits, guard)
        v = v / gmpy2.mpc(0, 2 * gmpy2.const_pi())
        for a in range(1, m.genus + 1):
            if a in (j, k):
                continue
            col = m.column(a)
            if col == (1, 1):
                return gmpy2.mpc(0, precision=bits)
            v = v * genus1_thetas(to_mpc(t[a - 1], bits), digits, guard)[col]
    return v


def finite_difference_tau(m: Characteristic, tau: PeriodMatrix, j: int, k: int, h,
                          digits: int = DEFAULT_PRECISION, guard: int = DEFAULT_GUARD):
    """Central difference of theta[m] in the symmetric entry tau_jk (1-based)."""
    bits = prec_bits(digits, guard)
    plus = tau.perturbed(j - 1, k - 1, h)
    minus = tau.perturbed(j - 1, k - 1, -h)
    fp = theta_constant(m, plus, digits, guard)
    fm = theta_constant(m, minus, digits, guard)
    with ctx(bits):
        return (fp - fm) / (2 * to_mpc(h, bits))


def heat_equation_residual(m: Characteristic, tau: PeriodMatrix, j: int, k: int, h,
                           digits: int = DEFAULT_PRECISION, guard: int = DEFAULT_GUARD):
    """|central difference in tau_jk - expansion prediction| at a diagonal tau."""
    if not tau.is_diagonal():
        raise ValueError("the expansion prediction is only available at diagonal tau")
    if not 1 <= j < k <= tau.genus:
        raise ValueError("need 1 <= j < k <= genus")
    if not m.is_even():
        raise ValueError("heat equation residual needs an even characteristic")
    t = tau.diagonal_entries()
    fd = finite_difference_tau(m, tau, j, k, h, digits, guard)
    pred = heat_equation_prediction(m, t, j, k, digits, guard)
    with ctx(prec_bits(digits, guard)):
        return abs(fd - pred)
