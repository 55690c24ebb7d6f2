"""High-precision scalars.

Complex values are ``gmpy2.mpc`` objects; each carries its own precision in
bits, so ``HPComplex`` is simply an alias.  :class:`LogComplex` stores a
product as (log |z|, arg z) so that products of thousands of tiny factors
never leave the representable range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2

HPComplex = gmpy2.mpc

DEFAULT_PRECISION = 40
DEFAULT_GUARD = 10


def prec_bits(digits: int, guard: int = DEFAULT_GUARD) -> int:
    """Working precision in bits for ``digits`` decimal digits plus guard digits."""
    return int(math.ceil((digits + guard) * math.log2(10))) + 8


def ctx(bits: int):
    return gmpy2.context(precision=bits)


def to_mpc(x, bits: int) -> gmpy2.mpc:
    with ctx(bits):
        if isinstance(x, str):
            return gmpy2.mpc(x.replace(" ", ""), precision=bits)
        if isinstance(x, (tuple, list)):
            return gmpy2.mpc(_to_mpfr(x[0], bits), _to_mpfr(x[1], bits), precision=bits)
        if isinstance(x, complex):
            return gmpy2.mpc(x, precision=bits)
        return gmpy2.mpc(x, precision=bits)


def _to_mpfr(x, bits: int):
    return gmpy2.mpfr(x, precision=bits)


def pi(bits: int):
    with ctx(bits):
        return gmpy2.const_pi(precision=bits)


@dataclass(frozen=True)
class LogComplex:
    """z = exp(log_magnitude + i*phase), or exactly zero when ``zero`` is set.

    ``log_magnitude`` and ``phase`` are mpfr values; phase is kept in
    (-pi, pi].
    """

    log_magnitude: object
    phase: object
    zero: bool = False

    @classmethod
    def exact_zero(cls, bits: int = 64) -> "LogComplex":
        z = gmpy2.mpfr(0, precision=bits)
        return cls(z, z, True)

    @classmethod
    def one(cls, bits: int) -> "LogComplex":
        z = gmpy2.mpfr(0, precision=bits)
        return cls(z, z, False)

    @classmethod
    def from_complex(cls, z, bits: int | None = None) -> "LogComplex":
        bits = bits or z.precision[0]
        with ctx(bits):
            if z == 0:
                return cls.exact_zero(bits)
            return cls(gmpy2.log(abs(z)), gmpy2.phase(z), False)

    @property
    def bits(self) -> int:
        return self.log_magnitude.precision

    def __mul__(self, other: "LogComplex") -> "LogComplex":
        bits = max(self.bits, other.bits)
        if self.zero or other.zero:
            return LogComplex.exact_zero(bits)
        with ctx(bits):
            return LogComplex(self.log_magnitude + other.log_magnitude, _wrap(self.phase + other.phase, bits))

    def __neg__(self) -> "LogComplex":
        if self.zero:
            return self
        with ctx(self.bits):
            return LogComplex(self.log_magnitude, _wrap(self.phase + gmpy2.const_pi(), self.bits))

    def __pow__(self, k: int) -> "LogComplex":
        if self.zero:
            return self if k > 0 else LogComplex.one(self.bits)
        with ctx(self.bits):
            return LogComplex(self.log_magnitude * k, _wrap(self.phase * k, self.bits))

    def to_complex(self, bits: int | None = None):
        bits = bits or self.bits
        with ctx(bits):
            if self.zero:
                return gmpy2.mpc(0, precision=bits)
            r = gmpy2.exp(self.log_magnitude)
            return gmpy2.mpc(r * gmpy2.cos(self.phase), r * gmpy2.sin(self.phase), precision=bits)

    def log10_abs(self) -> float:
        if self.zero:
            return float("-inf")
        return float(self.log_magnitude) / math.log(10)

    def relative_difference(self, other: "LogComplex"):
        """|self/other - 1|; 0 when both are exact zeros, inf when only one is."""
        if self.zero and other.zero:
            return gmpy2.mpfr(0)
        if self.zero or other.zero:
            return gmpy2.mpfr("inf")
        bits = max(self.bits, other.bits)
        with ctx(bits):
            d = self.log_magnitude - other.log_magnitude
            p = _wrap(self.phase - other.phase, bits)
            return abs(gmpy2.exp(gmpy2.mpc(d, p)) - 1)

    def to_json(self) -> dict:
        return {
            "log_magnitude": None if self.zero else str(self.log_magnitude),
            "phase": None if self.zero else str(self.phase),
            "exact_zero": self.zero,
        }


def _wrap(phase, bits: int):
    """Reduce a phase to (-pi, pi]."""
    with ctx(bits):
        two_pi = 2 * gmpy2.const_pi()
        p = gmpy2.fmod(phase, two_pi)
        if p > gmpy2.const_pi():
            p -= two_pi
        elif p <= -gmpy2.const_pi():
            p += two_pi
        return p


def relative_error(a, b):
    """|a - b| / max(|a|, |b|), zero when both vanish."""
    scale = max(abs(a), abs(b))
    if scale == 0:
        return gmpy2.mpfr(0)
    return abs(a - b) / scale
