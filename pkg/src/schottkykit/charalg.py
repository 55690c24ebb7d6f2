"""Combinatorics of theta characteristics over (Z/2Z)^2g.

A characteristic ``[eps; delta]`` is stored as two packed bitmasks; bit ``i``
holds column ``i + 1``.  Everything here is exact and side-effect free.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

MAX_GENUS = 16

EVEN = "even"
ODD = "odd"

ETA0 = "eta0"
ETAG = "etag"


class GenusMismatch(ValueError):
    pass


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _bits_to_mask(bits: Sequence[int]) -> int:
    mask = 0
    for i, b in enumerate(bits):
        if b not in (0, 1):
            raise ValueError(f"characteristic entries must be 0 or 1, got {b!r}")
        mask |= b << i
    return mask


@dataclass(frozen=True, order=True)
class Characteristic:
    genus: int
    eps: int
    delta: int

    def __post_init__(self):
        if not 1 <= self.genus <= MAX_GENUS:
            raise ValueError(f"genus {self.genus} outside 1..{MAX_GENUS}")
        full = (1 << self.genus) - 1
        if self.eps & ~full or self.delta & ~full:
            raise ValueError("bit vector longer than genus")

    @classmethod
    def from_rows(cls, eps: Sequence[int], delta: Sequence[int]) -> "Characteristic":
        if len(eps) != len(delta):
            raise ValueError("top and bottom rows must have equal length")
        return cls(len(eps), _bits_to_mask(eps), _bits_to_mask(delta))

    @classmethod
    def parse(cls, text: str) -> "Characteristic":
        """Parse ``"0110;1000"`` (top;bottom) into a characteristic."""
        top, bottom = text.replace(" ", "").strip("[]").split(";")
        return cls.from_rows([int(c) for c in top], [int(c) for c in bottom])

    @classmethod
    def zero(cls, genus: int) -> "Characteristic":
        return cls(genus, 0, 0)

    @property
    def top(self) -> tuple[int, ...]:
        return tuple((self.eps >> i) & 1 for i in range(self.genus))

    @property
    def bottom(self) -> tuple[int, ...]:
        return tuple((self.delta >> i) & 1 for i in range(self.genus))

    def column(self, i: int) -> tuple[int, int]:
        """Column ``i`` (1-based) as ``(top, bottom)``."""
        if not 1 <= i <= self.genus:
            raise IndexError(f"column {i} out of range 1..{self.genus}")
        return (self.eps >> (i - 1)) & 1, (self.delta >> (i - 1)) & 1

    def columns(self) -> list[tuple[int, int]]:
        return [self.column(i) for i in range(1, self.genus + 1)]

    def __add__(self, other: "Characteristic") -> "Characteristic":
        _check_genus(self, other)
        return Characteristic(self.genus, self.eps ^ other.eps, self.delta ^ other.delta)

    def is_even(self) -> bool:
        return _popcount(self.eps & self.delta) % 2 == 0

    def to_json(self) -> dict:
        return {"eps": list(self.top), "delta": list(self.bottom)}

    @classmethod
    def from_json(cls, obj: dict) -> "Characteristic":
        return cls.from_rows(obj["eps"], obj["delta"])

    def __str__(self):
        top = "".join(map(str, self.top))
        bottom = "".join(map(str, self.bottom))
        return f"[{top};{bottom}]"

    __repr__ = __str__


def _check_genus(*chars: Characteristic) -> None:
    g = chars[0].genus
    for c in chars[1:]:
        if c.genus != g:
            raise GenusMismatch(f"genus mismatch: {g} vs {c.genus}")


def parity(m: Characteristic) -> str:
    return EVEN if m.is_even() else ODD


def weil_pairing(m: Characteristic, n: Characteristic) -> int:
    """Return e(m, n) = (-1)^(eps_m . delta_n - eps_n . delta_m)."""
    _check_genus(m, n)
    k = _popcount(m.eps & n.delta) + _popcount(n.eps & m.delta)
    return -1 if k & 1 else 1


def tricharacter(m1: Characteristic, m2: Characteristic, m3: Characteristic) -> int:
    # sum_i eps_i beta_i mu_i + delta_i alpha_i mu_i + delta_i beta_i sigma_i
    _check_genus(m1, m2, m3)
    k = (
        _popcount(m1.eps & m2.delta & m3.delta)
        + _popcount(m1.delta & m2.eps & m3.delta)
        + _popcount(m1.delta & m2.delta & m3.eps)
    )
    return -1 if k & 1 else 1


def _swap_bits(x: int, i: int, j: int) -> int:
    bi, bj = (x >> i) & 1, (x >> j) & 1
    if bi != bj:
        x ^= (1 << i) | (1 << j)
    return x


def swap_columns(m: Characteristic, i: int, j: int) -> Characteristic:
    """Exchange columns ``i`` and ``j`` (1-based)."""
    for k in (i, j):
        if not 1 <= k <= m.genus:
            raise IndexError(f"column {k} out of range 1..{m.genus}")
    return Characteristic(m.genus, _swap_bits(m.eps, i - 1, j - 1), _swap_bits(m.delta, i - 1, j - 1))


def permute_columns(m: Characteristic, swaps: Iterable[tuple[int, int]]) -> Characteristic:
    for i, j in swaps:
        m = swap_columns(m, i, j)
    return m


def append_column(m: Characteristic, col: tuple[int, int]) -> Characteristic:
    a, b = col
    if a not in (0, 1) or b not in (0, 1):
        raise ValueError(f"column entries must be bits, got {col!r}")
    g = m.genus
    return Characteristic(g + 1, m.eps | (a << g), m.delta | (b << g))


def split_last(m: Characteristic) -> tuple[Characteristic, tuple[int, int]]:
    if m.genus == 1:
        raise ValueError("split_last needs genus >= 2")
    g = m.genus - 1
    full = (1 << g) - 1
    return Characteristic(g, m.eps & full, m.delta & full), ((m.eps >> g) & 1, (m.delta >> g) & 1)


def special_two_torsion(kind: str, genus: int) -> Characteristic:
    """The two-torsion points eta_0 = [0..0; 10..0] and eta_g = [0..0; 1..1]."""
    if genus < 1:
        raise ValueError("genus must be >= 1")
    if kind == ETA0:
        return Characteristic(genus, 0, 1)
    if kind == ETAG:
        return Characteristic(genus, 0, (1 << genus) - 1)
    raise ValueError(f"unknown two-torsion kind {kind!r}")


def all_characteristics(genus: int) -> Iterator[Characteristic]:
    n = 1 << genus
    for e in range(n):
        for d in range(n):
            yield Characteristic(genus, e, d)


def orthogonal_complement(eta: Characteristic) -> Iterator[Characteristic]:
    """Characteristics v with e(eta, v) = +1 (additive exponent zero)."""
    return (v for v in all_characteristics(eta.genus) if weil_pairing(eta, v) == 1)


def k_even(genus: int) -> int:
    return 2 ** (genus - 1) * (2**genus + 1)


def k_odd(genus: int) -> int:
    return 2 ** (genus - 1) * (2**genus - 1)


@dataclass(frozen=True)
class CharOrder:
    """Canonical orderings of the even and odd characteristics of a genus.

    Built recursively by appending a last column: the even list is
    ``even(g-1)+[0;0]``, ``even(g-1)+[0;1]``, ``even(g-1)+[1;0]``,
    ``odd(g-1)+[1;1]``; the odd list swaps the roles of even and odd.
    """

    genus: int
    even_list: tuple[Characteristic, ...]
    odd_list: tuple[Characteristic, ...]

    def even_index(self) -> dict[Characteristic, int]:
        return {c: i for i, c in enumerate(self.even_list)}

    def odd_index(self) -> dict[Characteristic, int]:
        return {c: i for i, c in enumerate(self.odd_list)}

    @property
    def full_list(self) -> tuple[Characteristic, ...]:
        return self.even_list + self.odd_list


@lru_cache(maxsize=None)
def char_order(genus: int) -> CharOrder:
    if genus < 1:
        raise ValueError("genus must be >= 1")
    if genus > MAX_GENUS:
        raise ValueError(f"genus {genus} exceeds cap {MAX_GENUS}")
    if genus == 1:
        even = tuple(Characteristic.from_rows([a], [b]) for a, b in ((0, 0), (0, 1), (1, 0)))
        odd = (Characteristic.from_rows([1], [1]),)
        return CharOrder(1, even, odd)
    prev = char_order(genus - 1)
    even = []
    odd = []
    for col in ((0, 0), (0, 1), (1, 0)):
        even.extend(append_column(c, col) for c in prev.even_list)
        odd.extend(append_column(c, col) for c in prev.odd_list)
    even.extend(append_column(c, (1, 1)) for c in prev.odd_list)
    odd.extend(append_column(c, (1, 1)) for c in prev.even_list)
    return CharOrder(genus, tuple(even), tuple(odd))
