"""Exact integer linear algebra used to certify eigenstructure claims.

Two rank routines live here:

* :func:`bareiss_rank` is fraction-free Gaussian elimination over Python
  integers.  It is exact and is used for every matrix small enough for it.
* :func:`rank_mod_p` eliminates modulo a word-size prime.  Its result is a
  rigorous *lower* bound for the rational rank (a minor that is nonzero mod p
  is nonzero over Z), which callers combine with an upper bound to certify.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from . import kernels

PRIME = 2147483629  # largest prime below 2**31


def bareiss_rank(rows: Sequence[Sequence[int]]) -> int:
    """Rank of an integer matrix by fraction-free (Bareiss) elimination."""
    m = [list(map(int, r)) for r in rows]
    if not m:
        return 0
    n_rows, n_cols = len(m), len(m[0])
    rank = 0
    prev = 1
    for c in range(n_cols):
        piv = None
        for r in range(rank, n_rows):
            if m[r][c] != 0:
                piv = r
                break
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        p = m[rank][c]
        prow = m[rank]
        for r in range(rank + 1, n_rows):
            row = m[r]
            f = row[c]
            if f == 0:
                # (p*x - 0*y) / prev, still exact
                for k in range(c + 1, n_cols):
                    row[k] = (p * row[k]) // prev
            else:
                for k in range(c + 1, n_cols):
                    row[k] = (p * row[k] - f * prow[k]) // prev
            row[c] = 0
        prev = p
        rank += 1
        if rank == n_rows:
            break
    return rank


def rational_rank(rows: Sequence[Sequence[Fraction]]) -> int:
    """Rank of a rational matrix: clear denominators row by row, then Bareiss."""
    scaled = []
    for r in rows:
        den = 1
        for x in r:
            den = den * Fraction(x).denominator // _gcd(den, Fraction(x).denominator)
        scaled.append([int(Fraction(x) * den) for x in r])
    return bareiss_rank(scaled)


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def rank_mod_p(a, p: int = PRIME) -> int:
    """Rank of an integer matrix over GF(p); a lower bound for the rank over Q."""
    arr = np.asarray(a, dtype=np.int64) % p
    return kernels.rank_mod_p(np.ascontiguousarray(arr), p)


def exact_matmul(a, b) -> np.ndarray:
    """Exact product of integer matrices.

    Uses float64 BLAS when every partial sum stays below 2**53 (so each
    rounding is exact), falling back to Python integers otherwise.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.dtype == object or b.dtype == object:
        return a.astype(object) @ b.astype(object)
    inner = a.shape[-1]
    bound = int(np.abs(a).max(initial=0)) * int(np.abs(b).max(initial=0)) * inner
    if bound < 2**53:
        out = a.astype(np.float64) @ b.astype(np.float64)
        return np.rint(out).astype(np.int64)
    return a.astype(object) @ b.astype(object)


def certified_rank_pair(a, b, product_is_zero: bool):
    """Exact ranks of A and B when A B = 0 is known exactly.

    Sylvester's inequality gives rank A + rank B <= n; the modular ranks are
    lower bounds.  If the lower bounds already sum to n both are exact and are
    returned, otherwise ``None``.
    """
    if not product_is_zero:
        return None
    n = np.asarray(a).shape[1]
    ra, rb = rank_mod_p(a), rank_mod_p(b)
    if ra + rb == n:
        return ra, rb
    return None


def exact_rank(a, small: int = 140) -> int:
    """Rank over Q; Bareiss for small matrices, otherwise requires certification elsewhere."""
    arr = np.asarray(a)
    if min(arr.shape) <= small:
        rows = arr.tolist() if arr.shape[0] <= arr.shape[1] else arr.T.tolist()
        return bareiss_rank(rows)
    raise ValueError("matrix too large for Bareiss; use a modular certificate")


def is_zero(a) -> bool:
    return not np.any(np.asarray(a) != 0)
