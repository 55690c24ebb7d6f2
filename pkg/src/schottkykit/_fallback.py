"""Pure-Python versions of the hot kernels.

These are selected by :mod:`schottkykit.kernels` when the compiled extension
is unavailable; they must produce the same numbers as ``_ckernels`` up to
rounding in the last guard bits.
"""

from __future__ import annotations

import math

import gmpy2
import numpy as np


def rank_mod_p(arr: np.ndarray, p: int) -> int:
    a = arr.copy()
    n_rows, n_cols = a.shape
    rank = 0
    for c in range(n_cols):
        if rank == n_rows:
            break
        nz = np.nonzero(a[rank:, c])[0]
        if nz.size == 0:
            continue
        piv = rank + int(nz[0])
        if piv != rank:
            a[[rank, piv]] = a[[piv, rank]]
        inv = pow(int(a[rank, c]), p - 2, p)
        a[rank, c:] = (a[rank, c:] * inv) % p
        below = a[rank + 1 :, c].copy()
        rows = np.nonzero(below)[0]
        if rows.size:
            # products stay below 2**62 because entries are < 2**31
            sub = a[rank + 1 + rows, c:]
            sub -= (below[rows, None] * a[rank, c:][None, :]) % p
            sub %= p
            a[rank + 1 + rows, c:] = sub
        rank += 1
    return rank


def theta_buckets(g, prec, diag_tables, off_tables, r, bounds, radius2):
    """Sum exp(pi i w^T tau w / 4) over integer w in an ellipsoid, bucketed by w mod 4.

    A term factors as prod_a D_a(w_a) * prod_{c<a} C_ca**(w_c w_a), with
    ``diag_tables[a][k + W_a] = D_a(k)`` and ``off_tables[(c, a)][k + W_a] =
    C_ca**k``.  ``r`` is the upper-triangular float factor of Im tau, the
    ellipsoid is |r w|^2 <= radius2 and ``bounds`` caps |w_a|.  Returns the
    4**g bucket sums (indexed by sum_a (w_a mod 4) 4**a) and the point count.
    """
    one = gmpy2.mpc(1, precision=prec)
    buckets = [gmpy2.mpc(0, precision=prec)] * (4**g)
    count = 0
    w_vec = [0] * g

    def recurse(a, budget, partial, shift, key):
        # shift[c] (c <= a) = prod_{b>a} C_cb**w_b; shift[a] is the base for w_a
        nonlocal count
        raa = r[a][a]
        center = -sum(r[a][b] * w_vec[b] for b in range(a + 1, g)) / raa
        half = math.sqrt(max(budget, 0.0)) / raa
        lo = max(-bounds[a], math.ceil(center - half - 1e-9))
        hi = min(bounds[a], math.floor(center + half + 1e-9))
        if lo > hi:
            return
        base = shift[a]
        cur = base**lo if lo >= 0 else (1 / base) ** (-lo)
        p4 = 4**a
        diag = diag_tables[a]
        wb = bounds[a]
        for wa in range(lo, hi + 1):
            t = raa * (wa - center)
            rem = budget - t * t
            if rem >= -1e-9 * (1.0 + radius2):
                term = partial * diag[wa + wb] * cur
                k = key + (wa % 4) * p4
                w_vec[a] = wa
                if a == 0:
                    buckets[k] += term
                    count += 1
                elif wa:
                    nxt = [shift[c] * off_tables[(c, a)][wa + wb] for c in range(a)]
                    recurse(a - 1, rem, term, nxt, k)
                else:
                    recurse(a - 1, rem, term, shift[:a], k)
            cur = cur * base
        w_vec[a] = 0

    recurse(g - 1, radius2, one, [one] * g, 0)
    return buckets, count
