# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: MPFR lattice-sum accumulation and modular rank."""

from libc.stdlib cimport malloc, free
from libc.math cimport sqrt, ceil, floor
from libc.stdint cimport int64_t

import numpy as np
cimport numpy as cnp

cdef extern from "gmp.h":
    ctypedef struct __mpz_struct:
        pass
    ctypedef __mpz_struct mpz_t[1]
    void mpz_init(mpz_t)
    void mpz_clear(mpz_t)
    size_t mpz_sizeinbase(mpz_t, int)
    char *mpz_get_str(char *, int, mpz_t)

cdef extern from "mpfr.h":
    ctypedef struct __mpfr_struct:
        pass
    ctypedef __mpfr_struct mpfr_t[1]
    ctypedef __mpfr_struct *mpfr_ptr
    ctypedef long mpfr_prec_t
    ctypedef long mpfr_exp_t
    ctypedef int mpfr_rnd_t
    mpfr_rnd_t MPFR_RNDN
    void mpfr_init2(mpfr_ptr, mpfr_prec_t)
    void mpfr_clear(mpfr_ptr)
    int mpfr_set(mpfr_ptr, mpfr_ptr, mpfr_rnd_t)
    int mpfr_set_ui(mpfr_ptr, unsigned long, mpfr_rnd_t)
    int mpfr_set_str(mpfr_ptr, const char *, int, mpfr_rnd_t)
    int mpfr_mul(mpfr_ptr, mpfr_ptr, mpfr_ptr, mpfr_rnd_t)
    int mpfr_add(mpfr_ptr, mpfr_ptr, mpfr_ptr, mpfr_rnd_t)
    int mpfr_sub(mpfr_ptr, mpfr_ptr, mpfr_ptr, mpfr_rnd_t)
    int mpfr_mul_2si(mpfr_ptr, mpfr_ptr, long, mpfr_rnd_t)
    mpfr_exp_t mpfr_get_z_2exp(mpz_t, mpfr_ptr)
    int mpfr_zero_p(mpfr_ptr)
    int mpfr_div(mpfr_ptr, mpfr_ptr, mpfr_ptr, mpfr_rnd_t)
    int mpfr_neg(mpfr_ptr, mpfr_ptr, mpfr_rnd_t)


cdef struct Ctx:
    int g
    mpfr_prec_t prec
    __mpfr_struct *buckets      # 2 * 4**g
    __mpfr_struct *diag         # per level: 2 * (2*W_a+1)
    int *diag_off
    __mpfr_struct *offpow       # per (c, a): 2 * (2*W_a+1)
    int *offpow_off
    __mpfr_struct *partial      # per level: 2 (term so far)
    __mpfr_struct *shift        # per level a: g bases, 2 each
    __mpfr_struct *cur
    __mpfr_struct *tmp          # 4 scratch reals
    double *r
    int *bounds
    int *w
    double radius2
    long count


cdef inline void _div(__mpfr_struct *out, __mpfr_struct *x, __mpfr_struct *y):
    mpfr_div(out, x, y, MPFR_RNDN)


cdef inline void _neg(__mpfr_struct *x):
    mpfr_neg(x, x, MPFR_RNDN)


cdef inline void _cset(__mpfr_struct *out, __mpfr_struct *x):
    mpfr_set(&out[0], &x[0], MPFR_RNDN)
    mpfr_set(&out[1], &x[1], MPFR_RNDN)


cdef inline void cmul(__mpfr_struct *out, __mpfr_struct *x, __mpfr_struct *y, __mpfr_struct *t):
    # out may alias x or y; t holds two scratch reals
    mpfr_mul(&t[0], &x[0], &y[0], MPFR_RNDN)
    mpfr_mul(&t[1], &x[1], &y[1], MPFR_RNDN)
    mpfr_sub(&t[0], &t[0], &t[1], MPFR_RNDN)
    mpfr_mul(&t[1], &x[0], &y[1], MPFR_RNDN)
    mpfr_mul(&t[2], &x[1], &y[0], MPFR_RNDN)
    mpfr_add(&out[1], &t[1], &t[2], MPFR_RNDN)
    mpfr_set(&out[0], &t[0], MPFR_RNDN)


cdef void cpow(Ctx *c, __mpfr_struct *out, __mpfr_struct *base, __mpfr_struct *inv, long k):
    # out = base**k via square-and-multiply (inv is 1/base for k < 0)
    cdef __mpfr_struct *b = base
    cdef __mpfr_struct *sq = &c.tmp[4]
    if k < 0:
        b = inv
        k = -k
    mpfr_set_ui(&out[0], 1, MPFR_RNDN)
    mpfr_set_ui(&out[1], 0, MPFR_RNDN)
    mpfr_set(&sq[0], &b[0], MPFR_RNDN)
    mpfr_set(&sq[1], &b[1], MPFR_RNDN)
    while k > 0:
        if k & 1:
            cmul(out, out, sq, c.tmp)
        k >>= 1
        if k:
            cmul(sq, sq, sq, c.tmp)


cdef void recurse(Ctx *c, int a, double budget, long key, __mpfr_struct *invbuf):
    cdef int g = c.g
    cdef double raa = c.r[a * g + a]
    cdef double center = 0.0
    cdef int b, wa, lo, hi, cc
    cdef double half, t, rem
    cdef __mpfr_struct *base = &c.shift[2 * (a * g + a)]
    cdef __mpfr_struct *cur = &c.cur[2 * a]
    cdef __mpfr_struct *term
    cdef __mpfr_struct *inv = &invbuf[2 * a]
    cdef long k
    cdef long p4 = 1
    for b in range(a):
        p4 *= 4
    for b in range(a + 1, g):
        center -= c.r[a * g + b] * c.w[b]
    center /= raa
    if budget < 0:
        budget = 0
    half = sqrt(budget) / raa
    lo = <int>ceil(center - half - 1e-9)
    hi = <int>floor(center + half + 1e-9)
    if lo < -c.bounds[a]:
        lo = -c.bounds[a]
    if hi > c.bounds[a]:
        hi = c.bounds[a]
    if lo > hi:
        return
    # inverse of base for negative exponents: 1/z = conj(z)/|z|^2
    mpfr_mul(&c.tmp[0], &base[0], &base[0], MPFR_RNDN)
    mpfr_mul(&c.tmp[1], &base[1], &base[1], MPFR_RNDN)
    mpfr_add(&c.tmp[0], &c.tmp[0], &c.tmp[1], MPFR_RNDN)
    _div(&inv[0], &base[0], &c.tmp[0])
    _div(&inv[1], &base[1], &c.tmp[0])
    _neg(&inv[1])
    cpow(c, cur, base, inv, lo)
    term = &c.partial[2 * a]
    for wa in range(lo, hi + 1):
        t = raa * (wa - center)
        rem = budget - t * t
        if rem >= -1e-9 * (1.0 + c.radius2):
            # term = partial_{a+1} * diag_a(wa) * cur
            cmul(term, &c.partial[2 * (a + 1)], &c.diag[c.diag_off[a] + 2 * (wa + c.bounds[a])], c.tmp)
            cmul(term, term, cur, c.tmp)
            k = key + ((wa % 4 + 4) % 4) * p4
            c.w[a] = wa
            if a == 0:
                mpfr_add(&c.buckets[2 * k], &c.buckets[2 * k], &term[0], MPFR_RNDN)
                mpfr_add(&c.buckets[2 * k + 1], &c.buckets[2 * k + 1], &term[1], MPFR_RNDN)
                c.count += 1
            else:
                for cc in range(a):
                    _cset(&c.shift[2 * ((a - 1) * g + cc)], &c.shift[2 * (a * g + cc)])
                    if wa != 0:
                        cmul(&c.shift[2 * ((a - 1) * g + cc)], &c.shift[2 * ((a - 1) * g + cc)],
                             &c.offpow[c.offpow_off[cc * g + a] + 2 * (wa + c.bounds[a])], c.tmp)
                recurse(c, a - 1, rem, k, invbuf)
        cmul(cur, cur, base, c.tmp)
    c.w[a] = 0


cdef void _load(__mpfr_struct *x, object pair):
    # pair = (mantissa as hex string, binary exponent)
    cdef bytes s = pair[0].encode("ascii")
    mpfr_set_str(x, s, 16, MPFR_RNDN)
    mpfr_mul_2si(x, x, <long>pair[1], MPFR_RNDN)


cdef object _dump(__mpfr_struct *x):
    cdef mpz_t z
    cdef mpfr_exp_t e
    cdef size_t n
    cdef char *buf
    if mpfr_zero_p(x):
        return ("0", 0)
    mpz_init(z)
    e = mpfr_get_z_2exp(z, x)
    n = mpz_sizeinbase(z, 16) + 3
    buf = <char *>malloc(n)
    mpz_get_str(buf, 16, z)
    out = (buf.decode("ascii"), e)
    free(buf)
    mpz_clear(z)
    return out


cdef __mpfr_struct *_alloc(long n, mpfr_prec_t prec):
    cdef __mpfr_struct *p = <__mpfr_struct *>malloc(n * sizeof(__mpfr_struct))
    cdef long i
    for i in range(n):
        mpfr_init2(&p[i], prec)
        mpfr_set_ui(&p[i], 0, MPFR_RNDN)
    return p


cdef void _release(__mpfr_struct *p, long n):
    cdef long i
    if p == NULL:
        return
    for i in range(n):
        mpfr_clear(&p[i])
    free(p)


def theta_buckets(int g, long prec, list diag_tables, dict off_tables, r, list bounds, double radius2):
    """Lattice-sum accumulation; see ``_fallback.theta_buckets`` for the contract.

    ``diag_tables[a]`` lists (re, im) pairs of q_diag[a]**(k*k) for
    k = -W_a..W_a; ``off_tables[(c, a)]`` (c < a) lists q_off[c][a]**k for the
    same range of k.  Every real is passed as (hex mantissa, exponent).
    Returns (list of 4**g (re, im) pairs, point count).
    """
    cdef Ctx c
    cdef int a, cc, k, i
    cdef long nb = 1
    cdef long ndiag = 0
    cdef long noff = 0
    cdef __mpfr_struct *invbuf
    for a in range(g):
        nb *= 4
    c.g = g
    c.prec = prec
    c.count = 0
    c.radius2 = radius2
    c.bounds = <int *>malloc(g * sizeof(int))
    c.w = <int *>malloc(g * sizeof(int))
    c.r = <double *>malloc(g * g * sizeof(double))
    c.diag_off = <int *>malloc(g * sizeof(int))
    c.offpow_off = <int *>malloc(g * g * sizeof(int))
    for a in range(g):
        c.bounds[a] = bounds[a]
        c.w[a] = 0
        c.diag_off[a] = ndiag
        ndiag += 2 * (2 * bounds[a] + 1)
        for cc in range(g):
            c.r[a * g + cc] = r[a][cc]
            c.offpow_off[cc * g + a] = 0
    for a in range(g):
        for cc in range(a):
            c.offpow_off[cc * g + a] = noff
            noff += 2 * (2 * bounds[a] + 1)
    c.buckets = _alloc(2 * nb, prec)
    c.diag = _alloc(ndiag, prec)
    c.offpow = _alloc(noff if noff else 1, prec)
    c.partial = _alloc(2 * (g + 1), prec)
    c.shift = _alloc(2 * g * g, prec)
    c.cur = _alloc(2 * g, prec)
    c.tmp = _alloc(6, prec)
    invbuf = _alloc(2 * g, prec)
    try:
        for a in range(g):
            for i in range(2 * bounds[a] + 1):
                _load(&c.diag[c.diag_off[a] + 2 * i], diag_tables[a][i][0])
                _load(&c.diag[c.diag_off[a] + 2 * i + 1], diag_tables[a][i][1])
            for cc in range(a):
                tab = off_tables[(cc, a)]
                for i in range(2 * bounds[a] + 1):
                    _load(&c.offpow[c.offpow_off[cc * g + a] + 2 * i], tab[i][0])
                    _load(&c.offpow[c.offpow_off[cc * g + a] + 2 * i + 1], tab[i][1])
        # top level: partial = 1, shift bases = 1
        mpfr_set_ui(&c.partial[2 * g], 1, MPFR_RNDN)
        for cc in range(g):
            mpfr_set_ui(&c.shift[2 * ((g - 1) * g + cc)], 1, MPFR_RNDN)
        recurse(&c, g - 1, radius2, 0, invbuf)
        out = [(_dump(&c.buckets[2 * k]), _dump(&c.buckets[2 * k + 1])) for k in range(nb)]
        return out, c.count
    finally:
        _release(c.buckets, 2 * nb)
        _release(c.diag, ndiag)
        _release(c.offpow, noff if noff else 1)
        _release(c.partial, 2 * (g + 1))
        _release(c.shift, 2 * g * g)
        _release(c.cur, 2 * g)
        _release(c.tmp, 6)
        _release(invbuf, 2 * g)
        free(c.bounds)
        free(c.w)
        free(c.r)
        free(c.diag_off)
        free(c.offpow_off)


def rank_mod_p(cnp.ndarray[cnp.int64_t, ndim=2] a, long p):
    """Rank over GF(p) of a matrix already reduced into [0, p); p < 2**31."""
    cdef cnp.ndarray[cnp.int64_t, ndim=2] m = a.copy()
    cdef Py_ssize_t n_rows = m.shape[0], n_cols = m.shape[1]
    cdef Py_ssize_t rank = 0, c, r, k, piv
    cdef int64_t inv, f, tmpv
    for c in range(n_cols):
        if rank == n_rows:
            break
        piv = -1
        for r in range(rank, n_rows):
            if m[r, c] != 0:
                piv = r
                break
        if piv < 0:
            continue
        if piv != rank:
            for k in range(c, n_cols):
                tmpv = m[rank, k]
                m[rank, k] = m[piv, k]
                m[piv, k] = tmpv
        inv = _powmod(m[rank, c], p - 2, p)
        for k in range(c, n_cols):
            m[rank, k] = (m[rank, k] * inv) % p
        for r in range(rank + 1, n_rows):
            f = m[r, c]
            if f == 0:
                continue
            for k in range(c, n_cols):
                m[r, k] = (m[r, k] - f * m[rank, k]) % p
                if m[r, k] < 0:
                    m[r, k] += p
        rank += 1
    return rank


cdef int64_t _powmod(int64_t b, int64_t e, int64_t p):
    cdef int64_t result = 1
    b %= p
    while e > 0:
        if e & 1:
            result = (result * b) % p
        b = (b * b) % p
        e >>= 1
    return result
