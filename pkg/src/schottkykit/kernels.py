"""Backend selection for the hot kernels.

The compiled extension ``_ckernels`` (Cython over libmpfr) is used when it
imports; otherwise the pure-Python ``_fallback`` takes over.  Set
``SCHOTTKYKIT_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os

import gmpy2

from . import _fallback

try:  # pragma: no cover - depends on the build
    from . import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None

_forced = os.environ.get("SCHOTTKYKIT_BACKEND", "").lower()
BACKEND = "python" if (_ckernels is None or _forced == "python") else "compiled"


def available_backends() -> list[str]:
    return ["compiled", "python"] if _ckernels is not None else ["python"]


def _to_pair(x) -> tuple[str, int]:
    num, den = x.as_integer_ratio()
    # den is a power of two for a finite binary float
    return format(num, "x"), -(den.bit_length() - 1)


def _from_pair(pair, prec: int):
    mant, exp = pair
    x = gmpy2.mpfr(int(mant, 16), precision=prec)
    return gmpy2.mul_2exp(x, exp) if exp else x


def theta_buckets(g, prec, diag_tables, off_tables, r, bounds, radius2, backend=None):
    """Bucketed lattice sum; tables hold gmpy2.mpc values at ``prec`` bits."""
    backend = backend or BACKEND
    with gmpy2.context(precision=prec):
        if backend == "python":
            return _fallback.theta_buckets(g, prec, diag_tables, off_tables, r, bounds, radius2)
        if _ckernels is None:
            raise RuntimeError("compiled kernels are not built")
        dt = [[(_to_pair(z.real), _to_pair(z.imag)) for z in tab] for tab in diag_tables]
        ot = {k: [(_to_pair(z.real), _to_pair(z.imag)) for z in tab] for k, tab in off_tables.items()}
        rr = [[float(x) for x in row] for row in r]
        raw, count = _ckernels.theta_buckets(g, prec, dt, ot, rr, list(bounds), float(radius2))
        out = [gmpy2.mpc(_from_pair(re, prec), _from_pair(im, prec), precision=prec) for re, im in raw]
        return out, count


def rank_mod_p(arr, p: int, backend=None) -> int:
    backend = backend or BACKEND
    if backend == "compiled" and _ckernels is not None:
        return _ckernels.rank_mod_p(arr, p)
    return _fallback.rank_mod_p(arr, p)
