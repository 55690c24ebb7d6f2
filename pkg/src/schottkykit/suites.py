"""Verification checks grouped into suites.

Every check is a module-level function taking plain keyword arguments and
returning a dict with ``value``, ``tolerance``, ``pass`` and optional
``detail``; that keeps checks picklable for the process pool and makes the
report a straight JSON dump.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
import zlib
from dataclasses import dataclass

import gmpy2
import numpy as np

from . import charalg
from .charalg import Characteristic, all_characteristics, char_order, weil_pairing
from .hpnum import LogComplex, ctx, prec_bits
from .identities import (
    all_R,
    evaluate_monomials,
    expand_relation,
    random_triples,
    riemann_relation_residual,
)
from .poincare import (
    default_diagonal,
    independence_rank_S,
    independence_rank_poincare,
    leading_degree,
    leading_order_fit,
    pair_list,
    poincare_ratio_test,
    random_direction,
    random_rational_point,
)
from .schottky import all_S, build_S, build_SJ, evaluate_SJ, genus4_monomials, symmetrized_quartic
from .identities import build_R
from .theta import (
    PeriodMatrix,
    genus1_thetas,
    heat_equation_residual,
    random_period_matrix,
    theta11_z_derivative,
)
from .weilmat import (
    U1, U2, U3, U4, X1,
    QuarticRelation,
    doubling_lift,
    is_eigenvector,
    is_valid_relation,
    m_full,
    m_plus,
    neg_eigenspace_basis,
    verify_eigenstructure,
)

SUITES = ("core", "eigen", "identities", "schottky", "poincare")

DEFAULT_GENERA = {
    "core": (1, 2, 3, 4),
    "eigen": (1, 2, 3, 4),
    "identities": (2, 3, 4, 5),
    "schottky": (4, 5, 6),
    "poincare": (4, 5, 6, 7, 8),
}

RESIDUAL_TOL = 1e-30
GENUS1_TOL = 1e-35
NEGATIVE_FLOOR = 1e-5
X2 = [1, -1, -1, 0, 0, 0, 1, -1, -1, 0]


def _fmt(x) -> str:
    """Short, deterministic text for a real number."""
    x = float(x)
    if x == 0:
        return "0"
    if math.isinf(x) or math.isnan(x):
        return str(x)
    return f"{x:.3e}"


def _result(value, tolerance, passed, detail=""):
    out = {"value": value, "tolerance": tolerance, "pass": bool(passed)}
    if detail:
        out["detail"] = detail
    return out


# ---------------------------------------------------------------------------
# core


def check_char_counts(genus):
    order = char_order(genus)
    ev, od = len(order.even_list), len(order.odd_list)
    ok = ev == charalg.k_even(genus) == 2 ** (genus - 1) * (2**genus + 1)
    ok &= od == charalg.k_odd(genus) == 2 ** (genus - 1) * (2**genus - 1)
    ok &= all(m.is_even() for m in order.even_list) and not any(m.is_even() for m in order.odd_list)
    return _result(f"{ev} even, {od} odd", "exact", ok)


def check_weil_pairing(genus):
    chars = list(all_characteristics(genus))
    bad = 0
    for m in chars:
        for n in chars:
            if weil_pairing(m, n) != weil_pairing(n, m):
                bad += 1
    # bilinearity on a fixed slice keeps this cheap at genus 4
    for m in chars[:16]:
        for n in chars:
            for p in chars[:16]:
                if weil_pairing(m + n, p) != weil_pairing(m, p) * weil_pairing(n, p):
                    bad += 1
    # parity is a quadratic form refining the pairing
    for m in chars:
        for n in chars:
            lhs = (1 if (m + n).is_even() else -1)
            rhs = (1 if m.is_even() else -1) * (1 if n.is_even() else -1) * weil_pairing(m, n)
            bad += lhs != rhs
    return _result(f"{bad} violations", "exact", bad == 0)


def check_genus1(seed, precision, guard, count=10):
    rng = np.random.default_rng(seed)
    bits = prec_bits(precision, guard)
    worst_jacobi = gmpy2.mpfr(0)
    worst_deriv = gmpy2.mpfr(0)
    for _ in range(count):
        t = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.6, 1.6))
        th = genus1_thetas(t, precision, guard)
        triple, direct = theta11_z_derivative(t, precision, guard, return_both=True)
        with ctx(bits):
            a, b, c = th[(0, 0)] ** 4, th[(0, 1)] ** 4, th[(1, 0)] ** 4
            worst_jacobi = max(worst_jacobi, abs(a - b - c) / abs(a))
            worst_deriv = max(worst_deriv, abs(triple - direct) / abs(triple))
    worst = max(worst_jacobi, worst_deriv)
    return _result(
        _fmt(worst), GENUS1_TOL, worst < GENUS1_TOL,
        f"jacobi {_fmt(worst_jacobi)}, derivative {_fmt(worst_deriv)}",
    )


HEAT_CASES = {
    # column patterns at genus 4 for (j, k) = (1, 2)
    "no_11_columns": "0010;0000",
    "jk_pair": "1100;1100",
    "four_11_columns": "1111;1111",
}


def check_heat_equation(case, seed, precision, guard, h=1e-3):
    """Residual of the central difference vs the linear-term prediction, at h and h/2."""
    rng = np.random.default_rng(seed)
    t = [complex(rng.uniform(-0.3, 0.3), rng.uniform(0.9, 1.3)) for _ in range(4)]
    tau = PeriodMatrix.diagonal(t, prec_bits(precision, guard))
    m = Characteristic.parse(HEAT_CASES[case])
    r1 = heat_equation_residual(m, tau, 1, 2, h, precision, guard)
    r2 = heat_equation_residual(m, tau, 1, 2, h / 2, precision, guard)
    if r2 == 0:
        ratio = float("nan")
    else:
        ratio = float(r1 / r2)
    ok = 3.5 <= ratio <= 4.5
    return _result(_fmt(ratio) if not math.isnan(ratio) else "nan", "[3.5, 4.5]", ok,
                   f"residual(h) {_fmt(r1)}, residual(h/2) {_fmt(r2)}")


# ---------------------------------------------------------------------------
# eigen


def check_eigenstructure(genus):
    t0 = time.perf_counter()
    rep = verify_eigenstructure(genus)
    fails = "; ".join(f"{c.name} ({c.detail})" for c in rep.failures())
    return _result(f"{len(rep.checks) - len(rep.failures())}/{len(rep.checks)} checks",
                   "exact", rep.passed, fails or f"{time.perf_counter() - t0:.2f}s")


def check_doubling_x2():
    lifted = doubling_lift(list(X1), U2)
    return _result(json.dumps(lifted), json.dumps(X2), lifted == X2)


def _first_nonzero_column(a):
    for col in a.T:
        if np.any(col):
            return col
    raise ValueError("matrix has no nonzero column")


def check_lift_variants(genus):
    h = genus - 1
    kp = charalg.k_even(h)
    mp = m_plus(h)
    x_neg = np.array(neg_eigenspace_basis(h)[0], dtype=np.int64)
    x_pos = _first_nonzero_column(mp + 2 ** (h - 1) * np.eye(kp, dtype=np.int64))
    full = _first_nonzero_column(m_full(h) - 2**h * np.eye(m_full(h).shape[0], dtype=np.int64))
    target = m_plus(genus)
    done = []
    for variant, args in ((U1, (x_neg,)), (U2, (x_neg,)), (U3, (full[:kp], full[kp:])), (U4, (x_pos,))):
        out = doubling_lift(args[0], variant, args[1] if len(args) > 1 else None)
        if any(out) and is_eigenvector(target, out, -(2 ** (genus - 1))):
            done.append(variant)
    return _result(",".join(done), "U1,U2,U3,U4", len(done) == 4)


# ---------------------------------------------------------------------------
# identities


def check_r_identities(genus, seed, precision, guard, tolerance, count=10):
    forms = all_R(genus)
    rng = np.random.default_rng(seed)
    worst = gmpy2.mpfr(0)
    for _ in range(count):
        tau = random_period_matrix(genus, int(rng.integers(2**31)), bits=prec_bits(precision, guard))
        for r in forms:
            worst = max(worst, evaluate_monomials(r.monomials, tau, precision, guard).relative)
    return _result(_fmt(worst), tolerance, worst < tolerance, f"{len(forms)} identities x {count} tau")


def check_riemann(genus, seed, precision, guard, tolerance, count=50, per_tau=10):
    rng = np.random.default_rng(seed)
    worst = gmpy2.mpfr(0)
    bits = prec_bits(precision, guard)
    done = 0
    while done < count:
        tau = random_period_matrix(genus, int(rng.integers(2**31)), bits=bits)
        for m1, m2, m3 in random_triples(genus, min(per_tau, count - done), rng):
            worst = max(worst, riemann_relation_residual(m1, m2, m3, tau, precision, guard).relative)
            done += 1
    return _result(_fmt(worst), tolerance, worst < tolerance, f"{count} triples")


def random_non_relation(genus, rng):
    """A random integer quartic (X, A, S) that is not a valid relation and has surviving monomials."""
    order = char_order(genus).even_list
    n = 1 << genus
    while True:
        vec = rng.integers(-3, 4, size=len(order)).tolist()
        a = Characteristic(genus, int(rng.integers(n)), int(rng.integers(n)))
        s = Characteristic(genus, int(rng.integers(n)), int(rng.integers(n)))
        rel = QuarticRelation.from_vector(genus, vec, a, s)
        if not is_valid_relation(rel) and len(expand_relation(rel)) > 0:
            return rel


def check_negative_control(genus, seed, precision, guard, count=10):
    rng = np.random.default_rng(seed)
    tau = random_period_matrix(genus, int(rng.integers(2**31)), bits=prec_bits(precision, guard))
    smallest = None
    for _ in range(count):
        rel = random_non_relation(genus, rng)
        v = evaluate_monomials(expand_relation(rel), tau, precision, guard).relative
        smallest = v if smallest is None else min(smallest, v)
    return _result(_fmt(smallest), f"> {NEGATIVE_FLOOR:g}", smallest > NEGATIVE_FLOOR, f"{count} quartics")


# ---------------------------------------------------------------------------
# schottky


def check_lemma(genus):
    pairs = [(j, k) for j in range(3, genus + 1) for k in range(j + 1, genus + 1)]
    bad = []
    for j, k in pairs:
        s = build_S(genus, j, k)
        ref = build_SJ(build_R(genus - 1, j, k))
        if s.slot_classes() != ref.slot_classes():
            bad.append(s.name)
    return _result(f"{len(pairs) - len(bad)}/{len(pairs)} equal", "multiset equality", not bad, ",".join(bad))


def check_branch_invariance(genus, seed, precision, guard, tolerance, count=3, seeds=(0, 1, 2)):
    rng = np.random.default_rng(seed)
    worst = gmpy2.mpfr(0)
    forms = all_S(genus)
    for _ in range(count):
        tau = random_period_matrix(genus, int(rng.integers(2**31)), bits=prec_bits(precision, guard))
        for s in forms:
            vals = [evaluate_SJ(s, tau, precision, b, guard) for b in seeds]
            for v in vals[1:]:
                worst = max(worst, vals[0].relative_difference(v))
    return _result(_fmt(worst), tolerance, worst < tolerance, f"{len(forms)} identities x {count} tau")


def check_dual_path(seed, precision, guard, tolerance, count=5):
    rng = np.random.default_rng(seed)
    s = build_S(4)
    worst = gmpy2.mpfr(0)
    for _ in range(count):
        tau = random_period_matrix(4, int(rng.integers(2**31)), bits=prec_bits(precision, guard))
        (r1, r2, r3), bits = genus4_monomials(tau, precision, guard)
        with ctx(bits):
            sym = LogComplex.from_complex(symmetrized_quartic(r1, r2, r3), bits)
        worst = max(worst, evaluate_SJ(s, tau, precision, 0, guard).relative_difference(sym))
    return _result(_fmt(worst), tolerance, worst < tolerance, f"{count} tau")


def check_diagonal_vanishing(genus, seed, precision, guard, count=5):
    rng = np.random.default_rng(seed)
    forms = all_S(genus)
    nonzero = 0
    for _ in range(count):
        t = [complex(rng.uniform(-0.5, 0.5), rng.uniform(0.8, 1.6)) for _ in range(genus)]
        tau = PeriodMatrix.diagonal(t, prec_bits(precision, guard))
        for s in forms:
            nonzero += not evaluate_SJ(s, tau, precision, 0, guard).zero
    return _result(f"{nonzero} not exactly zero", "exact zero", nonzero == 0, f"{len(forms)} identities x {count}")


# ---------------------------------------------------------------------------
# poincare

SLOPE_TOL = {4: 0.05, 5: 0.5}
LADDER = (1e-2, 10**-2.5, 1e-3)


def check_slope(genus, seed, precision, guard):
    t = default_diagonal(genus, seed)
    T = random_direction(genus, seed)
    fit = leading_order_fit(build_S(genus), t, T, LADDER, precision, guard)
    d = leading_degree(genus)
    tol = SLOPE_TOL[genus]
    return _result(f"{fit.slope:.4f}", f"{d} +- {tol}", abs(fit.slope - d) <= tol)


def check_ratio(genus, seed, precision, guard, directions=5, eps=1e-3):
    t = default_diagonal(genus, seed)
    dirs = [random_direction(genus, seed + 1 + i) for i in range(directions)]
    rep = poincare_ratio_test(genus, 3, 4, t, dirs, eps, precision, guard)
    return _result(_fmt(rep.max_pairwise), rep.tolerance, rep.passed, f"{directions} directions, eps {eps:g}")


LOCUS_DIRECTION = [[0, 1, 1, 1], [1, 0, 2, 0.5], [1, 2, 0, 2], [1, 0.5, 2, 0]]


def check_locus_slope(seed, precision, guard):
    t = default_diagonal(4, seed)
    fit = leading_order_fit(build_S(4), t, LOCUS_DIRECTION, LADDER, precision, guard)
    return _result(f"{fit.slope:.4f}", "> 8.5", fit.slope > 8.5)


def check_poincare_rank(genus, seed):
    r = independence_rank_poincare(genus, random_rational_point(genus, seed), exact=True)
    want = len(pair_list(genus))
    return _result(str(r), str(want), r == want)


def check_s_jacobian(genus, seed, precision, guard, eps=1e-3):
    t = default_diagonal(genus, seed)
    T = random_direction(genus, seed)
    rep = independence_rank_S(genus, t, T, eps, precision, guard)
    detail = f"precision {rep.digits}" + (" after retry" if rep.retried else "")
    return _result(f"{rep.min_singular_value:.4f}", "> 0.5", rep.passed, detail)


# ---------------------------------------------------------------------------
# planning


@dataclass(frozen=True)
class PlannedCheck:
    name: str
    suite: str
    genus: int | None
    func: str
    params: tuple  # sorted (key, value) pairs

    def kwargs(self) -> dict:
        return dict(self.params)

    def digest(self) -> str:
        blob = json.dumps({"func": self.func, "params": self.kwargs()}, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def derive_seed(root: int, name: str) -> int:
    """Per-check seed from the single root seed; independent of which checks are selected."""
    ss = np.random.SeedSequence([root, zlib.crc32(name.encode())])
    return int(ss.generate_state(1)[0] & 0x7FFFFFFF)


def plan(suite: str, genera, precision: int, guard: int, seed: int, tolerance: float | None,
         deep: bool = False) -> list[PlannedCheck]:
    suites = SUITES if suite == "all" else (suite,)
    tol = RESIDUAL_TOL if tolerance is None else tolerance
    out = []

    def add(suite_name, name, tag, func, **params):
        if genera is not None and tag is not None and tag not in genera:
            return
        if "seed" in params:
            params["seed"] = derive_seed(seed, name)
        out.append(PlannedCheck(name, suite_name, tag, func, tuple(sorted(params.items()))))

    num = {"precision": precision, "guard": guard}
    for s in suites:
        gens = DEFAULT_GENERA[s]
        if s == "core":
            for g in gens:
                add(s, f"core/char_counts/g{g}", g, "check_char_counts", genus=g)
                add(s, f"core/weil_pairing/g{g}", g, "check_weil_pairing", genus=g)
            add(s, "core/genus1_analytics", 1, "check_genus1", seed=0, **num)
            for case in HEAT_CASES:
                add(s, f"core/heat_equation/{case}", 4, "check_heat_equation", case=case, seed=0, **num)
        elif s == "eigen":
            for g in gens:
                add(s, f"eigen/structure/g{g}", g, "check_eigenstructure", genus=g)
            add(s, "eigen/doubling_x2", 2, "check_doubling_x2")
            for g in (2, 3, 4):
                add(s, f"eigen/lift_variants/g{g}", g, "check_lift_variants", genus=g)
        elif s == "identities":
            for g in (3, 4, 5):
                add(s, f"identities/r_jk/g{g}", g, "check_r_identities", genus=g, seed=0, tolerance=tol, **num)
            for g in (2, 3):
                add(s, f"identities/riemann/g{g}", g, "check_riemann", genus=g, seed=0, tolerance=tol, **num)
            add(s, "identities/negative_control/g3", 3, "check_negative_control", genus=3, seed=0, **num)
        elif s == "schottky":
            for g in (4, 5, 6):
                add(s, f"schottky/lemma/g{g}", g, "check_lemma", genus=g)
            for g in (4, 5):
                add(s, f"schottky/branch_invariance/g{g}", g, "check_branch_invariance", genus=g, seed=0,
                    tolerance=tol, **num)
                add(s, f"schottky/diagonal_zero/g{g}", g, "check_diagonal_vanishing", genus=g, seed=0, **num)
            add(s, "schottky/dual_path/g4", 4, "check_dual_path", seed=0, tolerance=tol, **num)
        elif s == "poincare":
            add(s, "poincare/slope/g4", 4, "check_slope", genus=4, seed=0, **num)
            add(s, "poincare/ratio/g4", 4, "check_ratio", genus=4, seed=0, **num)
            add(s, "poincare/locus_slope/g4", 4, "check_locus_slope", seed=0, **num)
            add(s, "poincare/s_jacobian/g4", 4, "check_s_jacobian", genus=4, seed=0, **num)
            for g in gens:
                add(s, f"poincare/rank/g{g}", g, "check_poincare_rank", genus=g, seed=0)
            if deep:
                hi = {"precision": max(precision, 120), "guard": guard}
                add(s, "poincare/slope/g5", 5, "check_slope", genus=5, seed=0, **hi)
                add(s, "poincare/s_jacobian/g5", 5, "check_s_jacobian", genus=5, seed=0, **hi)
    return out


def run_check(pc: PlannedCheck) -> dict:
    fn = globals()[pc.func]
    t0 = time.perf_counter()
    try:
        res = fn(**pc.kwargs())
    except Exception as exc:  # a crashing check is a failing check
        res = _result("error", None, False, f"{type(exc).__name__}: {exc}")
    out = {"name": pc.name, "suite": pc.suite, "genus": pc.genus, "inputs_digest": pc.digest()}
    out.update(res)
    out["seconds"] = round(time.perf_counter() - t0, 3)
    return out
