"""Command-line driver: verify, catalog, eval, expand, sj.

Every flag can also come from the environment: ``SCHOTTKYKIT_PRECISION``,
``SCHOTTKYKIT_GUARD``, ``SCHOTTKYKIT_SEED``, ``SCHOTTKYKIT_TOLERANCE``,
``SCHOTTKYKIT_OUT``, ``SCHOTTKYKIT_JOBS``, ``SCHOTTKYKIT_DEEP`` and
``SCHOTTKYKIT_BRANCH_SEED``.  Command-line flags win over the environment.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__, suites
from .charalg import char_order
from .hpnum import DEFAULT_GUARD, DEFAULT_PRECISION, LogComplex, prec_bits
from .identities import build_R, evaluate_monomials, r_catalog
from .kernels import BACKEND
from .poincare import (
    DegenerateDirectionError,
    PrecisionTooLowError,
    default_diagonal,
    leading_degree,
    leading_order_fit,
    poincare_ratio_test,
    random_direction,
)
from .schottky import SJStats, build_S, evaluate_SJ
from .theta import PeriodMatrix, PeriodMatrixError, random_period_matrix
from .weilmat import MatrixSizeError, neg_eigenspace_basis, neg_eigenspace_rank

ENV_PREFIX = "SCHOTTKYKIT_"
EXIT_FAIL = 1
EXIT_USAGE = 2


class UsageError(ValueError):
    pass


def _env(name, default, cast=str):
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None or raw == "":
        return default
    try:
        return cast(raw)
    except ValueError:
        raise UsageError(f"cannot parse {ENV_PREFIX}{name}={raw!r}")


def _flag(raw: str) -> bool:
    return raw.lower() in ("1", "true", "yes", "on")


def _genus_list(text: str) -> tuple[int, ...]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out or any(g < 1 for g in out):
        raise argparse.ArgumentTypeError(f"bad genus list {text!r}")
    return tuple(sorted(set(out)))


@dataclass
class SuiteConfig:
    suite: str = "all"
    genus: tuple | None = None
    precision: int = DEFAULT_PRECISION
    guard: int = DEFAULT_GUARD
    seed: int = 0
    tolerance: float | None = None
    out: str | None = None
    jobs: int = 1
    deep: bool = False
    branch_seed: int = 0

    def to_json(self) -> dict:
        d = asdict(self)
        d["genus"] = list(self.genus) if self.genus else None
        return d


@dataclass
class VerificationReport:
    config: SuiteConfig
    checks: list = field(default_factory=list)
    version: str = __version__
    backend: str = BACKEND

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks)

    def to_json(self) -> dict:
        return {
            "tool": "schottkykit",
            "version": self.version,
            "backend": self.backend,
            "config": self.config.to_json(),
            "checks": self.checks,
            "pass": self.passed,
            "summary": {"total": len(self.checks), "failed": sum(not c["pass"] for c in self.checks)},
        }


def _common(p: argparse.ArgumentParser):
    p.add_argument("--precision", type=int, default=_env("PRECISION", DEFAULT_PRECISION, int),
                   help="target decimal digits (default 40)")
    p.add_argument("--guard", type=int, default=_env("GUARD", DEFAULT_GUARD, int), help="guard digits")
    p.add_argument("--seed", type=int, default=_env("SEED", 0, int), help="root random seed")
    p.add_argument("--out", default=_env("OUT", None), help="write JSON here instead of stdout")
    p.add_argument("--branch-seed", type=int, default=_env("BRANCH_SEED", 0, int),
                   help="seed for square-root branch choices")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="schottkykit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"schottkykit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a verification suite")
    _common(v)
    v.add_argument("--suite", choices=suites.SUITES + ("all",), default=_env("SUITE", "all"))
    v.add_argument("--genus", type=_genus_list, default=None, help="restrict to these genera, e.g. 3 or 3,4 or 2-5")
    v.add_argument("--tolerance", type=float, default=_env("TOLERANCE", None, float),
                   help="override the residual tolerance (default 1e-30)")
    v.add_argument("--jobs", type=int, default=_env("JOBS", 1, int), help="parallel worker processes")
    v.add_argument("--deep", action="store_true", default=_env("DEEP", False, _flag),
                   help="include the genus 5 scaling runs at precision 120")

    c = sub.add_parser("catalog", help="write a JSON catalog of relations")
    _common(c)
    c.add_argument("--kind", choices=("R", "S", "eigenbasis"), required=True)
    c.add_argument("--genus", type=int, required=True)
    c.add_argument("--all-pairs", action="store_true",
                   help="R: include every 3 <= j < k <= g+1 instead of k <= max(g, 4)")

    for name, helptext in (("eval", "evaluate an identity at a period matrix"),
                           ("sj", "evaluate a Schottky-Jung product S_jk")):
        e = sub.add_parser(name, help=helptext)
        _common(e)
        e.add_argument("identity", help="R_jk or S_jk, e.g. S_34")
        e.add_argument("--tau", default="random",
                       help="period matrix JSON file, or 'random' (seeded by --seed)")
        e.add_argument("--genus", type=int, default=None, help="genus for --tau random")
        e.add_argument("--diagonal", action="store_true", help="random tau: diagonal only")

    x = sub.add_parser("expand", help="fit the near-diagonal scaling of S_jk")
    _common(x)
    x.add_argument("identity", nargs="?", default="S_34")
    x.add_argument("--genus", type=int, default=4)
    x.add_argument("--ladder", default=None, help="comma separated eps values (default 1e-2,10^-2.5,1e-3)")
    x.add_argument("--directions", type=int, default=None, help="directions for the ratio test (default 5 at g=4)")
    x.add_argument("--eps", type=float, default=1e-3, help="eps for the ratio test")
    x.add_argument("--deep", action="store_true", default=_env("DEEP", False, _flag))
    return p


def _emit(obj, out: str | None):
    text = json.dumps(obj, indent=2, sort_keys=False) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_identity(text: str):
    m = re.fullmatch(r"([RS])_?\{?(\d)(\d)\}?", text.strip())
    if not m:
        raise UsageError(f"identity must look like R_34 or S_35, got {text!r}")
    return m.group(1), int(m.group(2)), int(m.group(3))


def _load_tau(args, genus: int | None) -> tuple[PeriodMatrix, str]:
    bits = prec_bits(args.precision, args.guard)
    if args.tau == "random":
        if genus is None:
            raise UsageError("--genus is required with --tau random")
        if args.diagonal:
            t = default_diagonal(genus, args.seed)
            return PeriodMatrix.diagonal(t, bits), f"random-diagonal(genus={genus}, seed={args.seed})"
        return random_period_matrix(genus, args.seed, bits=bits), f"random(genus={genus}, seed={args.seed})"
    with open(args.tau) as fh:
        obj = json.load(fh)
    tau = PeriodMatrix.from_json(obj, bits)
    if genus is not None and tau.genus != genus:
        raise PeriodMatrixError(f"tau file has genus {tau.genus}, expected {genus}")
    return tau, args.tau


# ---------------------------------------------------------------------------
# commands


def cmd_verify(config: SuiteConfig) -> VerificationReport:
    planned = suites.plan(config.suite, config.genus, config.precision, config.guard, config.seed,
                          config.tolerance, config.deep)
    if config.jobs > 1 and len(planned) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(suites.run_check, planned))
    else:
        results = [suites.run_check(pc) for pc in planned]
    results.sort(key=lambda r: r["name"])
    return VerificationReport(config, results)


def _summary_line(check: dict) -> str:
    mark = "PASS" if check["pass"] else "FAIL"
    extra = f"  ({check['detail']})" if check.get("detail") else ""
    return f"{mark}  {check['name']}: {check['value']} vs {check['tolerance']}{extra}"


def cmd_catalog(kind: str, genus: int, all_pairs: bool = False, precision: int = DEFAULT_PRECISION) -> dict:
    header = {"tool": "schottkykit", "version": __version__, "kind": kind, "genus": genus}
    if kind == "R":
        if genus < 3:
            raise ValueError("R catalogs start at genus 3")
        kmax = genus + 1 if all_pairs else max(genus, 4)
        header["construction"] = {"core": "genus 3 orbit relation", "doublings": genus - 3,
                                  "pairs": f"3 <= j < k <= {kmax}"}
        cat = r_catalog(genus, header)
        keep = [e for e in cat["relations"] if int(e["name"][3]) <= kmax]
        cat["relations"] = keep
        return cat
    if kind == "S":
        if genus < 4:
            raise ValueError("S catalogs start at genus 4")
        header["construction"] = {"source": f"R_jk at genus {genus - 1}", "pairs": f"3 <= j < k <= {genus}"}
        items = []
        for j in range(3, genus + 1):
            for k in range(j + 1, genus + 1):
                s = build_S(genus, j, k)
                d = s.to_json()
                d["sign_patterns"] = s.factor_count
                items.append(d)
        return {"header": header, "identities": items}
    # eigenbasis
    cols = neg_eigenspace_basis(genus)
    header["construction"] = {"matrix": "N(g), off-diagonal pairing block", "eigenvalue": -(2 ** (genus - 1))}
    return {
        "header": header,
        "order": [str(m) for m in char_order(genus).even_list],
        "columns": cols,
        "rank": neg_eigenspace_rank(genus),
    }


def cmd_eval(identity: str, tau: PeriodMatrix, tau_ref: str, precision: int, guard: int, branch_seed: int) -> dict:
    kind, j, k = _parse_identity(identity)
    g = tau.genus
    rec = {"identity": f"{kind}_{j}{k}", "genus": g, "tau_ref": tau_ref, "precision": precision, "guard": guard}
    if kind == "R":
        r = build_R(g, j, k)
        res = evaluate_monomials(r.monomials, tau, precision, guard)
        rec.update({
            "value": [str(res.value.real), str(res.value.imag)],
            "scale": str(res.scale),
            "relative_residual": float(res.relative),
            "monomials": len(r.monomials),
        })
        return rec
    s = build_S(g, j, k)
    stats = SJStats()
    val = evaluate_SJ(s, tau, precision, branch_seed, guard, stats)
    rec.update(val.to_json())
    rec.update({"branch_seed": branch_seed, "theta_evaluations": stats.theta_evaluations,
                "factors": stats.factors, "route": stats.route, "diagonal": stats.diagonal})
    return rec


def cmd_sj(identity: str, tau: PeriodMatrix, tau_ref: str, precision: int, guard: int, branch_seed: int) -> dict:
    kind, j, k = _parse_identity(identity)
    if kind != "S":
        raise UsageError("sj evaluates S_jk only")
    val = evaluate_SJ(build_S(tau.genus, j, k), tau, precision, branch_seed, guard)
    js = val.to_json()
    return {
        "identity": f"S_{j}{k}",
        "genus": tau.genus,
        "tau_ref": tau_ref,
        "log_magnitude": js["log_magnitude"],
        "phase": js["phase"],
        "exact_zero": js["exact_zero"],
        "precision": precision,
        "branch_seed": branch_seed,
    }


def cmd_expand(identity: str, genus: int, seed: int, precision: int, guard: int, ladder=None,
               directions: int | None = None, eps: float = 1e-3) -> dict:
    kind, j, k = _parse_identity(identity)
    if kind != "S":
        raise UsageError("expand works on S_jk")
    ladder = list(ladder or suites.LADDER)
    t = default_diagonal(genus, seed)
    T = random_direction(genus, seed)
    fit = leading_order_fit(build_S(genus, j, k), t, T, ladder, precision, guard)
    d = leading_degree(genus)
    tol = suites.SLOPE_TOL.get(genus, 0.5)
    ok = abs(fit.slope - d) <= tol
    ratios = None
    if directions is None:
        directions = 5 if genus == 4 else 0
    if directions:
        dirs = [random_direction(genus, seed + 1 + i) for i in range(directions)]
        rep = poincare_ratio_test(genus, j, k, t, dirs, eps, precision, guard)
        ratios = rep.to_json()
        ok = ok and rep.passed
    return {
        "identity": f"S_{j}{k}",
        "genus": genus,
        "t": [[repr(z.real), repr(z.imag)] for z in t],
        "T_seed": seed,
        "ladder": ladder,
        "precision": precision,
        "slope": fit.slope,
        "slope_expected": d,
        "slope_tolerance": tol,
        "log_coefficient": fit.log_coefficient,
        "ratios": ratios,
        "pass": ok,
    }


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "verify":
            cfg = SuiteConfig(args.suite, args.genus, args.precision, args.guard, args.seed, args.tolerance,
                              args.out, args.jobs, args.deep, args.branch_seed)
            t0 = time.perf_counter()
            rep = cmd_verify(cfg)
            doc = rep.to_json()
            doc["wall_seconds"] = round(time.perf_counter() - t0, 3)
            if args.out:
                _emit(doc, args.out)
                for c in rep.checks:
                    print(_summary_line(c))
                print(f"{'PASS' if rep.passed else 'FAIL'}: {doc['summary']['total']} checks, "
                      f"{doc['summary']['failed']} failed")
            else:
                _emit(doc, None)
                for c in rep.checks:
                    print(_summary_line(c), file=sys.stderr)
            return 0 if rep.passed else EXIT_FAIL
        if args.command == "catalog":
            _emit(cmd_catalog(args.kind, args.genus, args.all_pairs, args.precision), args.out)
            return 0
        if args.command in ("eval", "sj"):
            _parse_identity(args.identity)
            tau, ref = _load_tau(args, args.genus)
            fn = cmd_eval if args.command == "eval" else cmd_sj
            _emit(fn(args.identity, tau, ref, args.precision, args.guard, args.branch_seed), args.out)
            return 0
        if args.command == "expand":
            prec = args.precision
            if args.genus >= 5:
                if not args.deep:
                    raise UsageError("genus 5 scaling needs --deep (runs at precision 120)")
                prec = max(prec, 120)
            ladder = [float(x) for x in args.ladder.split(",")] if args.ladder else None
            doc = cmd_expand(args.identity, args.genus, args.seed, prec, args.guard, ladder,
                             args.directions, args.eps)
            _emit(doc, args.out)
            return 0 if doc["pass"] else EXIT_FAIL
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PeriodMatrixError, MatrixSizeError, ValueError, DegenerateDirectionError,
            PrecisionTooLowError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
