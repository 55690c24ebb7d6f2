"""Compiled vs pure-Python kernels: theta tables and modular rank.

    python benchmarks/bench_theta.py [--repeat 3] [--precision 40]
"""

import argparse
import json
import time

import numpy as np

from schottkykit import kernels
from schottkykit.theta import random_period_matrix, theta_table
from schottkykit.weilmat import m_plus


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--precision", type=int, default=40)
    ap.add_argument("--genera", default="2,3,4,5")
    ap.add_argument("--json", action="store_true", help="print JSON rows instead of a table")
    args = ap.parse_args()

    backends = kernels.available_backends()
    rows = []
    for g in (int(x) for x in args.genera.split(",")):
        tau = random_period_matrix(g, 1)
        row = {"kernel": f"theta_table g={g} P={args.precision}"}
        for b in backends:
            row[b] = best_of(lambda: theta_table(tau, args.precision, exact_diagonal=False, backend=b), args.repeat)
        rows.append(row)
    for g in (3, 4):
        mp = m_plus(g) + 2 ** (g - 1) * np.eye(m_plus(g).shape[0], dtype=np.int64)
        row = {"kernel": f"rank_mod_p M+ g={g}"}
        for b in backends:
            row[b] = best_of(lambda: kernels.rank_mod_p(mp, 2_147_483_647, backend=b), args.repeat)
        rows.append(row)

    if args.json:
        print(json.dumps(rows, indent=2))
        return
    print(f"{'kernel':34s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for row in rows:
        line = f"{row['kernel']:34s}" + "".join(f"{row[b]:11.4f}s" for b in backends)
        if "compiled" in row and "python" in row:
            line += f"{row['python'] / row['compiled']:11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
