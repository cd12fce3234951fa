"""Compare the compiled kernels with the pure-Python fallback.

Micro benchmarks call both kernel modules directly on identical inputs and
check that they agree; the end-to-end benchmark runs a windowed cohomology
computation in a subprocess with and without BVSPIN_PURE=1.

    python3 benchmarks/bench_kernels.py [--repeat N] [--quick]
"""

from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import time

from bvspin import _kernels_py as pure
from bvspin.models import parse_builtin
from bvspin.superpoly import Polynomial

try:
    from bvspin import _speedups as fast
except ImportError:  # no compiled extension in this install
    fast = None


def random_polys(roster, n_terms, n, seed):
    rng = random.Random(seed)
    syms = roster.symbols
    out = []
    for _ in range(n):
        terms = {}
        for _ in range(n_terms):
            f = {}
            for _ in range(rng.randint(1, 4)):
                s = rng.choice(syms)
                code = (s.id << pure.SHIFT) | rng.randint(0, 2)
                if s.parity:
                    f[code] = 1
                else:
                    f[code] = f.get(code, 0) + 1
            m = tuple(x for k in sorted(f) for x in (k, f[k]))
            terms[m] = rng.randint(-5, 5) or 1
        out.append(Polynomial(roster, terms))
    return out


def timed(fn, repeat):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - t)
    return best, result


def bench_poly_mul(mod, polys, odd):
    def run():
        acc = 0
        for a, b in zip(polys, polys[1:]):
            acc += len(mod.poly_mul(a.terms, b.terms, odd))
        return acc
    return run


def bench_dt(mod, polys, odd):
    def run():
        acc = 0
        for p in polys:
            for m in p.terms:
                acc += len(mod.mono_dt(m, odd))
        return acc
    return run


def bench_echelon(mod, rows):
    def run():
        e = mod.Echelon()
        for r in rows:
            e.add(dict(r), {})
        return e.rank
    return run


def echelon_rows(seed, n=250, width=400):
    rng = random.Random(seed)
    rows = []
    for _ in range(n):
        rows.append({rng.randrange(width): rng.randint(-9, 9) or 1 for _ in range(4)})
    return rows


def end_to_end(pure_backend: bool):
    env = dict(os.environ)
    if pure_backend:
        env["BVSPIN_PURE"] = "1"
    else:
        env.pop("BVSPIN_PURE", None)
    code = ("import time;from bvspin import BACKEND;from bvspin.models import parse_builtin;"
            "from bvspin.homology import cohomology_window, SpaceSpec, Window;"
            "M=parse_builtin('builtin:sugra:d=0');t=time.perf_counter();"
            "r=cohomology_window(SpaceSpec('A',M),-3,Window(6,2),2);"
            "print(BACKEND, r.dim_H_upper, time.perf_counter()-t)")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    backend, dim, secs = out.stdout.split()
    return backend, int(dim), float(secs)


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="skip the end-to-end run")
    args = ap.parse_args(argv)
    if fast is None:
        print("compiled extension not available; only the fallback can be timed")
        return 1
    model = parse_builtin("builtin:sugra:d=2")
    odd = model.roster.odd
    polys = random_polys(model.roster, 40, 60, seed=1)
    rows = echelon_rows(seed=2)
    cases = [("poly_mul", lambda m: bench_poly_mul(m, polys, odd)),
             ("mono_dt", lambda m: bench_dt(m, polys, odd)),
             ("echelon", lambda m: bench_echelon(m, rows))]
    print(f"{'kernel':<12}{'python s':>12}{'cython s':>12}{'speedup':>10}")
    for name, make in cases:
        tp, rp = timed(make(pure), args.repeat)
        tc, rc = timed(make(fast), args.repeat)
        if rp != rc:
            raise SystemExit(f"{name}: backends disagree ({rp} vs {rc})")
        print(f"{name:<12}{tp:>12.4f}{tc:>12.4f}{tp / tc:>10.1f}")
    if not args.quick:
        bc, dc, tc = end_to_end(False)
        bp, dp, tp = end_to_end(True)
        if dc != dp:
            raise SystemExit("end-to-end results differ between backends")
        print(f"{'cohomology':<12}{tp:>12.4f}{tc:>12.4f}{tp / tc:>10.1f}   (d=0, ghost -3, dim H = {dc};"
              f" backends {bp}/{bc})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
