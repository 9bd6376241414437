"""Micro-benchmarks for the bit-packed GF(2) kernels.

Runs the compiled extension and the pure-Python fallback on identical
inputs, checks that they agree, and prints per-operation timings with
the speedup factor.  Usage:

    python3 benchmarks/bench_kernels.py [--quick]

The pure fallback exists for portability, not speed; the numbers here
quantify what the extension buys (the exhaustive candidate walk is the
operation that matters most, since decode cost scales as 2^k).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from byzfount._kernels import BACKEND, pure
from byzfount.gf2 import BitMatrix, BitVector, random_matrix
from byzfount.seeds import make_rng

try:
    from byzfount._kernels import _gf2c as compiled
except ImportError:
    compiled = None


def _best_of(fn, args, reps: int) -> float:
    best = float("inf")
    for _ in range(reps):
        fresh = [a.copy() if isinstance(a, np.ndarray) else a for a in args]
        t0 = time.perf_counter()
        fn(*fresh)
        best = min(best, time.perf_counter() - t0)
    return best


def _normalize(out):
    if isinstance(out, tuple):
        return tuple(np.asarray(o).tolist() for o in out)
    return np.asarray(out).tolist()


def _cases(quick: bool, rng):
    nk = 64 if quick else 256
    mv_rows = 1024 if quick else 4096
    scan_k = 14 if quick else 18
    scan_n = 40

    square = random_matrix(nk, nk, rng)
    rhs_bits = random_matrix(nk, 1, rng).data
    tall = random_matrix(mv_rows, nk, rng)
    x = BitVector.random(nk, rng)

    coeff = random_matrix(scan_n, scan_k, rng)
    cols = coeff.transpose().data
    variant_rhs = random_matrix(4, scan_n, rng).data

    return [
        # name, fn name, args, reps (pure, compiled)
        (f"rank {nk}x{nk}", "rank", (square.data, nk, nk), (10, 200)),
        (f"rref {nk}x{nk}+rhs", "rref", (square.data, nk, nk, rhs_bits), (10, 200)),
        (f"matvec {mv_rows}x{nk}", "matvec", (tall.data, mv_rows, x.words), (20, 500)),
        (
            f"exhaustive_scan k={scan_k} n={scan_n} variants=4",
            "exhaustive_scan",
            (cols, variant_rhs, scan_n, scan_k, scan_n - 6),
            (2, 20),
        ),
    ]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true", help="smaller sizes, fewer reps")
    args = ap.parse_args()

    rng = make_rng(0)
    print(f"active package backend: {BACKEND}")
    if compiled is None:
        print("compiled extension not built; timing the pure fallback only\n")

    header = f"{'operation':<42} {'pure':>12} {'compiled':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, fn_name, case_args, (pr, cr) in _cases(args.quick, rng):
        pure_fn = getattr(pure, fn_name)
        t_pure = _best_of(pure_fn, case_args, pr)
        if compiled is not None:
            comp_fn = getattr(compiled, fn_name)
            got = _normalize(comp_fn(*[a.copy() if isinstance(a, np.ndarray) else a for a in case_args]))
            want = _normalize(pure_fn(*[a.copy() if isinstance(a, np.ndarray) else a for a in case_args]))
            if got != want:
                raise SystemExit(f"backend disagreement on {name}")
            t_comp = _best_of(comp_fn, case_args, cr)
            print(f"{name:<42} {t_pure * 1e3:>10.3f}ms {t_comp * 1e3:>10.3f}ms {t_pure / t_comp:>8.1f}x")
        else:
            print(f"{name:<42} {t_pure * 1e3:>10.3f}ms {'-':>12} {'-':>9}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
